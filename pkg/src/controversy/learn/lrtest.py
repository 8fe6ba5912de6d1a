"""Nested logistic models compared by a likelihood-ratio test."""

from __future__ import annotations

import numpy as np
from scipy import special, stats


def logistic_loglik(weights, intercept: float, X, y) -> float:
    """Total Bernoulli log-likelihood of 0/1 labels under a logistic model."""
    ys = np.where(np.asarray(y) == 1, 1.0, -1.0)
    z = np.asarray(X, dtype=float) @ np.asarray(weights, dtype=float) + intercept
    return float(-np.logaddexp(0.0, -ys * z).sum())


def fit_logistic_mle(X, y, max_iter: int = 100, tol: float = 1e-10):
    """Unpenalized maximum-likelihood logistic fit by damped Newton steps.

    Returns (weights, intercept, log_likelihood).
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    Xa = np.hstack([np.ones((n, 1)), X])
    yv = np.asarray(y, dtype=float)
    theta = np.zeros(d + 1)

    def ll(th):
        return logistic_loglik(th[1:], th[0], X, yv)

    cur = ll(theta)
    for _ in range(max_iter):
        p = special.expit(Xa @ theta)
        grad = Xa.T @ (yv - p)
        hess = (Xa * (p * (1 - p))[:, None]).T @ Xa
        try:
            step = np.linalg.solve(hess + 1e-12 * np.eye(d + 1), grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        t = 1.0
        while True:
            cand = theta + t * step
            new = ll(cand)
            if new >= cur or t < 1e-10:
                break
            t /= 2
        if new < cur:
            break
        theta, gain, cur = cand, new - cur, new
        if gain < tol:
            break
    return theta[1:], float(theta[0]), cur


def likelihood_ratio_test(ll_nested: float, ll_full: float, df_added: int) -> float:
    """Upper chi-square tail of the deviance 2 (ll_full - ll_nested)."""
    if df_added < 1:
        raise ValueError("df_added must be at least 1")
    deviance = 2.0 * (ll_full - ll_nested)
    if deviance < -1e-6:
        raise ValueError(f"negative deviance {deviance:.3g}: models are not nested")
    return float(stats.chi2.sf(max(deviance, 0.0), df_added))


def nested_lr_test(X_nested, X_full, y) -> float:
    """Fit both models by ML and test the columns that ``X_full`` adds."""
    X_nested = np.asarray(X_nested, dtype=float)
    X_full = np.asarray(X_full, dtype=float)
    df = X_full.shape[1] - X_nested.shape[1]
    ll_n = fit_logistic_mle(X_nested, y)[2]
    ll_f = fit_logistic_mle(X_full, y)[2]
    return likelihood_ratio_test(ll_n, ll_f, df)
