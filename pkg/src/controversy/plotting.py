"""Static figures for the report command.

All figures are rendered headless to SVG with a fixed hash salt and no date
metadata, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "svg.hashsalt": "controversy-report",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
}

POST_ONLY = "post"


def read_fold_csv(path) -> list[dict]:
    """Rows of a ``community,config,t,fold,accuracy`` results file."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = []
        for row in csv.DictReader(fh):
            rows.append({
                "community": row.get("community", ""),
                "config": row["config"],
                "t": row["t"],
                "fold": int(row["fold"]),
                "accuracy": float(row["accuracy"]),
            })
    return rows


def summarize(rows: list[dict]) -> list[dict]:
    """Mean and standard error per (community, config, t)."""
    groups = defaultdict(list)
    for r in rows:
        groups[(r["community"], r["config"], r["t"])].append(r["accuracy"])
    out = []
    for (community, config, t), accs in sorted(groups.items(), key=lambda kv: _sort_key(kv[0])):
        n = len(accs)
        mean = sum(accs) / n
        se = math.sqrt(sum((a - mean) ** 2 for a in accs) / (n - 1) / n) if n > 1 else 0.0
        out.append({"community": community, "config": config, "t": t, "n_folds": n,
                    "mean": mean, "stderr": se})
    return out


def _sort_key(key):
    community, config, t = key
    return community, config, (-1.0 if t == POST_ONLY else float(t))


def sweep_figure(summary: list[dict], community: str = "", baseline: str | None = None):
    """Accuracy against observation window, one line per feature set."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        lines = defaultdict(list)
        flat = {}
        for row in summary:
            if row["t"] == POST_ONLY:
                flat[row["config"]] = row["mean"]
            else:
                lines[row["config"]].append((float(row["t"]), row["mean"]))
        for config in sorted(lines):
            pts = sorted(lines[config])
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", markersize=3, label=config)
        for config in sorted(flat):
            ax.axhline(flat[config], linestyle="--", linewidth=1, color="0.4",
                       label=f"{config} (post time)")
        ax.set_xlabel("observation window t (minutes)")
        ax.set_ylabel("test accuracy")
        ax.set_title(community or "accuracy vs. observation window")
        if lines or flat:
            ax.legend(fontsize=7, loc="lower right")
        fig.tight_layout()
    return fig


def transfer_figure(rows: list[dict], value: str = "degradation"):
    """Train-by-test heat table; rows are training communities."""
    names = sorted({r["train"] for r in rows} | {r["test"] for r in rows})
    pos = {n: i for i, n in enumerate(names)}
    grid = [[math.nan] * len(names) for _ in names]
    for r in rows:
        grid[pos[r["train"]]][pos[r["test"]]] = float(r[value])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(1.2 + 0.8 * len(names), 1.0 + 0.8 * len(names)))
        im = ax.imshow(grid, cmap="RdBu", vmin=-1 if value == "degradation" else 0.0, vmax=1)
        ax.set_xticks(range(len(names)), names)
        ax.set_yticks(range(len(names)), names)
        ax.set_xlabel("test")
        ax.set_ylabel("train")
        for i in range(len(names)):
            for j in range(len(names)):
                v = grid[i][j]
                ax.text(j, i, "n/a" if math.isnan(v) else f"{100 * v:.0f}%", ha="center", va="center",
                        fontsize=7)
        fig.colorbar(im, ax=ax, shrink=0.8)
        fig.tight_layout()
    return fig


def save_figure(fig, path) -> Path:
    path = Path(path)
    with plt.rc_context(STYLE):
        fig.savefig(path, format=path.suffix.lstrip(".") or "svg", metadata={"Date": None})
    plt.close(fig)
    return path
