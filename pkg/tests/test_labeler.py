import numpy as np
import pytest

from controversy.labeler import (
    CONTROVERSIAL,
    DISCARDED,
    NON_CONTROVERSIAL,
    assign_labels,
    class_scores,
    estimate_pupv,
    filter_posts,
    label_posts,
    read_id_list,
    read_labels_csv,
    validate_against_ranking,
    write_labels_csv,
)
from helpers import make_post


def test_estimate_pupv():
    assert estimate_pupv([0.7] * 10) == pytest.approx(0.7, abs=1e-15)
    assert estimate_pupv([0.6, 0.8]) == pytest.approx(0.7, abs=1e-15)
    rng = np.random.default_rng(1)
    xs = rng.random(10).tolist()
    acc = 0.0
    for x in xs:
        acc += x
    assert estimate_pupv(xs) == pytest.approx(acc / 10, abs=1e-15)
    with pytest.raises(ValueError):
        estimate_pupv([])


@pytest.mark.parametrize("post, reason", [
    (make_post(n_comments=29), "too_few_comments"),
    (make_post(pupv=(0.60, 0.62, 0.64, 0.66)), "unstable_estimate"),
    (make_post(pupv=(0.7,) * 10, scores=(5,) * 10), "degenerate_votes"),
    (make_post(pupv=(0.45, 0.46)), "below_half"),
])
def test_filter_reasons(post, reason):
    survivors, discarded = filter_posts([post])
    assert survivors == [] and discarded[0].discard_reason == reason


def test_filter_boundaries():
    keep = [make_post(n_comments=30), make_post(pupv=(0.65, 0.70)),     # range exactly 0.05 stays
            make_post(pupv=(0.7,) * 10, scores=(5, 6)), make_post(pupv=(0.5, 0.5), scores=(1, 2))]
    survivors, discarded = filter_posts(keep)
    assert len(survivors) == 4 and not discarded


def test_filter_order_first_rule_wins():
    post = make_post(n_comments=5, pupv=(0.1, 0.9))
    assert filter_posts([post])[1][0].discard_reason == "too_few_comments"


def test_filter_idempotent():
    rng = np.random.default_rng(2)
    posts = [make_post(f"p{i}", n_comments=int(rng.integers(0, 60)),
                       pupv=tuple(np.clip(rng.uniform(0.3, 1) + rng.uniform(-0.04, 0.04, 10), 0, 1)))
             for i in range(200)]
    survivors, _ = filter_posts(posts)
    again, dropped = filter_posts(survivors)
    assert again == survivors and dropped == []


def test_quartiles_eight_posts():
    posts = [make_post(f"p{i}", pupv=(0.5 + 0.05 * i,)) for i in range(8)]
    recs = {r.post_id: r for r in assign_labels(posts)}
    assert [recs[f"p{i}"].label for i in range(8)] == [CONTROVERSIAL] * 2 + [DISCARDED] * 4 + [NON_CONTROVERSIAL] * 2
    assert recs["p3"].discard_reason == "middle_band"


def test_quartile_ties_broken_by_id():
    posts = [make_post(pid, pupv=(0.8,)) for pid in "hgfedcba"] + [make_post("z", pupv=(0.9,))]
    recs = {r.post_id: r.label for r in assign_labels(posts)}
    assert recs["a"] == recs["b"] == CONTROVERSIAL
    assert recs["z"] == recs["h"] == NON_CONTROVERSIAL


def test_too_few_survivors():
    with pytest.raises(ValueError):
        assign_labels([make_post(f"p{i}") for i in range(7)])


def test_balance_and_no_label_below_half():
    rng = np.random.default_rng(4)
    posts = [make_post(f"p{i}", pupv=tuple(np.clip(rng.uniform(0.3, 1) + rng.uniform(-0.02, 0.02, 10), 0, 1)))
             for i in range(403)]
    recs = label_posts(posts)
    assert len(recs) == 403
    n_c = sum(r.label == CONTROVERSIAL for r in recs)
    assert n_c == sum(r.label == NON_CONTROVERSIAL for r in recs) > 0
    assert all(r.pupv_estimate >= 0.5 for r in recs if r.labeled)
    assert all(r.discard_reason is None for r in recs if r.labeled)


def _confusion_oracle(pred, truth, cls):
    tp = fp = fn = 0
    for p, t in zip(pred, truth):
        tp += p == cls and t == cls
        fp += p == cls and t != cls
        fn += p != cls and t == cls
    prec, rec = tp / (tp + fp), tp / (tp + fn)
    return prec, rec, 2 * prec * rec / (prec + rec)


def test_class_scores_against_confusion_oracle():
    rng = np.random.default_rng(9)
    truth = rng.choice([CONTROVERSIAL, NON_CONTROVERSIAL], 300).tolist()
    pred = [t if rng.random() < 0.8 else (CONTROVERSIAL if t == NON_CONTROVERSIAL else NON_CONTROVERSIAL)
            for t in truth]
    got = class_scores(pred, truth)
    for cls in (CONTROVERSIAL, NON_CONTROVERSIAL):
        p, r, f = _confusion_oracle(pred, truth, cls)
        assert got[cls]["precision"] == pytest.approx(p, abs=1e-12)
        assert got[cls]["recall"] == pytest.approx(r, abs=1e-12)
        assert got[cls]["f1"] == pytest.approx(f, abs=1e-12)


def test_validation_perfect_agreement():
    listed = [make_post(f"c{i}", pupv=(0.60 + 0.001 * i, 0.61 + 0.001 * i)) for i in range(20)]
    others = [make_post(f"n{i}", pupv=(0.95, 0.96)) for i in range(60)]
    res = validate_against_ranking(listed + others, {p.id for p in listed}, k=1, seed=0)
    assert res["scores"][CONTROVERSIAL]["f1"] == 1.0
    assert res["scores"][NON_CONTROVERSIAL]["f1"] == 1.0
    for bad_k in (0, 4):
        with pytest.raises(ValueError):
            validate_against_ranking(listed + others, {"c0"}, k=bad_k)
    with pytest.raises(ValueError):
        validate_against_ranking(listed, set(), k=1)


def test_labels_csv_round_trip(tmp_path):
    recs = label_posts([make_post(f"p{i}", pupv=(0.5 + 0.04 * i,)) for i in range(9)]
                       + [make_post("short", n_comments=3)])
    write_labels_csv(recs, tmp_path / "l.csv")
    assert (tmp_path / "l.csv").read_text().splitlines()[0] == "post_id,pupv_estimate,label,discard_reason"
    assert sorted(read_labels_csv(tmp_path / "l.csv"), key=lambda r: r.post_id) == sorted(recs, key=lambda r: r.post_id)
    (tmp_path / "ids.txt").write_text("a\n\n b \n")
    assert read_id_list(tmp_path / "ids.txt") == {"a", "b"}
