"""Command-line entry point.

Every subcommand writes its outputs plus ``manifest.json`` (resolved config,
its hash, seed and library versions) into ``--out``. Exit codes: 0 success,
1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import platform
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .convfeat import write_conversation_csv
from .corpus import DumpError, build_trees, read_dump
from .experiments import (
    DEFAULT_T_GRID,
    load_dataset,
    make_splits,
    parse_feature_spec,
    popularity_null,
    run_config,
    time_sweep,
    transfer_matrix,
)
from .experiments.harness import EvalReport
from .labeler import (
    CONTROVERSIAL,
    NON_CONTROVERSIAL,
    class_mean_pupv,
    label_posts,
    read_id_list,
    validate_against_ranking,
    write_labels_csv,
)
from .learn import DEFAULT_STRENGTHS, MODEL_TYPES, accuracy, grid_search, make_grid
from .postfeat import EmbeddingFormatError, load_lexicon, load_wordlists
from .postfeat.fightin import fightin_words, write_fightin_csv

logger = logging.getLogger("controversy")

SUBCOMMANDS = ("ingest", "label", "featurize", "train", "evaluate", "sweep", "transfer", "popnull",
               "fightinwords", "synth", "report")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n\n{self.format_help()}")


@dataclass
class RunConfig:
    posts: list[str] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)
    embeddings: list[str] = field(default_factory=list)
    doc_vectors: list[str] = field(default_factory=list)
    wordlists: str | None = None
    lexicon: str | None = None
    out: str = "out"
    seed: int = 0
    features: list[str] = field(default_factory=lambda: ["TEXT+TIME"])
    baseline: str | None = None
    t: list[float | None] = field(default_factory=list)
    alpha: float = 0.05
    folds: int = 15
    community: list[str] = field(default_factory=list)
    strengths: list[float] = field(default_factory=lambda: list(DEFAULT_STRENGTHS))
    model_types: list[str] = field(default_factory=lambda: list(MODEL_TYPES))
    standardize: list[bool] = field(default_factory=lambda: [False, True])
    external_ids: str | None = None
    k: int = 3
    n_posts: int = 1000
    results: str | None = None
    alpha0: float = 500.0
    ngram_max: int = 3
    text_source: str = "posts"

    def grid(self):
        return make_grid(self.strengths, self.model_types, self.standardize)

    def manifest_view(self) -> dict:
        d = asdict(self)
        d.pop("out")
        return d


def parse_t(text: str) -> list[float | None]:
    """``15:180:15`` (inclusive), ``15,30,60``, a single value, or ``post``."""
    text = text.strip()
    if text.lower() in ("post", "none"):
        return [None]
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad --t range {text!r}; expected start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise UsageError(f"bad --t range {text!r}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [_num(start + i * step) for i in range(n)]
    return [_num(float(p)) for p in text.split(",") if p.strip()]


def _num(x: float):
    return int(x) if float(x).is_integer() else x


def _bool_list(text: str) -> list[bool]:
    table = {"both": [False, True], "yes": [True], "no": [False], "true": [True], "false": [False]}
    try:
        return table[text.lower()]
    except KeyError:
        raise UsageError(f"--standardize must be one of {sorted(table)}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig keys; flags override it")
    common.add_argument("--posts", "--in", nargs="+", dest="posts", help="posts JSONL (one per community)")
    common.add_argument("--comments", nargs="+", help="comments JSONL (one per community)")
    common.add_argument("--embeddings", nargs="+", help="token embedding file(s)")
    common.add_argument("--doc-vectors", nargs="+", help="precomputed document vector CSV(s)")
    common.add_argument("--wordlists", help="directory of category wordlists (one token per line)")
    common.add_argument("--lexicon", help="sentiment lexicon TSV (token, weight)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--features", help="comma-separated feature specs, e.g. TEXT+TIME,C-RATE+C-TREE")
    common.add_argument("--baseline", help="post-time baseline spec (default TEXT+TIME for sweep)")
    common.add_argument("--t", help="window(s) in minutes: 60, 15,30 or 15:180:15; 'post' for none")
    common.add_argument("--alpha", type=float)
    common.add_argument("--folds", type=int)
    common.add_argument("--community", nargs="+")
    common.add_argument("--strengths", help="comma-separated regularization strengths")
    common.add_argument("--model-types", help=f"comma-separated subset of {','.join(MODEL_TYPES)}")
    common.add_argument("--standardize", help="both | yes | no")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="controversy", description="Early controversy prediction pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "ingest": "parse dumps, build trees, report skips and orphans",
        "label": "filter posts and write controversy labels",
        "featurize": "export C-RATE/C-TREE features per (post, t)",
        "train": "grid-search one model on the first split and save it",
        "evaluate": "cross-validate feature specs",
        "sweep": "sweep the observation window against a post-time baseline",
        "transfer": "train on one community, test on another",
        "popnull": "popularity-prediction null experiment",
        "fightinwords": "contrast n-gram usage between the two classes",
        "synth": "generate a synthetic community",
        "report": "render tables and figures from a results directory",
    }
    subs = {name: sub.add_parser(name, parents=[common], help=h, description=h) for name, h in helps.items()}
    subs["label"].add_argument("--external-ids", help="newline-delimited ids of externally ranked posts")
    subs["label"].add_argument("--k", type=int, help="unlisted posts sampled per listed post (1-3)")
    subs["synth"].add_argument("--n-posts", type=int)
    subs["report"].add_argument("--results", help="directory holding sweep/evaluate/transfer CSVs")
    subs["fightinwords"].add_argument("--alpha0", type=float, help="Dirichlet prior mass (default 500)")
    subs["fightinwords"].add_argument("--ngram-max", type=int)
    subs["fightinwords"].add_argument("--text-source", choices=["posts", "comments"])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read config {args.config}: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        unknown = set(raw) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "t" in raw:
            raw["t"] = parse_t(raw["t"]) if isinstance(raw["t"], str) else list(raw["t"])
        if isinstance(raw.get("features"), str):
            raw["features"] = raw["features"].split(",")
        cfg = replace(cfg, **raw)

    overrides = {}
    for name in ("posts", "comments", "embeddings", "doc_vectors", "community"):
        if getattr(args, name, None):
            overrides[name] = list(getattr(args, name))
    for name in ("wordlists", "lexicon", "out", "seed", "baseline", "alpha", "folds", "external_ids", "k", "n_posts", "results",
                 "alpha0", "ngram_max", "text_source"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if args.features:
        overrides["features"] = [s for s in args.features.split(",") if s.strip()]
    if args.t:
        overrides["t"] = parse_t(args.t)
    if args.strengths:
        overrides["strengths"] = [float(s) for s in args.strengths.split(",")]
    if args.model_types:
        overrides["model_types"] = args.model_types.split(",")
    if args.standardize:
        overrides["standardize"] = _bool_list(args.standardize)
    cfg = replace(cfg, **overrides)

    for spec in cfg.features + ([cfg.baseline] if cfg.baseline else []):
        try:
            parse_feature_spec(spec)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    bad = [m for m in cfg.model_types if m not in MODEL_TYPES]
    if bad:
        raise UsageError(f"unknown model types {bad}")
    for p in cfg.posts + cfg.comments + cfg.embeddings + cfg.doc_vectors + (
            [cfg.external_ids] if cfg.external_ids else []) + [
            p for p in (cfg.wordlists, cfg.lexicon) if p]:
        if not Path(p).exists():
            raise DataError(f"input file not found: {p}")
    return cfg


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(command: str, cfg: RunConfig, out: Path) -> None:
    view = cfg.manifest_view()
    blob = json.dumps(_jsonable(view), sort_keys=True)
    write_json({
        "command": command,
        "config": view,
        "config_hash": hashlib.sha256(blob.encode()).hexdigest(),
        "seed": cfg.seed,
        "versions": {
            "controversy": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }, out / "manifest.json")


def _require(cfg: RunConfig, *names: str):
    for name in names:
        if not getattr(cfg, name):
            raise UsageError(f"--{name.replace('_', '-')} is required for this command")


def _datasets(cfg: RunConfig, at_least: int = 1):
    _require(cfg, "posts", "comments")
    if len(cfg.posts) != len(cfg.comments):
        raise UsageError("--posts and --comments need the same number of files")
    if len(cfg.posts) < at_least:
        raise UsageError(f"need at least {at_least} communities")
    names = cfg.community or [Path(p).stem for p in cfg.posts]
    if len(names) != len(cfg.posts):
        raise UsageError("--community needs one name per posts file")

    def nth(items, i):
        if not items:
            return None
        return items[i] if len(items) > 1 else items[0]

    lexicon = load_lexicon(cfg.lexicon) if cfg.lexicon else None
    wordlists = load_wordlists(cfg.wordlists) if cfg.wordlists else None
    out = []
    for i, (p, c) in enumerate(zip(cfg.posts, cfg.comments)):
        ds, report = load_dataset(p, c, names[i], nth(cfg.embeddings, i), nth(cfg.doc_vectors, i))
        ds.lexicon, ds.wordlists = lexicon, wordlists
        if len(ds) < 20:
            raise DataError(f"community {names[i]!r} has only {len(ds)} labeled posts")
        out.append((ds, report))
    return out


def _t_single(cfg: RunConfig, default=None):
    if not cfg.t:
        return default
    if len(cfg.t) != 1:
        raise UsageError("this command takes a single --t value")
    return cfg.t[0]


def _fold_rows(report: EvalReport, community: str) -> list[list]:
    t = "post" if report.t is None else report.t
    return [[community, report.config, t, f, repr(a)] for f, a in enumerate(report.accuracies)]


def _write_fold_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["community", "config", "t", "fold", "accuracy"])
        w.writerows(rows)


# --- subcommands ----------------------------------------------------------------

def cmd_ingest(cfg: RunConfig, out: Path):
    summaries = {}
    for ds, report in _datasets(cfg):
        summaries[ds.name] = report.to_dict()
    write_json(summaries, out / "ingest_report.json")


def cmd_label(cfg: RunConfig, out: Path):
    _require(cfg, "posts")
    posts = []
    skipped = 0
    for p in cfg.posts:
        res = read_dump(p, "posts")
        posts.extend(res.records)
        skipped += res.n_skipped
    try:
        records = label_posts(posts)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    write_labels_csv(records, out / "labels.csv")
    summary = {"n_posts": len(posts), "n_skipped_lines": skipped,
               "class_mean_pupv": class_mean_pupv(records),
               "counts": {}}
    for r in records:
        key = r.label if r.labeled else r.discard_reason
        summary["counts"][key] = summary["counts"].get(key, 0) + 1
    if cfg.external_ids:
        summary["validation"] = validate_against_ranking(posts, read_id_list(cfg.external_ids), cfg.k,
                                                         cfg.seed)
    write_json(summary, out / "label_summary.json")


def cmd_featurize(cfg: RunConfig, out: Path):
    _require(cfg, "posts", "comments")
    posts = [r for p in cfg.posts for r in read_dump(p, "posts").records]
    comments = [r for c in cfg.comments for r in read_dump(c, "comments").records]
    built = build_trees(posts, comments)
    t_values = [t for t in (cfg.t or list(DEFAULT_T_GRID)) if t is not None]
    trees = sorted(built.trees, key=lambda tr: tr.post.id)
    write_conversation_csv(trees, t_values, out / "conversation_features.csv")
    write_json(built.report(), out / "tree_report.json")


def cmd_train(cfg: RunConfig, out: Path):
    (ds, _), = _datasets(cfg)
    spec = cfg.features[0]
    t = _t_single(cfg)
    from .experiments import Featurizer

    split = make_splits(ds.row_ids, ds.labels, 1, cfg.seed)[0]
    fz = Featurizer(spec, t).fit(ds, split.train)
    X_tr, X_dev, X_te = (fz.transform(ds, r) for r in (split.train, split.dev, split.test))
    best = grid_search(X_tr, ds.labels[split.train], X_dev, ds.labels[split.dev], cfg.grid(), cfg.seed)
    (out / "model.json").write_text(best.model.to_json() + "\n", encoding="utf-8")
    write_json({"config": spec, "t": t, "dev_accuracy": best.dev_accuracy,
                "test_accuracy": accuracy(best.model, X_te, ds.labels[split.test]),
                "hyperparameters": asdict(best.model.hyperparameters)}, out / "metrics.json")


def cmd_evaluate(cfg: RunConfig, out: Path):
    (ds, _), = _datasets(cfg)
    splits = make_splits(ds.row_ids, ds.labels, cfg.folds, cfg.seed)
    t = _t_single(cfg)
    base = None
    if cfg.baseline:
        base = run_config(ds, cfg.baseline, None, splits, cfg.grid(), cfg.seed)
    rows, summary = [], []
    for spec in cfg.features:
        needs_t = any(f.startswith("C-") for f in parse_feature_spec(spec))
        rep = run_config(ds, spec, t if needs_t else None, splits, cfg.grid(), cfg.seed)
        if base is not None:
            rep.compare_to(base)
        rows += _fold_rows(rep, ds.name)
        summary.append(rep.to_dict())
    _write_fold_csv(rows, out / "results.csv")
    write_json({"community": ds.name, "reports": summary,
                "baseline": base.to_dict() if base else None}, out / "summary.json")


def cmd_sweep(cfg: RunConfig, out: Path):
    (ds, _), = _datasets(cfg)
    splits = make_splits(ds.row_ids, ds.labels, cfg.folds, cfg.seed)
    t_grid = [t for t in (cfg.t or list(DEFAULT_T_GRID)) if t is not None]
    result = time_sweep(ds, cfg.features, splits, baseline=cfg.baseline or "TEXT+TIME", t_grid=t_grid,
                        alpha=cfg.alpha, grid=cfg.grid(), seed=cfg.seed)
    rows = _fold_rows(result.baseline, ds.name)
    for rep in sorted(result.reports, key=lambda r: (r.config, r.t)):
        rows += _fold_rows(rep, ds.name)
    _write_fold_csv(rows, out / "sweep.csv")
    write_json({"community": ds.name, "alpha": result.alpha, "alpha_strict": result.alpha_strict,
                "baseline": result.baseline.to_dict(), "t_s": result.t_s,
                "t_s_strict": result.t_s_strict, "reports": result.rows()}, out / "summary.json")


def cmd_transfer(cfg: RunConfig, out: Path):
    pairs = _datasets(cfg, at_least=2)
    datasets = [ds for ds, _ in pairs]
    splits = [make_splits(ds.row_ids, ds.labels, cfg.folds, cfg.seed) for ds in datasets]
    t = _t_single(cfg, default=60)
    rows = []
    for spec in cfg.features:
        res = transfer_matrix(datasets, spec, t, splits, cfg.grid(), cfg.seed)
        rows += res.rows()
    with open(out / "transfer.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=["config", "t", "train", "test", "accuracy", "degradation"])
        w.writeheader()
        for r in rows:
            w.writerow({**r, "accuracy": repr(r["accuracy"]), "degradation": repr(r["degradation"])})
    write_json({"rows": rows}, out / "summary.json")


def cmd_popnull(cfg: RunConfig, out: Path):
    (ds, _), = _datasets(cfg)
    splits = make_splits(ds.row_ids, ds.labels, cfg.folds, cfg.seed)
    t = _t_single(cfg, default=180)
    res = popularity_null(ds, cfg.features[0], splits, t=t, grid=cfg.grid(), seed=cfg.seed)
    _write_fold_csv(_fold_rows(res.predictor, ds.name) + _fold_rows(res.oracle, ds.name),
                    out / "results.csv")
    write_json(res.to_dict(), out / "popnull.json")


def cmd_fightinwords(cfg: RunConfig, out: Path):
    (ds, _), = _datasets(cfg)
    groups = {CONTROVERSIAL: [], NON_CONTROVERSIAL: []}
    for tree, y in zip(ds.trees, ds.labels):
        key = CONTROVERSIAL if y == 1 else NON_CONTROVERSIAL
        if cfg.text_source == "comments":
            t = _t_single(cfg, default=60)
            from .corpus import prune_to_window
            groups[key] += [c.body for c in prune_to_window(tree, t).comments.values() if not c.body_deleted]
        else:
            post = tree.post
            groups[key].append(post.title + "\n" + ("" if post.body_deleted else post.body))
    z = fightin_words(groups[CONTROVERSIAL], groups[NON_CONTROVERSIAL], cfg.ngram_max, cfg.alpha0)
    write_fightin_csv(z, out / "fightin_words.csv")


def cmd_synth(cfg: RunConfig, out: Path):
    from .synth import SynthConfig, generate_corpus, write_corpus

    community = cfg.community[0] if cfg.community else "synth"
    corpus = generate_corpus(SynthConfig(n_posts=cfg.n_posts, seed=cfg.seed, community=community))
    write_corpus(corpus, out)


def cmd_report(cfg: RunConfig, out: Path):
    from . import plotting

    results = Path(cfg.results or cfg.out)
    fold_files = [results / n for n in ("sweep.csv", "results.csv") if (results / n).exists()]
    transfer_file = results / "transfer.csv"
    if not fold_files and not transfer_file.exists():
        raise DataError(f"no sweep.csv, results.csv or transfer.csv in {results}")
    if fold_files:
        rows = [r for f in fold_files for r in plotting.read_fold_csv(f)]
        summary = plotting.summarize(rows)
        with open(out / "summary_table.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=["community", "config", "t", "n_folds", "mean", "stderr"])
            w.writeheader()
            for r in summary:
                w.writerow({**r, "mean": repr(r["mean"]), "stderr": repr(r["stderr"])})
        communities = sorted({r["community"] for r in summary}) or [""]
        for community in communities:
            mine = [r for r in summary if r["community"] == community]
            fig = plotting.sweep_figure(mine, community)
            plotting.save_figure(fig, out / f"accuracy_vs_t{'_' + community if community else ''}.svg")
    if transfer_file.exists():
        with open(transfer_file, newline="", encoding="utf-8") as fh:
            trows = list(csv.DictReader(fh))
        for config in sorted({r["config"] for r in trows}):
            mine = [r for r in trows if r["config"] == config]
            safe = config.replace("+", "_")
            plotting.save_figure(plotting.transfer_figure(mine), out / f"transfer_{safe}.svg")


COMMANDS = {name: globals()[f"cmd_{name}"] for name in SUBCOMMANDS}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out)
        write_manifest(args.command, cfg, out)
    except UsageError as exc:
        print(f"controversy {args.command}: {exc}", file=sys.stderr)
        return 1
    except (DataError, DumpError, EmbeddingFormatError, FileNotFoundError, ValueError) as exc:
        print(f"controversy {args.command}: data error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
