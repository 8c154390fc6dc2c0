"""Command-line entry point.

Subcommands: synth, fit, eval-id, eval-verif, matrix, cluster, sweep.
The env var ``EMBALIGN_SEEDS`` (comma-separated) overrides the default
seed list {0..4}; an explicit ``--seeds`` flag overrides both.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import align, analysis, embedstore, ident_eval, reports, splits, synth, verif_eval
from .errors import EmbalignError
from .prep import apply_prep, fit_prep, l2_normalize


# run-environment knobs that must not leak into reports: identical inputs
# have to produce byte-identical output regardless of where it goes or how
# many workers computed it
_NON_CONFIG = ("func", "out", "out_dir", "jobs", "dump_splits")


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}


def _seed_list(args) -> list:
    if getattr(args, "seeds", None):
        return [int(s) for s in args.seeds.split(",")]
    env = os.environ.get("EMBALIGN_SEEDS")
    if env:
        return [int(s) for s in env.split(",")]
    return list(splits.DEFAULT_SEEDS)


def _load(path: str, fmt: str) -> embedstore.EmbeddingSet:
    name = os.path.splitext(os.path.basename(path))[0]
    return embedstore.load_embeddings(path, fmt, model_name=name)


def _add_pair_args(p):
    p.add_argument("--source", required=True, help="source embedding file")
    p.add_argument("--target", required=True, help="target embedding file")
    p.add_argument("--format", default="binary", choices=("binary", "csv"))
    p.add_argument("--method", default="procrustes", choices=align.METHODS)
    p.add_argument("--alpha", type=float, default=align.DEFAULT_RIDGE_ALPHA,
                   help="ridge regularization weight")
    p.add_argument("--train-frac", type=float, default=0.7)


def _add_eval_args(p):
    _add_pair_args(p)
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--dump-splits", action="store_true",
                   help="also write the per-seed splits as JSON")


def cmd_synth(args):
    cloud = synth.generate_identity_cloud(
        args.ids, args.per_id, args.intrinsic_dim,
        center_scale=args.center_scale, spread=args.spread, seed=args.seed,
    )
    os.makedirs(args.out, exist_ok=True)
    written = []
    for v in range(args.views):
        view = synth.embed_view(
            cloud, args.dim, view_seed=args.seed * 1000 + v,
            noise=args.noise, map_kind=args.map_kind,
            model_name=f"view{v}",
        )
        path = os.path.join(args.out, f"view{v}.emb")
        embedstore.save_embeddings(view, path, "binary")
        written.append(path)
    for path in written:
        print(path)
    return 0


def cmd_fit(args):
    a = _load(args.source, args.format)
    b = _load(args.target, args.format)
    a, b = embedstore.intersect_on_images(a, b)
    labels = list(a.labels)
    norm_a = l2_normalize(a.rows)
    norm_b = l2_normalize(b.rows)
    split = splits.identity_disjoint_split(labels, args.train_frac, args.seed)
    tr = list(split.train_rows)
    stats = fit_prep(norm_a[tr], norm_b[tr])
    xp = apply_prep(norm_a[tr], stats, "source")
    yp = apply_prep(norm_b[tr], stats, "target")
    w = align.fit_map(xp, yp, args.method, args.alpha)
    amap = align.AlignmentMap(
        w=w, stats=stats, method=args.method,
        alpha=args.alpha if args.method == "ridge" else 0.0,
        source_model=a.model_name, target_model=b.model_name, seed=args.seed,
    )
    align.save_map(amap, args.out)
    print(args.out)
    return 0


def _dump_splits(out_dir, labels, fraction, seeds, tag):
    doc = {
        str(seed): splits.identity_disjoint_split(labels, fraction, seed).to_dict()
        for seed in seeds
    }
    path = os.path.join(out_dir, f"{tag}_splits.json")
    reports._atomic_write_text(path, reports.canonical_json(doc))


def cmd_eval_id(args):
    a = _load(args.source, args.format)
    b = _load(args.target, args.format)
    seeds = _seed_list(args)
    report = ident_eval.evaluate_identification(
        a, b, method=args.method, seeds=seeds, fraction=args.train_frac,
        alpha=args.alpha, exclude_self=args.exclude_self, jobs=args.jobs,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    config = _config(args)
    reports.write_report(
        os.path.join(args.out_dir, "identification_report.json"),
        config, "identification", {"metrics": report.to_dict()},
        input_paths=[args.source, args.target],
    )
    reports.write_csv(
        os.path.join(args.out_dir, "cmc.csv"),
        ["rank", "accuracy_mean", "accuracy_std"],
        reports.cmc_csv_rows(report.summary),
    )
    if args.dump_splits:
        ia, _ = embedstore.intersect_on_images(a, b)
        _dump_splits(args.out_dir, list(ia.labels), args.train_frac, seeds, "eval_id")
    return 0


def cmd_eval_verif(args):
    a = _load(args.source, args.format)
    b = _load(args.target, args.format)
    seeds = _seed_list(args)
    kwargs = {}
    if args.train_source:
        kwargs["train_source"] = _load(args.train_source, args.format)
        kwargs["train_target"] = _load(args.train_target, args.format)
        kwargs["pair_caps"] = (args.genuine_cap, args.impostor_cap)
    report = verif_eval.evaluate_verification(
        a, b, method=args.method, seeds=seeds, fraction=args.train_frac,
        alpha=args.alpha, symmetric_score=args.symmetric_score,
        jobs=args.jobs, **kwargs,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    config = _config(args)
    reports.write_report(
        os.path.join(args.out_dir, "verification_report.json"),
        config, "verification", {"metrics": report.to_dict()},
        input_paths=[args.source, args.target],
    )
    reports.write_csv(
        os.path.join(args.out_dir, "roc.csv"),
        ["fmr", "tmr"],
        reports.roc_csv_rows(report.summary),
    )
    if args.dump_splits:
        ia, _ = embedstore.intersect_on_images(a, b)
        _dump_splits(args.out_dir, list(ia.labels), args.train_frac, seeds, "eval_verif")
    return 0


def cmd_matrix(args):
    sets = [_load(p, args.format) for p in args.inputs]
    seeds = _seed_list(args)
    cm = analysis.build_compatibility_matrix(
        sets, method=args.method, seeds=seeds, fraction=args.train_frac,
        alpha=args.alpha, jobs=args.jobs,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    config = _config(args)
    reports.write_report(
        os.path.join(args.out_dir, "compatibility_matrix.json"),
        config, "compatibility_matrix", {"metrics": cm.to_dict()},
        input_paths=list(args.inputs),
    )
    header = ["model"] + list(cm.model_names)
    rows = [
        [name] + [float(v) if not np.isnan(v) else "missing" for v in cm.rank1[i]]
        for i, name in enumerate(cm.model_names)
    ]
    reports.write_csv(os.path.join(args.out_dir, "compatibility_matrix.csv"), header, rows)
    return 0


def cmd_cluster(args):
    import json

    with open(args.matrix, "r", encoding="utf-8") as f:
        doc = json.load(f)
    metrics = doc.get("metrics", doc)
    names = metrics["model_names"]
    rank1 = np.array(
        [[np.nan if v is None else v for v in row] for row in metrics["rank1"]]
    )
    cm = analysis.CompatibilityMatrix(names, rank1, metrics.get("dataset", ""),
                                      metrics.get("method", "procrustes"))
    sym = analysis.symmetrize(cm)
    dend = analysis.agglomerative_cluster(sym, linkage=args.linkage, model_names=names)
    asym = analysis.asymmetry_stats(cm)
    os.makedirs(args.out_dir, exist_ok=True)
    config = _config(args)
    reports.write_report(
        os.path.join(args.out_dir, "cluster_report.json"),
        config, "clustering",
        {"metrics": {"dendrogram": dend.to_dict(), "asymmetry": asym}},
        input_paths=[args.matrix],
    )
    reports._atomic_write_text(
        os.path.join(args.out_dir, "dendrogram.newick"), dend.to_newick() + "\n"
    )
    return 0


def cmd_sweep(args):
    a = _load(args.source, args.format)
    b = _load(args.target, args.format)
    seeds = _seed_list(args)
    fractions = [float(f) for f in args.fractions.split(",")]
    methods = tuple(args.methods.split(","))
    table = analysis.training_size_sweep(
        a, b, fractions, seeds=seeds, methods=methods,
        base_fraction=args.train_frac, alpha=args.alpha,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    config = _config(args)
    reports.write_report(
        os.path.join(args.out_dir, "sweep_report.json"),
        config, "training_size_sweep", {"metrics": table},
        input_paths=[args.source, args.target],
    )
    reports.write_csv(
        os.path.join(args.out_dir, "sweep.csv"),
        ["method", "fraction", "rank1_mean", "rank1_std"],
        [
            (r["method"], float(r["fraction"]), float(r["rank1_mean"]), float(r["rank1_std"]))
            for r in table["summary"]
        ],
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embalign",
        description="Fit and evaluate linear maps between embedding spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic embedding views")
    p.add_argument("--ids", type=int, default=100)
    p.add_argument("--per-id", type=int, default=10)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--intrinsic-dim", type=int, default=16)
    p.add_argument("--views", type=int, default=2)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--center-scale", type=float, default=1.0)
    p.add_argument("--spread", type=float, default=0.1)
    p.add_argument("--map-kind", default="orthogonal",
                   choices=("orthogonal", "general_linear"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit an alignment map on a train split")
    _add_pair_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval-id", help="identification protocol (Rank-k, mAP, CMC)")
    _add_eval_args(p)
    p.add_argument("--exclude-self", action="store_true",
                   help="drop the query's own image from the gallery")
    p.set_defaults(func=cmd_eval_id)

    p = sub.add_parser("eval-verif", help="verification protocol (AUC, EER, TMR@FMR)")
    _add_eval_args(p)
    p.add_argument("--symmetric-score", action="store_true",
                   help="average both scoring directions")
    p.add_argument("--train-source", help="fit on this source set (cross-dataset)")
    p.add_argument("--train-target", help="fit on this target set (cross-dataset)")
    p.add_argument("--genuine-cap", type=int, default=10000)
    p.add_argument("--impostor-cap", type=int, default=10000)
    p.set_defaults(func=cmd_eval_verif)

    p = sub.add_parser("matrix", help="pairwise Rank-1 compatibility matrix")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--format", default="binary", choices=("binary", "csv"))
    p.add_argument("--method", default="procrustes", choices=align.METHODS)
    p.add_argument("--alpha", type=float, default=align.DEFAULT_RIDGE_ALPHA)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--seeds")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("cluster", help="hierarchical clustering of a matrix")
    p.add_argument("--matrix", required=True, help="compatibility_matrix.json")
    p.add_argument("--linkage", default="average", choices=analysis.LINKAGES)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("sweep", help="Rank-1 vs. training-set size")
    _add_pair_args(p)
    p.add_argument("--seeds")
    p.add_argument("--fractions", default="0.1,0.25,0.5,0.75,1.0")
    p.add_argument("--methods", default="procrustes,linear,ridge")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EmbalignError as exc:
        print(f"embalign: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
