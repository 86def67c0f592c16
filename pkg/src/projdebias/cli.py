"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 a verification
suite failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np
import yaml

from projdebias import __version__
from projdebias.attribute_data import LabeledPointSet, build_bias_dataset, seed_direction, split
from projdebias.debias import ProjectionPipeline, apply_pipeline
from projdebias.embeddings import load_text_embeddings, save_text_embeddings
from projdebias.errors import ProjDebiasError
from projdebias.experiment import (
    ExperimentInputs,
    build_pipeline,
    config_hash,
    dump_report,
    load_config,
    parse_strategy,
    provenance,
    resolve_path,
    run_experiment,
    validate_report,
)
from projdebias.metrics import (
    SimilarityBenchmark,
    WeatTest,
    bias_by_neighbor,
    load_predictions_csv,
    neighbor_stability,
    similarity_correlation,
    tpr_gap_suite,
    weat,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3

logger = logging.getLogger("projdebias")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _path(p):
    return resolve_path(p) if p is not None else None


def _read_tokens(values):
    """Tokens given inline or, with ``@file``, one per line."""
    out = []
    for v in values or []:
        if v.startswith("@"):
            with open(_path(v[1:]), encoding="utf-8") as fh:
                out.extend(line.strip() for line in fh if line.strip())
        else:
            out.extend(t for t in v.split(",") if t)
    return out


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, allow_nan=False)
        fh.write("\n")


def cmd_ingest(args) -> int:
    space = load_text_embeddings(_path(args.embeddings), limit=args.limit)
    direction = seed_direction(space, args.plus, args.minus)
    ds = build_bias_dataset(
        space,
        direction,
        -direction,
        k=args.k,
        neutral_k=args.neutral_k,
        neutral_threshold=args.threshold,
        rng_seed=args.seed,
        absolute=args.absolute,
    )
    ds = split(ds, args.fractions, rng_seed=args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    space_path = os.path.join(args.out_dir, "space.txt")
    ds_path = os.path.join(args.out_dir, "dataset.json")
    save_text_embeddings(space, space_path)
    ds.save(ds_path, space)
    for label, counts in ds.split_counts().items():
        total = sum(counts.values())
        print(f"{label}\t{total}\t" + "\t".join(f"{s}={n}" for s, n in counts.items()))
    print(f"wrote {space_path} ({space.n} x {space.dim}) and {ds_path}")
    return EXIT_OK


def _debias_config(args) -> dict:
    overrides = {"embeddings": {"path": args.space}}
    cfg = load_config(_path(args.config) if args.config else None, overrides)
    if args.strategy:
        cfg["strategy"] = args.strategy
    if args.trainer:
        cfg["inlp"]["trainer"] = args.trainer
    if args.max_iters is not None:
        cfg["inlp"]["max_iters"] = args.max_iters
    if args.stop_margin is not None:
        cfg["inlp"]["stop_margin"] = args.stop_margin
    if args.seed is not None:
        cfg["rng_seed"] = args.seed
    parse_strategy(cfg["strategy"])
    return cfg


def cmd_debias(args) -> int:
    cfg = _debias_config(args)
    space = load_text_embeddings(_path(args.space))
    ds = LabeledPointSet.load(_path(args.dataset), space)
    if not ds.splits:
        ds = split(ds, cfg["dataset"]["fractions"], rng_seed=int(cfg["rng_seed"]))
    if args.labels:
        ds = ds.restrict_labels(args.labels.split(","))
    pipe, info = build_pipeline(space.matrix, ds, parse_strategy(cfg["strategy"]), cfg, int(cfg["rng_seed"]), space.name)
    pipe.save(args.out_pipeline)
    if args.out_space:
        save_text_embeddings(apply_pipeline(space, pipe), args.out_space)
    counts = {}
    for s in pipe.steps:
        counts[s.strategy] = counts.get(s.strategy, 0) + 1
    print(f"{len(pipe)} steps " + " ".join(f"{k}={v}" for k, v in counts.items()))
    for series in info["inlp_dev_accuracy"]:
        print("inlp dev accuracy: " + " ".join(f"{a:.4f}" for a in series))
    for w in pipe.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def evaluate(args) -> dict:
    before = load_text_embeddings(_path(args.before))
    if args.after:
        after = load_text_embeddings(_path(args.after))
    elif args.pipeline:
        after = apply_pipeline(before, ProjectionPipeline.load(_path(args.pipeline)))
    else:
        after = before
    metrics, details = {}, {}
    for p in args.similarity or []:
        bench = SimilarityBenchmark.load(_path(p))
        rb, ra = similarity_correlation(before, bench), similarity_correlation(after, bench)
        metrics[f"similarity/{bench.name}"] = {"before": rb.rho, "after": ra.rho}
        details[f"similarity/{bench.name}"] = {"pairs_used": ra.pairs_used, "pairs_dropped": ra.pairs_dropped}
    for p in args.weat or []:
        for test in WeatTest.load(_path(p)):
            wb, wa = weat(before, test), weat(after, test)
            key = f"weat/{test.name}"
            metrics[key] = {"before": wb.effect_size, "after": wa.effect_size}
            metrics[key + "/raw"] = {"before": wb.numerator, "after": wa.numerator}
            details[key] = {"dropped": wa.dropped, "dropped_count": sum(len(v) for v in wa.dropped.values())}
    tokens = _read_tokens(args.neighbor_tokens)
    if tokens:
        ch = neighbor_stability(before, after, tokens, args.k)
        metrics["neighbors/changed"] = {"before": 0.0, "after": float(ch.changed)}
        details["neighbors"] = ch.to_json()
    probes = _read_tokens(args.bias_tokens)
    if probes:
        if not args.bias_direction:
            raise UsageError("--bias-tokens needs --bias-direction PLUS,MINUS")
        plus, minus = args.bias_direction.split(",")
        direction = seed_direction(before, plus, minus)
        k = min(args.bias_k, before.n - 1)
        bb = bias_by_neighbor(before, before, probes, direction, k)
        ba = bias_by_neighbor(before, after, probes, direction, k)
        metrics["bias_by_neighbor/percentage"] = {"before": bb.percentage, "after": ba.percentage}
        details["bias_by_neighbor"] = {"degenerate": ba.degenerate, "per_token": ba.per_token}
    if args.predictions:
        rates = None
        if args.group_rates:
            with open(_path(args.group_rates), encoding="utf-8") as fh:
                rates = json.load(fh)
        res = tpr_gap_suite(load_predictions_csv(_path(args.predictions)), rates, correlation=args.correlation)
        metrics["tpr/accuracy"] = {"before": None, "after": res.accuracy}
        metrics["tpr/gap_rms"] = {"before": None, "after": res.gap_rms}
        metrics["tpr/correlation"] = {"before": None, "after": res.correlation}
        details["tpr"] = res.to_json()
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {
        "kind": "evaluation",
        "provenance": provenance(cfg, []),
        "config": cfg,
        "metrics": metrics,
        "details": details,
    }


def cmd_evaluate(args) -> int:
    report = evaluate(args)
    validate_report(report)
    text = dump_report(report, args.out)
    if not args.out:
        print(text)
    else:
        for k, v in report["metrics"].items():
            print(f"{k}\t{v['before']}\t{v['after']}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    overrides = {}
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.strategy:
        overrides["strategy"] = args.strategy
    cfg = load_config(_path(args.config), overrides)
    report = run_experiment(cfg)
    validate_report(report)
    dump_report(report, args.out)
    for name, agg in report["metrics"].items():
        sd = "null" if agg["stdev"] is None else f"{agg['stdev']:.4f}"
        ci = "" if agg["ci95"] is None else f" ci95=[{agg['ci95'][0]:.4f}, {agg['ci95'][1]:.4f}]"
        print(f"{name}\tmean={agg['mean']:.4f} sd={sd}{ci}")
    print(f"config {config_hash(cfg)[:12]}, {report['runs']} runs -> {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from projdebias.geometry.verify import SUITES

    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = []
    for name in names:
        kwargs = {"rng_seed": args.seed}
        if args.instances is not None and name != "misclassify-upper":
            kwargs["instances"] = args.instances
        if args.directions is not None and name == "misclassify-upper":
            kwargs["directions"] = args.directions
        r = SUITES[name](**kwargs)
        print(r.line())
        results.append(r)
    if args.out:
        _write_json({"suites": [r.to_json() for r in results]}, args.out)
    return EXIT_OK if all(r.ok for r in results) else EXIT_VERIFY


def cmd_synth(args) -> int:
    from projdebias.synthetic import gendered_count, planted_space

    if args.dim < 2 or args.words < 60:
        raise UsageError("--dim must be at least 2 and --words at least 60")
    ps = planted_space(rng_seed=args.seed, n_words=args.words, d=args.dim)
    os.makedirs(args.out_dir, exist_ok=True)
    emb = os.path.join(args.out_dir, "embeddings.txt")
    save_text_embeddings(ps.space, emb)
    with open(os.path.join(args.out_dir, "similarity.tsv"), "w", encoding="utf-8") as fh:
        fh.write("word1\tword2\tscore\n")
        for a, b, s in ps.benchmark.pairs:
            fh.write(f"{a}\t{b}\t{s:.6f}\n")
    t = ps.weat
    _write_json(
        {"name": t.name, "targets_X": list(t.targets_X), "targets_Y": list(t.targets_Y),
         "attributes_A": list(t.attributes_A), "attributes_B": list(t.attributes_B)},
        os.path.join(args.out_dir, "weat.json"),
    )
    cfg = {
        "embeddings": {"path": "embeddings.txt"},
        "dataset": {"seed_tokens": list(ps.seed_pair), "k": gendered_count(args.words), "neutral_k": 0},
        "strategy": "MP+R34",
        "metrics": {"similarity": ["similarity.tsv"], "weat": ["weat.json"]},
        "rng_seed": 0,
        "runs": 10,
    }
    with open(os.path.join(args.out_dir, "experiment.yaml"), "w", encoding="utf-8") as fh:
        yaml.safe_dump(cfg, fh, sort_keys=False)
    print(f"wrote planted space ({ps.space.n} x {ps.space.dim}) to {args.out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="projdebias", description="Projection-based concept erasure for word embeddings.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("ingest", help="load embeddings and build a labeled, split dataset")
    s.add_argument("--embeddings", required=True)
    s.add_argument("--limit", type=int)
    s.add_argument("--plus", default="he")
    s.add_argument("--minus", default="she")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--neutral-k", type=int, default=0)
    s.add_argument("--threshold", type=float, default=0.3)
    s.add_argument("--absolute", action="store_true")
    s.add_argument("--fractions", type=float, nargs=3, default=[0.65, 0.10, 0.25])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("debias", help="compute a projection pipeline")
    s.add_argument("--space", required=True)
    s.add_argument("--dataset", required=True)
    s.add_argument("--config")
    s.add_argument("--strategy", help='e.g. MP, TMP, INLP, "MP+R34", "INLP8+R27"')
    s.add_argument("--labels", help="comma-separated subset of class labels")
    s.add_argument("--trainer", choices=["hinge", "logistic"])
    s.add_argument("--max-iters", type=int)
    s.add_argument("--stop-margin", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--out-pipeline", required=True)
    s.add_argument("--out-space")
    s.set_defaults(func=cmd_debias)

    s = sub.add_parser("evaluate", help="score a (before, after) pair of spaces")
    s.add_argument("--before", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--after")
    g.add_argument("--pipeline")
    s.add_argument("--similarity", action="append")
    s.add_argument("--weat", action="append")
    s.add_argument("--neighbor-tokens", action="append", help="tokens (comma list or @file)")
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--bias-tokens", action="append", help="probe tokens (comma list or @file)")
    s.add_argument("--bias-direction", help="PLUS,MINUS seed tokens")
    s.add_argument("--bias-k", type=int, default=100)
    s.add_argument("--predictions", help="CSV with header true,predicted,group")
    s.add_argument("--group-rates", help="JSON map profession -> share of the first group")
    s.add_argument("--correlation", choices=["pearson", "spearman"], default="pearson")
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("experiment", help="seeded multi-run experiment from a YAML config")
    s.add_argument("--config", required=True)
    s.add_argument("--runs", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--strategy")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("verify-theorems", help="run the geometric bound suites")
    s.add_argument("--suite", default="all", choices=["all", "tukey-bound", "depth-bound", "misclassify-upper"])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--instances", type=int)
    s.add_argument("--directions", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("synth", help="write a planted synthetic space, benchmark and config")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--words", type=int, default=5000)
    s.add_argument("--dim", type=int, default=200)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        if not getattr(args, "func", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, yaml.YAMLError) as e:
        if isinstance(e, ProjDebiasError):
            print(f"data error: {e}", file=sys.stderr)
            return EXIT_DATA
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ProjDebiasError, KeyError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
