"""Experiment configuration, composed strategies, seeded multi-run execution
and report aggregation."""

from __future__ import annotations

import copy
import datetime as _dt
import hashlib
import importlib.resources
import json
import logging
import math
import os
import platform
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import jsonschema
import yaml

from projdebias import __version__
from projdebias.attribute_data import (
    LabeledPointSet,
    build_bias_dataset,
    seed_direction,
    split,
)
from projdebias.debias import (
    ProjectionPipeline,
    apply_pipeline,
    inlp_run,
    mp_multiclass,
    random_pipeline,
    tmp_step,
)
from projdebias.embeddings import EmbeddingSpace, load_text_embeddings
from projdebias.errors import DataError
from projdebias.metrics import (
    SimilarityBenchmark,
    WeatTest,
    bias_by_neighbor,
    neighbor_stability,
    similarity_correlation,
    weat,
)
from projdebias.probes import (
    evaluate_probe,
    kmeans_vmeasure,
    majority_rate,
    train_linear,
    train_mlp_probe,
)

logger = logging.getLogger(__name__)

DATA_DIR_ENV = "PROJDEBIAS_DATA_DIR"
Z95 = 1.96

DEFAULTS = {
    "embeddings": {"path": None, "limit": None},
    "dataset": {
        "path": None,
        "seed_tokens": ["he", "she"],
        "k": 1000,
        "neutral_k": 0,
        "neutral_threshold": 0.3,
        "absolute": False,
        "fractions": [0.65, 0.10, 0.25],
        "labels": None,
    },
    "strategy": "MP",
    "mp": {"anchor": None, "recompute_means": True},
    "tmp": {"mode": "auto", "iterations": 200},
    "inlp": {
        "trainer": "hinge",
        "max_iters": 35,
        "stop_margin": 0.02,
        "orthogonalize": False,
        "pre_check": False,
        "params": {},
    },
    "random": {"source": "space"},
    "metrics": {
        "similarity": [],
        "weat": [],
        "weat_raw": False,
        "trajectory": True,
        "guarding": {"enabled": True, "trainer": "hinge", "params": {}},
        "mlp": {"enabled": False, "hidden_width": 128, "epochs": 50},
        "clustering": {"enabled": False, "restarts": 10},
        "neighbors": {"tokens": [], "k": 3},
        "bias_by_neighbor": {"tokens": [], "k": 100},
    },
    "rng_seed": 0,
    "runs": 1,
    "workers": 1,
}

_TOKEN = re.compile(r"^(MP|TMP|INLP(\d+)?|R(\d+)|RANDOM(\d+))$")


@dataclass(frozen=True)
class StrategyToken:
    kind: str  # MP, TMP, INLP, RANDOM
    count: int | None = None

    def __str__(self):
        if self.kind == "RANDOM":
            return f"R{self.count}"
        if self.kind == "INLP" and self.count is not None:
            return f"INLP{self.count}"
        return self.kind


def parse_strategy(text: str) -> list[StrategyToken]:
    """``"MP+R34"`` -> [MP, R34]. Tokens: ``MP``, ``TMP``, ``INLP``,
    ``INLP<n>`` (at most n rounds), ``R<n>`` or ``RANDOM<n>`` (n random steps)."""
    if not isinstance(text, str) or not text.strip():
        raise ValueError("strategy must be a non-empty string")
    out = []
    for part in text.replace(" ", "").upper().split("+"):
        m = _TOKEN.match(part)
        if not m:
            raise ValueError(f"bad strategy token {part!r}")
        if part in ("MP", "TMP"):
            out.append(StrategyToken(part))
        elif part.startswith("INLP"):
            out.append(StrategyToken("INLP", int(m.group(2)) if m.group(2) else None))
        else:
            n = int(m.group(3) or m.group(4))
            out.append(StrategyToken("RANDOM", n))
    return out


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (override or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve_path(path, base_dir: str | None = None) -> str:
    """Absolute paths and existing relative paths pass through; otherwise the
    config's directory and then ``$PROJDEBIAS_DATA_DIR`` are tried."""
    p = os.fspath(path)
    if os.path.isabs(p) or os.path.exists(p):
        return p
    for root in (base_dir, os.environ.get(DATA_DIR_ENV)):
        if root and os.path.exists(os.path.join(root, p)):
            return os.path.join(root, p)
    return p


def validate_config(cfg: dict) -> dict:
    unknown = set(cfg) - set(DEFAULTS) - {"name", "base_dir"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    parse_strategy(cfg["strategy"])
    if int(cfg["runs"]) < 1:
        raise ValueError("runs must be >= 1")
    if int(cfg["workers"]) < 1:
        raise ValueError("workers must be >= 1")
    if cfg["random"]["source"] not in ("space", "dataset"):
        raise ValueError("random.source must be 'space' or 'dataset'")
    if not cfg["embeddings"].get("path"):
        raise ValueError("embeddings.path is required")
    return cfg


def load_config(path=None, overrides: dict | None = None) -> dict:
    """YAML config merged over defaults, then ``overrides``."""
    data = {}
    base_dir = None
    if path is not None:
        with open(os.fspath(path), encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ValueError("config must be a mapping")
        base_dir = os.path.dirname(os.path.abspath(os.fspath(path)))
    cfg = _merge(DEFAULTS, data)
    cfg = _merge(cfg, overrides or {})
    if base_dir is not None:
        cfg.setdefault("base_dir", base_dir)
    return validate_config(cfg)


def config_hash(cfg: dict) -> str:
    body = {k: v for k, v in cfg.items() if k != "base_dir"}
    return hashlib.sha256(json.dumps(body, sort_keys=True, default=str).encode()).hexdigest()


@dataclass(eq=False)
class ExperimentInputs:
    """Everything a run needs, loaded once."""

    space: EmbeddingSpace
    dataset: LabeledPointSet  # without splits; each run draws its own
    benchmarks: list = field(default_factory=list)
    weat_tests: list = field(default_factory=list)
    bias_direction: np.ndarray | None = None

    @classmethod
    def from_config(cls, cfg: dict) -> "ExperimentInputs":
        base = cfg.get("base_dir")
        emb = cfg["embeddings"]
        space = load_text_embeddings(resolve_path(emb["path"], base), limit=emb.get("limit"))
        ds_cfg = cfg["dataset"]
        plus, minus = ds_cfg["seed_tokens"]
        for tok in (plus, minus):
            if tok not in space:
                raise DataError(f"seed token {tok!r} is not in the vocabulary")
        direction = seed_direction(space, plus, minus)
        if ds_cfg.get("path"):
            dataset = LabeledPointSet.load(resolve_path(ds_cfg["path"], base), space)
            dataset = LabeledPointSet(dataset.space_name, dataset.classes)
        else:
            dataset = build_bias_dataset(
                space,
                direction,
                -direction,
                k=int(ds_cfg["k"]),
                neutral_k=int(ds_cfg["neutral_k"]),
                neutral_threshold=float(ds_cfg["neutral_threshold"]),
                rng_seed=int(cfg["rng_seed"]),
                absolute=bool(ds_cfg["absolute"]),
            )
        if ds_cfg.get("labels"):
            dataset = dataset.restrict_labels(ds_cfg["labels"])
        m = cfg["metrics"]
        benches = [SimilarityBenchmark.load(resolve_path(p, base)) for p in m.get("similarity") or []]
        tests = []
        for p in m.get("weat") or []:
            tests.extend(WeatTest.load(resolve_path(p, base)))
        return cls(space, dataset, benches, tests, direction)


def build_pipeline(X: np.ndarray, dataset: LabeledPointSet, tokens, cfg: dict, seed: int, source_space: str = ""):
    """Compose the strategy tokens in order, each computed on the data as
    projected by the ones before. Returns ``(pipeline, info)``."""
    rng = np.random.default_rng(seed)
    pipe = ProjectionPipeline((), source_space, X.shape[1])
    info = {"inlp_dev_accuracy": []}
    labels = dataset.labels
    for tok in tokens:
        cur = pipe.apply(X) if len(pipe) else X
        if tok.kind == "MP":
            train = {lab: dataset.arrays("train", [lab])[0] for lab in labels}
            part = mp_multiclass(cur, train, anchor=cfg["mp"]["anchor"], recompute_means=cfg["mp"]["recompute_means"])
        elif tok.kind == "TMP":
            if len(labels) != 2:
                raise DataError("TMP needs exactly two classes")
            a = dataset.arrays("train", [labels[1]])[0]
            b = dataset.arrays("train", [labels[0]])[0]
            step = tmp_step(cur, a, b, mode=cfg["tmp"]["mode"], rng_seed=seed, iterations=cfg["tmp"]["iterations"])
            part = ProjectionPipeline((step,), source_space, X.shape[1])
        elif tok.kind == "INLP":
            ic = cfg["inlp"]
            res = inlp_run(
                cur,
                dataset,
                trainer=ic["trainer"],
                max_iters=tok.count if tok.count is not None else int(ic["max_iters"]),
                stop_margin=float(ic["stop_margin"]),
                orthogonalize=bool(ic["orthogonalize"]),
                pre_check=bool(ic["pre_check"]),
                seed=seed,
                trainer_params=ic.get("params") or {},
            )
            part = res.pipeline
            info["inlp_dev_accuracy"].append(res.dev_accuracy)
        else:
            if cfg["random"]["source"] == "dataset":
                src = cur[dataset.labeled_indices()]
            else:
                src = cur
            part = random_pipeline(src, tok.count, rng)
        pipe = pipe + ProjectionPipeline(tuple(part.steps), source_space, X.shape[1], part.warnings)
    return pipe, info


def _trajectory_rows(inputs: ExperimentInputs):
    toks = set()
    for b in inputs.benchmarks:
        for a, c, _ in b.pairs:
            toks.update((a, c))
    for t in inputs.weat_tests:
        for f in (t.targets_X, t.targets_Y, t.attributes_A, t.attributes_B):
            toks.update(f)
    return sorted(tok for tok in toks if tok in inputs.space)


def _space_metrics(space: EmbeddingSpace, inputs: ExperimentInputs, raw_weat: bool) -> dict:
    out = {}
    for b in inputs.benchmarks:
        out[f"similarity/{b.name}"] = similarity_correlation(space, b).rho
    for t in inputs.weat_tests:
        r = weat(space, t)
        out[f"weat/{t.name}"] = r.numerator if raw_weat else r.effect_size
    return out


def run_once(inputs: ExperimentInputs, cfg: dict, run_index: int) -> dict:
    """One seeded repetition: split, build the pipeline, score it."""
    seed = int(cfg["rng_seed"]) + run_index
    fr = cfg["dataset"]["fractions"]
    ds = split(inputs.dataset, fr, rng_seed=seed)
    X = inputs.space.matrix
    tokens = parse_strategy(cfg["strategy"])
    pipe, info = build_pipeline(X, ds, tokens, cfg, seed, inputs.space.name)
    m = cfg["metrics"]
    raw = bool(m.get("weat_raw"))

    trajectories = {}
    if m.get("trajectory", True) and (inputs.benchmarks or inputs.weat_tests):
        rows = _trajectory_rows(inputs)
        sub = inputs.space.restrict(rows)
        Z = sub.matrix
        series = [_space_metrics(sub, inputs, raw)]
        for step in pipe.steps:
            Z = step.apply(Z)
            series.append(_space_metrics(sub.with_matrix(Z), inputs, raw))
        for key in series[0]:
            trajectories[key] = [s[key] for s in series]

    after = apply_pipeline(inputs.space, pipe)
    final = _space_metrics(after, inputs, raw)
    final["steps"] = float(len(pipe))

    labels = ds.labels
    tr_idx, tr_y = ds.arrays("train")
    dv_idx, dv_y = ds.arrays("dev")
    te_idx, te_y = ds.arrays("test")
    g = m.get("guarding") or {}
    if g.get("enabled", True) and len(labels) >= 2:
        probe = train_linear(after.matrix[tr_idx], tr_y, trainer=g.get("trainer", "hinge"), seed=seed, **(g.get("params") or {}))
        final["guarding/dev_accuracy"] = evaluate_probe(probe, after.matrix[dv_idx], dv_y, "dev").accuracy
        final["guarding/test_accuracy"] = evaluate_probe(probe, after.matrix[te_idx], te_y, "test").accuracy
        final["guarding/majority_rate"] = majority_rate(te_y)
    mc = m.get("mlp") or {}
    if mc.get("enabled"):
        rep = train_mlp_probe(
            after.matrix[tr_idx], tr_y, after.matrix[te_idx], te_y,
            hidden_width=int(mc.get("hidden_width", 128)), epochs=int(mc.get("epochs", 50)), seed=seed,
        )
        final["mlp/test_accuracy"] = rep.accuracy
    cc = m.get("clustering") or {}
    if cc.get("enabled"):
        idx, y = ds.arrays()
        vm = kmeans_vmeasure(after.matrix[idx], y, K=len(labels), seed=seed, restarts=int(cc.get("restarts", 10)))
        final["clustering/v_measure"] = vm.v
    nc = m.get("neighbors") or {}
    ntoks = [t for t in nc.get("tokens") or [] if t in inputs.space]
    if ntoks:
        final["neighbors/changed"] = float(neighbor_stability(inputs.space, after, ntoks, int(nc.get("k", 3))).changed)
    bc = m.get("bias_by_neighbor") or {}
    btoks = [t for t in bc.get("tokens") or [] if t in inputs.space]
    if btoks and inputs.bias_direction is not None:
        final["bias_by_neighbor/percentage"] = bias_by_neighbor(
            inputs.space, after, btoks, inputs.bias_direction, k=min(int(bc.get("k", 100)), inputs.space.n - 1)
        ).percentage
    return {
        "run": run_index,
        "seed": seed,
        "final": final,
        "trajectories": trajectories,
        "pipeline": {
            "steps": len(pipe),
            "strategies": [s.strategy for s in pipe.steps],
            "warnings": list(pipe.warnings),
            "inlp_dev_accuracy": info["inlp_dev_accuracy"],
        },
    }


def _clean(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def aggregate(values) -> dict:
    """Mean, sample standard deviation and two 95% intervals (normal
    approximation and 2.5/97.5 percentiles). ``None`` where undefined."""
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    mean = float(v.mean())
    if n > 1:
        sd = float(v.std(ddof=1))
        half = Z95 * sd / math.sqrt(n)
        ci = [mean - half, mean + half]
        pct = [float(np.percentile(v, 2.5)), float(np.percentile(v, 97.5))]
    else:
        sd, ci, pct = None, None, None
    return {
        "n": int(n),
        "mean": _clean(mean),
        "stdev": _clean(sd),
        "ci95": None if ci is None else [_clean(c) for c in ci],
        "ci95_percentile": None if pct is None else [_clean(c) for c in pct],
        "values": [_clean(x) for x in v],
    }


def aggregate_trajectory(curves) -> dict:
    """Per-step aggregation over runs; runs shorter than a step are left out
    of that step (``count`` says how many contributed)."""
    length = max(len(c) for c in curves)
    out = {"step": [], "count": [], "mean": [], "stdev": [], "ci_low": [], "ci_high": []}
    for i in range(length):
        vals = [c[i] for c in curves if len(c) > i]
        a = aggregate(vals)
        out["step"].append(i)
        out["count"].append(a["n"])
        out["mean"].append(a["mean"])
        out["stdev"].append(a["stdev"])
        out["ci_low"].append(None if a["ci95"] is None else a["ci95"][0])
        out["ci_high"].append(None if a["ci95"] is None else a["ci95"][1])
    return out


_WORKER_STATE: dict = {}


def _worker_run(i):
    return run_once(_WORKER_STATE["inputs"], _WORKER_STATE["cfg"], i)


def run_runs(inputs: ExperimentInputs, cfg: dict) -> list[dict]:
    runs = int(cfg["runs"])
    workers = min(int(cfg.get("workers", 1)), runs)
    if workers <= 1:
        return [run_once(inputs, cfg, i) for i in range(runs)]
    # forked workers inherit the loaded inputs; results come back in run order
    _WORKER_STATE["inputs"] = inputs
    _WORKER_STATE["cfg"] = cfg
    try:
        import multiprocessing as mp

        ctx = mp.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            return list(pool.map(_worker_run, range(runs)))
    finally:
        _WORKER_STATE.clear()


def provenance(cfg: dict, seeds) -> dict:
    return {
        "software": "projdebias",
        "version": __version__,
        "config_hash": config_hash(cfg),
        "seeds": list(seeds),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def experiment_report(cfg: dict, results: list[dict]) -> dict:
    keys = sorted({k for r in results for k in r["final"]})
    metrics = {}
    for k in keys:
        vals = [r["final"][k] for r in results if k in r["final"] and r["final"][k] is not None]
        if vals:
            metrics[k] = aggregate(vals)
    traj = {}
    tkeys = sorted({k for r in results for k in r["trajectories"]})
    for k in tkeys:
        traj[k] = aggregate_trajectory([r["trajectories"][k] for r in results if k in r["trajectories"]])
    body_cfg = {k: v for k, v in cfg.items() if k != "base_dir"}
    return {
        "kind": "experiment",
        "provenance": provenance(cfg, [r["seed"] for r in results]),
        "config": body_cfg,
        "runs": len(results),
        "metrics": metrics,
        "trajectories": traj,
        "pipelines": [dict(r["pipeline"], run=r["run"], seed=r["seed"]) for r in results],
    }


def run_experiment(cfg: dict, inputs: ExperimentInputs | None = None) -> dict:
    if inputs is None:
        inputs = ExperimentInputs.from_config(cfg)
    return experiment_report(cfg, run_runs(inputs, cfg))


def report_schema() -> dict:
    """The JSON schema both report kinds validate against."""
    text = importlib.resources.files("projdebias").joinpath("report_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_report(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``report`` is malformed."""
    jsonschema.validate(report, report_schema())


def dump_report(report: dict, path=None) -> str:
    text = json.dumps(report, indent=1, sort_keys=True, allow_nan=False)
    if path is not None:
        with open(os.fspath(path), "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text
