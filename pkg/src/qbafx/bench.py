"""Experiment harnesses: effectiveness ablation, scalability and robustness.

Every instance gets its own seed derived from the experiment seed and the
instance number, so results do not depend on the worker pool size. Runtimes
are wall time of the solve call only.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .counterfactual import VARIANTS, CexQuery, ProblemKind, SolverConfig, check_validity, lp_distance, solve
from .errors import ConfigError, EmptyExperiment, NonConvergence, SolverError
from .generators import CyclicSpec, TreeSpec, generate
from .semantics import DEFAULT_CONFIG, EvalConfig, Semantics, topic_evaluator

log = logging.getLogger(__name__)

Spec = TreeSpec | CyclicSpec
COLLISION_GAP = 1e-6

EXPERIMENT_COLUMNS = (
    "spec", "n_args", "n_args_node_levels", "variant", "validity_rate",
    "mean_l1", "mean_l2", "mean_runtime_s", "median_runtime_s", "n_instances",
)
ROBUSTNESS_COLUMNS = ("spec", "e", "p", "metric1_mean", "metric2_mean", "n_instances")
RUNTIME_COLUMNS = frozenset({"mean_runtime_s", "median_runtime_s"})


@dataclass(frozen=True)
class ExperimentRow:
    spec: str
    n_args: int
    n_args_node_levels: int
    variant: str
    validity_rate: float
    mean_l1: float
    mean_l2: float
    mean_runtime_s: float
    median_runtime_s: float
    n_instances: int


@dataclass(frozen=True)
class RobustnessRow:
    spec: str
    e: float
    p: float
    metric1_mean: float
    metric2_mean: float
    n_instances: int


@dataclass
class ExperimentReport:
    rows: list[ExperimentRow] = field(default_factory=list)
    columns: tuple[str, ...] = EXPERIMENT_COLUMNS

    def row(self, spec: str, variant: str) -> ExperimentRow:
        for r in self.rows:
            if r.spec == spec and r.variant == variant:
                return r
        raise KeyError((spec, variant))


@dataclass
class RobustnessReport:
    rows: list[RobustnessRow] = field(default_factory=list)
    columns: tuple[str, ...] = ROBUSTNESS_COLUMNS


# ---------------------------------------------------------------- helpers


def instance_seed(seed: int, *keys: int) -> int:
    """Independent 63-bit seed for one instance."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1, dtype=np.uint64)[0] >> 1)


def with_seed(spec: Spec, seed: int) -> Spec:
    if isinstance(spec, TreeSpec):
        return TreeSpec(spec.width, spec.depth, seed)
    return CyclicSpec(spec.n_args, spec.n_rels, seed)


def sample_desired(rng: np.random.Generator, current: float) -> float:
    """Uniform in [0,1], redrawn while within COLLISION_GAP of ``current``."""
    while True:
        s = float(rng.uniform(0.0, 1.0))
        if abs(s - current) > COLLISION_GAP:
            return s


def rankdata(x: Sequence[float]) -> np.ndarray:
    """Ranks starting at 1, ties sharing their average rank."""
    a = np.asarray(x, dtype=np.float64)
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(len(a), dtype=np.float64)
    i = 0
    while i < len(a):
        j = i
        while j + 1 < len(a) and a[order[j + 1]] == a[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation; nan when either side is constant."""
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("need two equally long sequences of length >= 2")
    rx, ry = rankdata(x), rankdata(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float((rx * rx).sum() * (ry * ry).sum()))
    return float((rx * ry).sum() / denom) if denom else math.nan


def _pool_map(fn: Callable, tasks: list, jobs: int | None) -> list:
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def _mean(xs: list[float]) -> float:
    return float(np.mean(xs)) if xs else math.nan


def _median(xs: list[float]) -> float:
    return float(np.median(xs)) if xs else math.nan


# ------------------------------------------------------------ effectiveness


@dataclass(frozen=True)
class _SolveTask:
    sem: str
    spec: Spec
    variants: tuple[str, ...]
    delta: float
    cfg: SolverConfig


def _solve_instance(task: _SolveTask) -> list[tuple[bool, float, float, float] | None]:
    """One (valid, l1, l2, runtime) record per variant; None when nothing was produced."""
    q, topic = generate(task.spec)
    rng = np.random.default_rng([task.spec.seed, 1])  # independent of the generator stream
    try:
        current = topic_evaluator(q, task.sem, topic, task.cfg.eval).strength(q.tau_array(), q.index.pos[topic])
    except NonConvergence as exc:
        log.info("instance %s skipped: %s", task.spec, exc)
        return [None] * len(task.variants)
    query = CexQuery(topic, sample_desired(rng, current), ProblemKind.DELTA, task.delta)
    out = []
    for name in task.variants:
        pol, pri = VARIANTS[name]
        cfg = SolverConfig(
            epsilon=task.cfg.epsilon, h=task.cfg.h, c=task.cfg.c, use_polarity=pol, use_priority=pri,
            max_sweeps=task.cfg.max_sweeps, max_halvings=task.cfg.max_halvings, eval=task.cfg.eval,
        )
        try:
            res = solve(q, task.sem, query, cfg)
        except SolverError as exc:
            res = exc.result
        except NonConvergence as exc:
            log.info("variant %s on %s: %s", name, task.spec, exc)
            out.append(None)
            continue
        if res is None:
            out.append(None)
            continue
        valid = res.valid
        if valid:
            try:
                valid = check_validity(q, task.sem, query, res.counterfactual, cfg.eval)
            except (ValueError, NonConvergence):
                valid = False
        out.append((valid, res.l1, res.l2, res.wall_time))
    return out


def _aggregate(spec: Spec, variants: Sequence[str], records: list[list], n: int) -> list[ExperimentRow]:
    rows = []
    for k, name in enumerate(variants):
        got = [r[k] for r in records if r[k] is not None]
        valid = sum(1 for g in got if g[0])
        times = [g[3] for g in got]
        rows.append(
            ExperimentRow(
                spec=spec.describe(),
                n_args=spec.n_args,
                n_args_node_levels=spec.n_args_node_levels,
                variant=name,
                validity_rate=valid / n,
                mean_l1=_mean([g[1] for g in got]),
                mean_l2=_mean([g[2] for g in got]),
                mean_runtime_s=_mean(times),
                median_runtime_s=_median(times),
                n_instances=n,
            )
        )
    return rows


def _check_common(semantics, variants: Iterable[str], n_instances: int) -> tuple[str, tuple[str, ...]]:
    sem = Semantics.parse(semantics).value
    variants = tuple(variants)
    if not variants:
        raise ValueError("at least one variant is required")
    bad = [v for v in variants if v not in VARIANTS]
    if bad:
        raise ValueError(f"unknown variant(s) {bad}; expected a subset of {list(VARIANTS)}")
    if n_instances < 1:
        raise EmptyExperiment("an experiment needs at least one instance")
    return sem, variants


def run_effectiveness(
    semantics: Semantics | str,
    specs: Sequence[Spec],
    variants: Iterable[str] = tuple(VARIANTS),
    delta: float = 0.1,
    epsilon: float = 0.01,
    n_instances: int = 20,
    *,
    seed: int = 0,
    jobs: int | None = 1,
    solver: SolverConfig | None = None,
) -> ExperimentReport:
    """Solve ``n_instances`` random problems per spec with each variant.

    Distances and runtimes average over every instance that produced a
    counterfactual, valid or not; validity counts against all instances.
    """
    sem, variants = _check_common(semantics, variants, n_instances)
    if not specs:
        raise EmptyExperiment("no specs given")
    base = solver or SolverConfig()
    base = SolverConfig(
        epsilon=epsilon, h=base.h, c=base.c, max_sweeps=base.max_sweeps,
        max_halvings=base.max_halvings, eval=base.eval,
    )
    tasks = [
        _SolveTask(sem, with_seed(spec, instance_seed(seed, s, i)), variants, delta, base)
        for s, spec in enumerate(specs)
        for i in range(n_instances)
    ]
    records = _pool_map(_solve_instance, tasks, jobs)
    report = ExperimentReport()
    for s, spec in enumerate(specs):
        chunk = records[s * n_instances : (s + 1) * n_instances]
        report.rows.extend(_aggregate(spec, variants, chunk, n_instances))
    return report


def run_scalability(
    semantics: Semantics | str,
    specs: Sequence[Spec],
    delta: float = 0.1,
    epsilon: float = 0.01,
    n_instances: int = 10,
    *,
    variant: str = "CE-QArg",
    seed: int = 0,
    jobs: int | None = 1,
    solver: SolverConfig | None = None,
) -> ExperimentReport:
    """One row per size point, for a single variant."""
    return run_effectiveness(
        semantics, specs, (variant,), delta, epsilon, n_instances, seed=seed, jobs=jobs, solver=solver
    )


# --------------------------------------------------------------- robustness


@dataclass(frozen=True)
class _RobustTask:
    sem: str
    spec: Spec
    e_grid: tuple[float, ...]
    delta: float
    p: float
    cfg: SolverConfig


def _robust_instance(task: _RobustTask) -> list[tuple[float, float] | None]:
    q, topic = generate(task.spec)
    rng = np.random.default_rng([task.spec.seed, 1])  # independent of the generator stream
    t = q.index.pos[topic]
    ev = topic_evaluator(q, task.sem, topic, task.cfg.eval)
    tau = q.tau_array()
    try:
        query = CexQuery(topic, sample_desired(rng, ev.strength(tau, t)), ProblemKind.DELTA, task.delta)
        found = solve(q, task.sem, query, task.cfg)
        cf = np.array([found.counterfactual[a] for a in q.arguments])
        cf_strength = ev.strength(cf, t)
    except (SolverError, NonConvergence, ValueError) as exc:
        log.info("robustness instance %s skipped: %s", task.spec, exc)
        return [None] * len(task.e_grid)
    out = []
    for e in task.e_grid:
        try:
            shifted = q.with_scores(np.minimum(1.0, tau + e))
            if np.array_equal(shifted.tau_array(), tau):
                m1 = 0.0
            else:
                again = solve(shifted, task.sem, query, task.cfg)
                m1 = lp_distance(found.counterfactual, again.counterfactual, task.p)
            m2 = abs(ev.strength(np.minimum(1.0, cf + e), t) - cf_strength)
        except (SolverError, NonConvergence, ValueError) as exc:
            log.info("robustness %s at e=%g: %s", task.spec, e, exc)
            out.append(None)
            continue
        out.append((m1, m2))
    return out


def run_robustness(
    semantics: Semantics | str,
    spec: Spec,
    e_grid: Sequence[float],
    delta: float = 0.1,
    epsilon: float = 0.01,
    n_instances: int = 20,
    *,
    p: float = 1.0,
    seed: int = 0,
    jobs: int | None = 1,
    solver: SolverConfig | None = None,
) -> RobustnessReport:
    """Metric 1: distance between counterfactuals found from ``tau`` and from
    ``min(1, tau + e)``. Metric 2: topic-strength change when the found
    counterfactual itself is shifted by ``e``. Both clip at 1."""
    sem, _ = _check_common(semantics, ("CE-QArg",), n_instances)
    grid = tuple(float(e) for e in e_grid)
    if not grid:
        raise EmptyExperiment("empty perturbation grid")
    if any(e < 0 or not math.isfinite(e) for e in grid):
        raise ValueError("perturbations must be finite and non-negative")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    base = solver or SolverConfig()
    cfg = SolverConfig(
        epsilon=epsilon, h=base.h, c=base.c, use_polarity=base.use_polarity, use_priority=base.use_priority,
        max_sweeps=base.max_sweeps, max_halvings=base.max_halvings, eval=base.eval,
    )
    tasks = [_RobustTask(sem, with_seed(spec, instance_seed(seed, 0, i)), grid, delta, p, cfg) for i in range(n_instances)]
    records = _pool_map(_robust_instance, tasks, jobs)
    report = RobustnessReport()
    for k, e in enumerate(grid):
        got = [r[k] for r in records if r[k] is not None]
        report.rows.append(
            RobustnessRow(spec.describe(), e, p, _mean([g[0] for g in got]), _mean([g[1] for g in got]), len(got))
        )
    return report


# ---------------------------------------------------------------- CSV output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".6g")
    return str(v)


def write_csv(report: ExperimentReport | RobustnessReport, path: str | os.PathLike) -> None:
    """Header plus one line per row; written atomically."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(report.columns)
            for row in report.rows:
                w.writerow([_fmt(getattr(row, c)) for c in report.columns])
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


# ------------------------------------------------------------------- config

_SPEC_KEYS = {"tree": {"kind", "width", "depth"}, "cyclic": {"kind", "n_args", "n_rels"}}
_COMMON_KEYS = {"name", "type", "semantics", "delta", "epsilon", "n_instances", "h", "c",
                "max_sweeps", "tolerance", "max_iterations", "seed"}
_TYPE_KEYS = {
    "effectiveness": _COMMON_KEYS | {"specs", "variants"},
    "scalability": _COMMON_KEYS | {"specs", "variant"},
    "robustness": _COMMON_KEYS | {"spec", "e_grid", "p"},
}


def parse_spec(doc: object) -> Spec:
    if not isinstance(doc, dict) or doc.get("kind") not in _SPEC_KEYS:
        raise ConfigError(f"spec must be an object with kind 'tree' or 'cyclic': {doc!r}")
    extra = set(doc) - _SPEC_KEYS[doc["kind"]]
    if extra:
        raise ConfigError(f"unexpected spec field(s) {sorted(extra)}")
    try:
        if doc["kind"] == "tree":
            return TreeSpec(int(doc["width"]), int(doc["depth"]))
        return CyclicSpec(int(doc["n_args"]), None if doc.get("n_rels") is None else int(doc["n_rels"]))
    except KeyError as exc:
        raise ConfigError(f"spec is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid spec {doc!r}: {exc}") from None


@dataclass(frozen=True)
class Experiment:
    name: str
    kind: str
    options: dict


@dataclass(frozen=True)
class BenchConfig:
    experiments: tuple[Experiment, ...]
    seed: int = 0


def parse_config(doc: object) -> BenchConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(doc) - {"seed", "experiments"}
    if extra:
        raise ConfigError(f"unexpected config field(s) {sorted(extra)}")
    exps = doc.get("experiments")
    if not isinstance(exps, list) or not exps:
        raise ConfigError("config needs a non-empty 'experiments' list")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    parsed = []
    names = set()
    for e in exps:
        if not isinstance(e, dict):
            raise ConfigError(f"experiment must be an object: {e!r}")
        kind = e.get("type")
        if kind not in _TYPE_KEYS:
            raise ConfigError(f"experiment type must be one of {sorted(_TYPE_KEYS)}, got {kind!r}")
        extra = set(e) - _TYPE_KEYS[kind]
        if extra:
            raise ConfigError(f"unexpected field(s) {sorted(extra)} in {kind} experiment")
        name = e.get("name", f"{kind}{len(parsed)}")
        if not isinstance(name, str) or not name or os.sep in name:
            raise ConfigError(f"invalid experiment name {name!r}")
        if name in names:
            raise ConfigError(f"duplicate experiment name {name!r}")
        names.add(name)
        opts = {k: v for k, v in e.items() if k not in ("name", "type")}
        try:
            if kind == "robustness":
                if "spec" not in opts or "e_grid" not in opts:
                    raise ConfigError("robustness experiment needs 'spec' and 'e_grid'")
                opts["spec"] = parse_spec(opts["spec"])
                opts["e_grid"] = [float(x) for x in opts["e_grid"]]
            else:
                specs = opts.get("specs")
                if not isinstance(specs, list) or not specs:
                    raise ConfigError(f"{kind} experiment needs a non-empty 'specs' list")
                opts["specs"] = [parse_spec(s) for s in specs]
            if "semantics" in opts:
                Semantics.parse(opts["semantics"])
            _solver_from(opts)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"experiment {name!r}: {exc}") from None
        parsed.append(Experiment(name, kind, opts))
    return BenchConfig(tuple(parsed), seed)


def load_config(path: str | os.PathLike) -> BenchConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {os.fspath(path)}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {os.fspath(path)}: {exc}") from None
    return parse_config(doc)


def _solver_from(opts: dict) -> SolverConfig:
    ev = EvalConfig(
        tolerance=float(opts.get("tolerance", DEFAULT_CONFIG.tolerance)),
        max_iterations=int(opts.get("max_iterations", DEFAULT_CONFIG.max_iterations)),
    )
    return SolverConfig(
        epsilon=float(opts.get("epsilon", 0.01)),
        h=float(opts.get("h", 0.1)),
        c=float(opts.get("c", 2.0)),
        max_sweeps=int(opts.get("max_sweeps", 100_000)),
        eval=ev,
    )


def run_experiment(exp: Experiment, seed: int = 0, jobs: int | None = 1) -> ExperimentReport | RobustnessReport:
    o = exp.options
    solver = _solver_from(o)
    common = dict(
        delta=float(o.get("delta", 0.1)),
        epsilon=solver.epsilon,
        n_instances=int(o.get("n_instances", 20)),
        seed=int(o.get("seed", seed)),
        jobs=jobs,
        solver=solver,
    )
    sem = o.get("semantics", "qe")
    if exp.kind == "effectiveness":
        return run_effectiveness(sem, o["specs"], o.get("variants", tuple(VARIANTS)), **common)
    if exp.kind == "scalability":
        return run_scalability(sem, o["specs"], variant=o.get("variant", "CE-QArg"), **common)
    return run_robustness(sem, o["spec"], o["e_grid"], p=float(o.get("p", 1.0)), **common)


def run_config(config: BenchConfig, out_dir: str | os.PathLike, jobs: int | None = 1) -> list[str]:
    """Run every experiment, then write ``<name>.csv`` files into ``out_dir``.

    Nothing is written until all experiments have finished.
    """
    reports = [(exp.name, run_experiment(exp, config.seed, jobs)) for exp in config.experiments]
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, report in reports:
        path = os.path.join(os.fspath(out_dir), f"{name}.csv")
        write_csv(report, path)
        paths.append(path)
    return paths
