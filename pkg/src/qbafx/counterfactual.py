"""Counterfactual base score functions for a topic argument.

A counterfactual is a new base score function under which the topic reaches a
desired strength. Three problem kinds differ in how close it must land:
exactly (strong), inside a one-sided band of width delta (delta), or merely
past the threshold (weak).

:func:`solve` walks every base score by a small step per sweep. Direction
comes from polarity (fixed) or from a finite-difference quotient (recomputed
each sweep); magnitude is scaled by priority.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import BaseScoreFn, Qbaf
from .errors import SweepLimit, Unreachable
from .graph import on_cycle, priority_map, walk_parities
from .semantics import DEFAULT_CONFIG, EvalConfig, Evaluator, Semantics, topic_evaluator

STRONG_TOL = 1e-9


class ProblemKind(Enum):
    STRONG = "strong"
    DELTA = "delta"
    WEAK = "weak"


@dataclass(frozen=True)
class CexQuery:
    topic: str
    desired: float
    kind: ProblemKind = ProblemKind.DELTA
    delta: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.desired <= 1.0:
            raise ValueError(f"desired strength must lie in [0,1], got {self.desired}")
        if self.kind is ProblemKind.DELTA and not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")


VARIANTS: dict[str, tuple[bool, bool]] = {
    # name: (use_polarity, use_priority)
    "BL": (False, False),
    "BL+pri": (False, True),
    "BL+pol": (True, False),
    "CE-QArg": (True, True),
}


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 0.01
    h: float = 0.1
    c: float = 2.0
    use_polarity: bool = True
    use_priority: bool = True
    max_sweeps: int = 100_000
    max_halvings: int = 20
    eval: EvalConfig = field(default=DEFAULT_CONFIG)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.h == 0 or not -1.0 <= self.h <= 1.0:
            raise ValueError(f"h must lie in [-1,0) or (0,1], got {self.h}")
        if not self.c > 1:
            raise ValueError(f"self priority c must exceed 1, got {self.c}")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be positive")

    @classmethod
    def variant(cls, name: str, **kw) -> "SolverConfig":
        try:
            pol, pri = VARIANTS[name]
        except KeyError:
            raise ValueError(f"unknown variant {name!r}; expected one of {list(VARIANTS)}") from None
        return cls(use_polarity=pol, use_priority=pri, **kw)

    @property
    def variant_name(self) -> str:
        for name, flags in VARIANTS.items():
            if flags == (self.use_polarity, self.use_priority):
                return name
        raise AssertionError("unreachable")


@dataclass
class CexResult:
    counterfactual: dict[str, float]
    valid: bool
    achieved_strength: float
    l1: float
    l2: float
    sweeps: int
    wall_time: float
    original_strength: float = math.nan
    status: str = "valid"

    def summary(self) -> str:
        return (
            f"valid={str(self.valid).lower()} achieved={self.achieved_strength:.6f} "
            f"l1={self.l1:.6f} l2={self.l2:.6f} sweeps={self.sweeps} time={self.wall_time:.6f}"
        )


def lp_distance(a: BaseScoreFn, b: BaseScoreFn, p: float = 1.0) -> float:
    """(sum |a - b|^p)^(1/p) over the shared arguments."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if set(a) != set(b):
        raise ValueError("base score functions are over different arguments")
    diffs = np.array([abs(a[k] - b[k]) for k in a], dtype=np.float64)
    if math.isinf(p):
        return float(diffs.max(initial=0.0))
    return float(np.sum(diffs**p) ** (1.0 / p))


def trivial_counterfactual(q: Qbaf, topic: str, s_star: float) -> dict[str, float]:
    """Topic set to ``s_star``, everything else to 0."""
    if topic not in q.base_scores:
        raise ValueError(f"unknown argument {topic!r}")
    if not 0.0 <= s_star <= 1.0:
        raise ValueError(f"desired strength must lie in [0,1], got {s_star}")
    return {a: (float(s_star) if a == topic else 0.0) for a in q.arguments}


def nullify(candidate: BaseScoreFn, victim: str) -> dict[str, float]:
    if victim not in candidate:
        raise ValueError(f"unknown argument {victim!r}")
    out = dict(candidate)
    out[victim] = 0.0
    return out


def satisfies(kind: ProblemKind, original: float, achieved: float, desired: float, delta: float = 0.1) -> bool:
    """Whether ``achieved`` solves the problem, given the original topic strength."""
    if kind is ProblemKind.STRONG:
        return abs(achieved - desired) <= STRONG_TOL
    up = original < desired
    # the threshold side shares the strong tolerance so strong => delta => weak
    lo, hi = desired - STRONG_TOL, desired + STRONG_TOL
    if kind is ProblemKind.WEAK:
        return achieved >= lo if up else achieved <= hi
    if up:
        return lo <= achieved <= desired + delta
    return desired - delta <= achieved <= hi


def check_validity(
    q: Qbaf,
    sem: Semantics | str,
    query: CexQuery,
    candidate: BaseScoreFn,
    cfg: EvalConfig = DEFAULT_CONFIG,
) -> bool:
    """Re-evaluate the topic under ``candidate`` and test the query's condition."""
    if dict(candidate) == dict(q.base_scores):
        raise ValueError("candidate equals the original base score function")
    ev = topic_evaluator(q, sem, query.topic, cfg)
    t = q.index.pos[query.topic]
    original = ev.strength(q.tau_array(), t)
    if abs(original - query.desired) <= STRONG_TOL:
        raise ValueError("desired strength equals the current strength")
    achieved = ev.strength(q.with_scores(candidate).tau_array(), t)
    return satisfies(query.kind, original, achieved, query.desired, query.delta)


def _offset(base: float, h: float) -> float:
    if 0.0 <= base + h <= 1.0:
        return h
    if 0.0 <= base - h <= 1.0:
        return -h
    raise ValueError(f"neither {base}+{h} nor {base}-{h} lies in [0,1]")


def _quotient(ev: Evaluator, tau: np.ndarray, i: int, t: int, h: float, current: float) -> float:
    h_eff = _offset(float(tau[i]), h)
    bumped = tau.copy()
    bumped[i] += h_eff
    return (ev.strength(bumped, t) - current) / h_eff


def difference_quotient(
    q: Qbaf,
    sem: Semantics | str,
    source: str,
    topic: str,
    h: float = 0.1,
    baseline=None,
    cfg: EvalConfig = DEFAULT_CONFIG,
) -> float:
    """Average rate of change of the topic strength when ``source``'s base score
    moves by ``h`` (by ``-h`` if ``+h`` would leave [0,1])."""
    if h == 0:
        raise ValueError("h must be non-zero")
    ev = topic_evaluator(q, sem, topic, cfg)
    pos = q.index.pos
    tau = q.tau_array()
    t = pos[topic]
    current = ev.strength(tau, t) if baseline is None else float(baseline[topic])
    return _quotient(ev, tau, pos[source], t, h, current)


def _directions(q: Qbaf, topic: str, anc: np.ndarray, use_polarity: bool) -> tuple[np.ndarray, list[int]]:
    """Fixed update signs plus the arguments whose sign needs a quotient each sweep."""
    idx = q.index
    t = idx.pos[topic]
    fixed = np.zeros(idx.n, dtype=np.float64)
    candidates = np.flatnonzero(anc).tolist()  # nobody else can move the topic
    if not use_polarity:
        return fixed, candidates
    even, odd = walk_parities(q, topic)
    unknown = []
    for i in candidates:
        if i == t:
            # own base score: non-decreasing at fixed aggregate unless a cycle feeds back
            if on_cycle(q, topic):
                unknown.append(i)
            else:
                fixed[i] = 1.0
        elif even[i] and odd[i]:
            unknown.append(i)
        elif even[i]:
            fixed[i] = 1.0
        elif odd[i]:
            fixed[i] = -1.0
    return fixed, unknown


def solve(q: Qbaf, sem: Semantics | str, query: CexQuery, cfg: SolverConfig = SolverConfig()) -> CexResult:
    """Iteratively move base scores until the topic satisfies ``query``.

    Raises :class:`Unreachable` when no base score can move (or overshoot
    cannot be tamed by halving the step) and :class:`SweepLimit` after
    ``cfg.max_sweeps`` sweeps; both carry the best-so-far result.
    """
    start = time.perf_counter()
    idx = q.index
    if query.topic not in idx.pos:
        raise ValueError(f"unknown topic {query.topic!r}")
    t = idx.pos[query.topic]
    anc = idx.ancestors(t)
    ev = topic_evaluator(q, sem, query.topic, cfg.eval)
    tau0 = q.tau_array()
    original = ev.strength(tau0, t)
    desired = query.desired
    if abs(original - desired) <= STRONG_TOL:
        raise ValueError(f"topic already has the desired strength {desired}")
    up = original < desired
    toward = 1.0 if up else -1.0

    fixed, unknown = _directions(q, query.topic, anc, cfg.use_polarity)
    if cfg.use_priority:
        pm = priority_map(q, query.topic, cfg.c)
        prio = np.array([pm[a] for a in idx.ids], dtype=np.float64)
    else:
        prio = np.ones(idx.n, dtype=np.float64)

    def overshoots(v: float) -> bool:
        if query.kind is ProblemKind.WEAK:
            return False
        slack = query.delta if query.kind is ProblemKind.DELTA else STRONG_TOL
        return v > desired + slack if up else v < desired - slack

    tau = tau0.copy()
    current = original
    eps = cfg.epsilon
    sweeps = halvings = 0

    def result(status: str) -> CexResult:
        diff = tau - tau0
        return CexResult(
            counterfactual=dict(zip(idx.ids, tau.tolist())),
            valid=status == "valid",
            achieved_strength=current,
            l1=float(np.abs(diff).sum()),
            l2=float(np.sqrt((diff * diff).sum())),
            sweeps=sweeps,
            wall_time=time.perf_counter() - start,
            original_strength=original,
            status=status,
        )

    while not satisfies(query.kind, original, current, desired, query.delta):
        if sweeps >= cfg.max_sweeps:
            raise SweepLimit(f"no valid counterfactual after {sweeps} sweeps", result("sweep-limit"))
        direction = fixed.copy()
        for i in unknown:
            dq = _quotient(ev, tau, i, t, cfg.h, current)
            direction[i] = 1.0 if dq > 0 else (-1.0 if dq < 0 else 0.0)
        step = toward * direction * prio
        while True:
            nxt = np.clip(tau + step * eps, 0.0, 1.0)
            if np.array_equal(nxt, tau):
                raise Unreachable("no base score can move further toward the target", result("unreachable"))
            value = ev.strength(nxt, t)
            if not overshoots(value):
                break
            if halvings >= cfg.max_halvings:
                raise Unreachable(f"still overshooting after {halvings} step halvings", result("unreachable"))
            eps /= 2.0
            halvings += 1
        tau = nxt
        current = value
        sweeps += 1
    return result("valid")


def solve_variant(q: Qbaf, sem: Semantics | str, query: CexQuery, variant: str, **kw) -> CexResult:
    return solve(q, sem, query, SolverConfig.variant(variant, **kw))

