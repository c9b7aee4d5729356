"""Gradual semantics: DF-QuAD, Quadratic Energy and Restricted Euler-based.

Acyclic QBAFs are evaluated exactly in topological order. Cyclic ones use
synchronous (Jacobi) sweeps starting from the base scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

from .core import Qbaf
from .errors import NonConvergence
from .kernels import backend as _k


class Semantics(str, Enum):
    DFQUAD = "dfquad"
    QE = "qe"
    REB = "reb"

    @property
    def code(self) -> int:
        return _CODES[self]

    @classmethod
    def parse(cls, value: "Semantics | str") -> "Semantics":
        if isinstance(value, Semantics):
            return value
        try:
            return cls(value.lower().replace("-", ""))
        except ValueError:
            raise ValueError(f"unknown semantics {value!r}; expected one of dfquad, qe, reb") from None


_CODES = {Semantics.DFQUAD: 0, Semantics.QE: 1, Semantics.REB: 2}


@dataclass(frozen=True)
class EvalConfig:
    tolerance: float = 1e-6
    max_iterations: int = 10_000

    def __post_init__(self):
        if not 0.0 < self.tolerance < 1.0:
            raise ValueError(f"tolerance must lie in (0, 1), got {self.tolerance}")
        if int(self.max_iterations) < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


DEFAULT_CONFIG = EvalConfig()


@dataclass(frozen=True)
class StrengthMap:
    strengths: Mapping[str, float]
    converged: bool
    iterations_used: int
    max_residual: float

    def __getitem__(self, a: str) -> float:
        return self.strengths[a]


def aggregate(sem: Semantics | str, attacker_strengths: Iterable[float], supporter_strengths: Iterable[float]) -> float:
    """DF-QuAD: prod(1 - att) - prod(1 - sup). QE/REB: sum(sup) - sum(att)."""
    return _k.aggregate(Semantics.parse(sem).code, list(attacker_strengths), list(supporter_strengths))


def influence(sem: Semantics | str, base: float, e: float) -> float:
    return _k.influence(Semantics.parse(sem).code, float(base), float(e))


class Evaluator:
    """Reusable evaluation of one QBAF structure under one semantics.

    ``nodes`` selects an induced subgraph (a boolean mask over ``q.index``);
    when it is ancestor-closed, strengths inside it equal those of the full
    QBAF. Base scores are always passed as full-length arrays.
    """

    def __init__(self, q: Qbaf, sem: Semantics | str, cfg: EvalConfig = DEFAULT_CONFIG, nodes: np.ndarray | None = None):
        self.sem = Semantics.parse(sem)
        self.cfg = cfg
        idx = q.index
        self.n_full = idx.n
        if nodes is None or bool(np.all(nodes)):
            self.keep = np.arange(idx.n, dtype=np.int64)
            self.in_ptr, self.in_src, self.in_sign = idx.in_ptr, idx.in_src, idx.in_sign
            self.order = idx.topo
            self.local = None
        else:
            keep = np.flatnonzero(nodes).astype(np.int64)
            remap = np.full(idx.n, -1, dtype=np.int64)
            remap[keep] = np.arange(len(keep))
            ptr = [0]
            src: list[int] = []
            sign: list[int] = []
            for j in keep.tolist():
                for i, s in idx.pred[j]:
                    if remap[i] >= 0:
                        src.append(int(remap[i]))
                        sign.append(s)
                ptr.append(len(src))
            self.keep = keep
            self.in_ptr = np.asarray(ptr, dtype=np.int64)
            self.in_src = np.asarray(src, dtype=np.int64)
            self.in_sign = np.asarray(sign, dtype=np.int8)
            self.order = None if idx.topo is None else remap[idx.topo][remap[idx.topo] >= 0]
            self.local = remap
        self.size = len(self.keep)
        self._all_active = np.ones(self.size, dtype=np.uint8)

    @property
    def acyclic(self) -> bool:
        return self.order is not None

    def local_index(self, i: int) -> int:
        return i if self.local is None else int(self.local[i])

    def run(self, tau: np.ndarray, active: np.ndarray | None = None) -> tuple[np.ndarray, bool, int, float]:
        """Strengths of the kept nodes: ``(values, converged, sweeps, last_change)``."""
        tau_sub = np.ascontiguousarray(tau if self.local is None else tau[self.keep], dtype=np.float64)
        act = self._all_active if active is None else np.ascontiguousarray(active, dtype=np.uint8)
        out = np.empty(self.size, dtype=np.float64)
        code = self.sem.code
        if self.order is not None:
            _k.propagate_acyclic(code, tau_sub, self.order, self.in_ptr, self.in_src, self.in_sign, act, out)
            return out, True, 1, 0.0
        it, diff = _k.propagate_fixed_point(
            code, tau_sub, self.in_ptr, self.in_src, self.in_sign, act,
            float(self.cfg.tolerance), int(self.cfg.max_iterations), out,
        )
        return out, diff <= self.cfg.tolerance, int(it), float(diff)

    def strength(self, tau: np.ndarray, i: int, active: np.ndarray | None = None) -> float:
        """Final strength of original node ``i``; raises :class:`NonConvergence`."""
        out, ok, it, diff = self.run(tau, active)
        if not ok:
            raise NonConvergence(f"no convergence after {it} sweeps (last change {diff:.3g})")
        return float(out[self.local_index(i)])


def _as_map(q: Qbaf, values: np.ndarray, ok: bool, it: int, diff: float) -> StrengthMap:
    return StrengthMap(dict(zip(q.arguments, values.tolist())), ok, it, diff)


def evaluate(q: Qbaf, sem: Semantics | str, cfg: EvalConfig = DEFAULT_CONFIG) -> StrengthMap:
    """Final strength of every argument.

    Raises :class:`NonConvergence` (carrying the last iterate) when a cyclic
    QBAF does not settle within ``cfg.max_iterations`` sweeps.
    """
    values, ok, it, diff = Evaluator(q, sem, cfg).run(q.tau_array())
    result = _as_map(q, values, ok, it, diff)
    if not ok:
        raise NonConvergence(f"no convergence after {it} sweeps (last change {diff:.3g})", result)
    return result


def evaluate_restricted(
    q: Qbaf,
    present: Iterable[str],
    sem: Semantics | str,
    cfg: EvalConfig = DEFAULT_CONFIG,
    topic: str | None = None,
) -> float:
    """Strength of ``topic`` once every argument outside ``present`` (and the
    topic) is deleted together with its edges."""
    idx = q.index
    if topic is None:
        raise ValueError("topic is required")
    active = np.zeros(idx.n, dtype=np.uint8)
    for a in present:
        if a not in idx.pos:
            raise ValueError(f"unknown argument {a!r}")
        active[idx.pos[a]] = 1
    active[idx.pos[topic]] = 1
    return Evaluator(q, sem, cfg).strength(q.tau_array(), idx.pos[topic], active)


def residual(q: Qbaf, sem: Semantics | str, s: StrengthMap | Mapping[str, float]) -> float:
    """Largest violation of the fixed-point equations by the strengths ``s``."""
    values = s.strengths if isinstance(s, StrengthMap) else s
    idx = q.index
    arr = np.array([values[a] for a in q.arguments], dtype=np.float64)
    return float(
        _k.residual(
            Semantics.parse(sem).code, q.tau_array(), idx.in_ptr, idx.in_src, idx.in_sign,
            np.ones(idx.n, dtype=np.uint8), arr,
        )
    )



def topic_evaluator(q: Qbaf, sem: Semantics | str, topic: str, cfg: EvalConfig = DEFAULT_CONFIG) -> Evaluator:
    """Evaluator over the arguments with a path to ``topic``; nothing else can
    influence its strength."""
    idx = q.index
    if topic not in idx.pos:
        raise ValueError(f"unknown argument {topic!r}")
    return Evaluator(q, sem, cfg, nodes=idx.ancestors(idx.pos[topic]))


def topic_strength(q: Qbaf, sem: Semantics | str, topic: str, cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    return topic_evaluator(q, sem, topic, cfg).strength(q.tau_array(), q.index.pos[topic])
