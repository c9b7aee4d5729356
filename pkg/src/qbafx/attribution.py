"""Shapley importance of each argument for a topic argument's strength.

The coalition value of a set S is the topic's strength after deleting every
argument outside S (and their edges). Enumeration is exact, so the argument
count is capped.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Mapping

import numpy as np

from .core import Qbaf
from .errors import TooLarge
from .semantics import DEFAULT_CONFIG, EvalConfig, Semantics, topic_evaluator

EXACT_LIMIT = 15


@dataclass(frozen=True)
class AttributionReport:
    topic: str
    scores: Mapping[str, float]
    semantics: Semantics

    def rows(self) -> list[tuple[str, float]]:
        return sorted(self.scores.items())


class _Coalitions:
    """Memoised coalition values, keyed by bitmask over the non-topic arguments."""

    def __init__(self, q: Qbaf, sem: Semantics | str, topic: str, cfg: EvalConfig, limit: int):
        if topic not in q.base_scores:
            raise ValueError(f"unknown argument {topic!r}")
        if len(q) > limit:
            raise TooLarge(f"{len(q)} arguments exceed the exact Shapley limit of {limit}")
        idx = q.index
        self.players = [a for a in q.arguments if a != topic]
        self.t = idx.pos[topic]
        # only ancestors of the topic can change its strength
        self.ev = topic_evaluator(q, sem, topic, cfg)
        self.tau = q.tau_array()
        self.local = np.array([self.ev.local_index(idx.pos[a]) for a in self.players], dtype=np.int64)
        # players outside the topic's ancestors never change its strength
        self.relevant = sum(1 << k for k, loc in enumerate(self.local.tolist()) if loc >= 0)
        self.memo: dict[int, float] = {}

    def value(self, mask: int) -> float:
        mask &= self.relevant
        v = self.memo.get(mask)
        if v is None:
            active = np.zeros(self.ev.size, dtype=np.uint8)
            active[self.ev.local_index(self.t)] = 1
            for k, loc in enumerate(self.local.tolist()):
                if loc >= 0 and mask >> k & 1:
                    active[loc] = 1
            v = self.memo[mask] = self.ev.strength(self.tau, self.t, active)
        return v


def _shapley(co: _Coalitions, k: int) -> float:
    n = len(co.players)
    weights = [factorial(s) * factorial(n - s - 1) / factorial(n) for s in range(n)]
    bit = 1 << k
    if not co.relevant & bit:
        return 0.0
    others = [1 << j for j in range(n) if j != k]
    total = 0.0
    for sub in range(1 << len(others)):
        mask = 0
        size = 0
        for j, b in enumerate(others):
            if sub >> j & 1:
                mask |= b
                size += 1
        total += weights[size] * (co.value(mask | bit) - co.value(mask))
    return total


def shapley_importance(
    q: Qbaf,
    sem: Semantics | str,
    topic: str,
    subject: str,
    cfg: EvalConfig = DEFAULT_CONFIG,
    limit: int = EXACT_LIMIT,
) -> float:
    """Exact Shapley importance of ``subject`` for ``topic``."""
    if subject == topic:
        raise ValueError("subject must differ from topic")
    if subject not in q.base_scores:
        raise ValueError(f"unknown argument {subject!r}")
    co = _Coalitions(q, sem, topic, cfg, limit)
    return _shapley(co, co.players.index(subject))


def shapley_all(
    q: Qbaf,
    sem: Semantics | str,
    topic: str,
    cfg: EvalConfig = DEFAULT_CONFIG,
    limit: int = EXACT_LIMIT,
) -> AttributionReport:
    """Importance of every non-topic argument; coalition values are shared."""
    co = _Coalitions(q, sem, topic, cfg, limit)
    scores = {a: _shapley(co, k) for k, a in enumerate(co.players)}
    return AttributionReport(topic, scores, Semantics.parse(sem))
