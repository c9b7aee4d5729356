"""Random QBAF families used by the experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Qbaf


def _names(n: int) -> list[str]:
    pad = len(str(max(n - 1, 0)))
    return [f"a{i:0{pad}d}" for i in range(n)]


@dataclass(frozen=True)
class TreeSpec:
    """Full ``width``-ary tree with ``depth`` levels of edges below the root."""

    width: int
    depth: int
    seed: int = 0

    def __post_init__(self):
        if self.width not in (2, 3, 4):
            raise ValueError(f"tree width must be 2, 3 or 4, got {self.width}")
        if not 1 <= self.depth <= 8:
            raise ValueError(f"tree depth must be in 1..8, got {self.depth}")

    @property
    def n_args(self) -> int:
        return (self.width ** (self.depth + 1) - 1) // (self.width - 1)

    @property
    def n_args_node_levels(self) -> int:
        """Size if ``depth`` counted node levels instead of edge levels."""
        return (self.width**self.depth - 1) // (self.width - 1)

    @property
    def topic(self) -> str:
        return _names(self.n_args)[0]

    def describe(self) -> str:
        return f"tree(w={self.width},d={self.depth})"


@dataclass(frozen=True)
class CyclicSpec:
    """Random relations over ``n_args`` arguments; ``n_rels`` defaults to ``n_args``."""

    n_args: int
    n_rels: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_args < 2:
            raise ValueError(f"need at least 2 arguments, got {self.n_args}")
        rels = self.relations
        if not 0 <= rels <= self.n_args * (self.n_args - 1):
            raise ValueError(f"cannot place {rels} relations on {self.n_args} arguments")

    @property
    def relations(self) -> int:
        return self.n_args if self.n_rels is None else self.n_rels

    @property
    def n_args_node_levels(self) -> int:
        return self.n_args

    def describe(self) -> str:
        return f"cyclic(n={self.n_args},r={self.relations})"


def gen_tree(spec: TreeSpec) -> Qbaf:
    """Edges point child -> parent; the root (first id) is the topic."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n_args
    names = _names(n)
    scores = rng.uniform(0.0, 1.0, size=n)
    is_attack = rng.random(n - 1) < 0.5
    attacks, supports = [], []
    for child in range(1, n):
        edge = (names[child], names[(child - 1) // spec.width])
        (attacks if is_attack[child - 1] else supports).append(edge)
    return Qbaf.build(dict(zip(names, scores.tolist())), attacks, supports)


def gen_cyclic(spec: CyclicSpec) -> tuple[Qbaf, str]:
    """Distinct ordered pairs (no self-loops) drawn uniformly, each typed at random."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n_args
    names = _names(n)
    scores = rng.uniform(0.0, 1.0, size=n)
    picks = rng.choice(n * (n - 1), size=spec.relations, replace=False)
    is_attack = rng.random(spec.relations) < 0.5
    attacks, supports = [], []
    for k, atk in zip(picks.tolist(), is_attack.tolist()):
        src, off = divmod(k, n - 1)
        dst = off if off < src else off + 1
        (attacks if atk else supports).append((names[src], names[dst]))
    topic = names[int(rng.integers(n))]
    return Qbaf.build(dict(zip(names, scores.tolist())), attacks, supports), topic


def generate(spec: TreeSpec | CyclicSpec) -> tuple[Qbaf, str]:
    if isinstance(spec, TreeSpec):
        return gen_tree(spec), spec.topic
    return gen_cyclic(spec)
