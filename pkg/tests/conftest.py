import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

from qbafx import Qbaf

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
SEMANTICS = ("dfquad", "qe", "reb")


def loan_qbaf() -> Qbaf:
    return Qbaf.build(
        {"alpha": 0.5, "beta": 0.3, "gamma": 0.6, "rho": 0.7, "zeta": 0.4},
        attacks=[("gamma", "alpha"), ("rho", "beta")],
        supports=[("beta", "alpha"), ("zeta", "gamma")],
    )


def mixed_paths_qbaf() -> Qbaf:
    """alpha and beta attack each other; beta reaches delta directly (attack) and via gamma (supports)."""
    return Qbaf.build(
        dict.fromkeys(["alpha", "beta", "gamma", "delta"], 0.5),
        attacks=[("alpha", "beta"), ("beta", "alpha"), ("beta", "delta")],
        supports=[("beta", "gamma"), ("gamma", "delta")],
    )


def non_monotone_qbaf(t: float = 0.0) -> Qbaf:
    """sigma(alpha) = t(1 - t) under DF-QuAD, where t is beta's base score."""
    scores = dict.fromkeys(["alpha", "beta", "gamma", "mu"], 0.0)
    scores["beta"] = t
    return Qbaf.build(
        scores,
        attacks=[("gamma", "alpha")],
        supports=[("beta", "alpha"), ("beta", "mu"), ("mu", "alpha"), ("beta", "gamma")],
    )


@pytest.fixture
def loan():
    return loan_qbaf()


@pytest.fixture
def mixed():
    return mixed_paths_qbaf()


@st.composite
def qbafs(draw, min_n=1, max_n=8, acyclic=False, max_edges=None, self_loops=False):
    """Random QBAF with at most ``max_edges`` relations (default 2n).

    Acyclic ones orient every edge along a hidden random rank.
    """
    n = draw(st.integers(min_n, max_n))
    names = [f"n{i}" for i in range(n)]
    rank = draw(st.permutations(range(n)))
    scores = {a: draw(st.floats(0.0, 1.0, allow_nan=False)) for a in names}
    pairs = [
        (names[i], names[j])
        for i in range(n)
        for j in range(n)
        if (i != j or self_loops) and (not acyclic or rank[i] < rank[j])
    ]
    cap = 2 * n if max_edges is None else max_edges
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=cap)) if pairs else []
    kinds = draw(st.lists(st.booleans(), min_size=len(edges), max_size=len(edges)))
    attacks = [e for e, k in zip(edges, kinds) if k]
    supports = [e for e, k in zip(edges, kinds) if not k]
    return Qbaf.build(scores, attacks, supports)

def random_qbaf(rng, n, acyclic=False, n_edges=None, self_loops=False):
    """numpy-driven generator for suites that need larger graphs than hypothesis draws cheaply."""
    names = [f"v{i:02d}" for i in range(n)]
    rank = rng.permutation(n)
    pairs = [
        (i, j)
        for i in range(n)
        for j in range(n)
        if (i != j or self_loops) and (not acyclic or rank[i] < rank[j])
    ]
    if n_edges is None:
        n_edges = int(rng.integers(0, min(len(pairs), 2 * n) + 1)) if pairs else 0
    chosen = rng.choice(len(pairs), size=min(n_edges, len(pairs)), replace=False) if pairs else []
    attacks, supports = [], []
    for k in chosen:
        i, j = pairs[int(k)]
        (attacks if rng.random() < 0.5 else supports).append((names[i], names[j]))
    return Qbaf.build(dict(zip(names, rng.uniform(0, 1, n).tolist())), attacks, supports)
