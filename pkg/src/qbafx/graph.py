"""Paths, cycles, connectivity, polarity and priority between arguments.

A *path* follows attacks and supports head to tail and may revisit nodes;
the elementary paths (no repeated node) are what DFS enumerates. Polarity is
about the parity of attacks over *all* paths, so cycles matter: traversing an
odd-attack cycle flips the parity.
"""

from __future__ import annotations

from collections import deque
from enum import Enum, IntEnum

import numpy as np

from .core import ATTACK, Qbaf

Path = tuple[tuple[str, str], ...]


class Connectivity(Enum):
    DISCONNECTED = "disconnected"
    SINGLE_PATH = "single-path"
    MULTI_PATH = "multi-path"


class Polarity(IntEnum):
    NEUTRAL = -2
    NEGATIVE = -1
    UNKNOWN = 0
    POSITIVE = 1

    def __str__(self) -> str:
        return self.name.lower()


def attack_count(q: Qbaf, path: Path) -> int:
    return sum(1 for e in path if e in q.attacks)


def _check(q: Qbaf, *names: str) -> list[int]:
    pos = q.index.pos
    for a in names:
        if a not in pos:
            raise ValueError(f"unknown argument {a!r}")
    return [pos[a] for a in names]


def _relevant(q: Qbaf, s: int, t: int) -> np.ndarray:
    """Nodes lying on some path from ``s`` to ``t``."""
    return q.index.descendants(s) & q.index.ancestors(t)


def enumerate_simple_paths(q: Qbaf, source: str, target: str) -> set[Path]:
    """All elementary directed paths from ``source`` to ``target``."""
    s, t = _check(q, source, target)
    if s == t:
        raise ValueError("source and target must differ")
    idx = q.index
    ids = idx.ids
    useful = idx.ancestors(t)
    if not useful[s]:
        return set()
    found: set[Path] = set()
    on_path = np.zeros(idx.n, dtype=bool)
    on_path[s] = True
    nodes = [s]
    stack = [iter(idx.succ[s])]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            on_path[nodes.pop()] = False
            continue
        v = nxt[0]
        if on_path[v] or not useful[v]:
            continue
        if v == t:
            seq = nodes + [t]
            found.add(tuple((ids[a], ids[b]) for a, b in zip(seq, seq[1:])))
            continue
        on_path[v] = True
        nodes.append(v)
        stack.append(iter(idx.succ[v]))
    return found


def _canonical_cycle(ids: tuple[str, ...], seq: list[int]) -> Path:
    k = min(range(len(seq)), key=lambda i: ids[seq[i]])
    rot = seq[k:] + seq[:k]
    return tuple((ids[a], ids[b]) for a, b in zip(rot, rot[1:] + rot[:1]))


def find_elementary_cycles(q: Qbaf, through: str) -> set[Path]:
    """Elementary directed cycles containing ``through``.

    Johnson's circuit search from a single start vertex, restricted to its
    strongly connected component; each cycle is rotated to begin at its
    lexicographically smallest argument.
    """
    (s,) = _check(q, through)
    idx = q.index
    comp = idx.descendants(s) & idx.ancestors(s)
    adj = {u: [v for v, _ in idx.succ[u] if comp[v]] for u in np.flatnonzero(comp).tolist()}
    cycles: set[Path] = set()
    if s not in adj or not adj[s]:
        return cycles

    blocked = {u: False for u in adj}
    bset: dict[int, set[int]] = {u: set() for u in adj}

    def unblock(u: int) -> None:
        work = [u]
        while work:
            w = work.pop()
            if blocked[w]:
                blocked[w] = False
                work.extend(bset[w])
                bset[w].clear()

    path = [s]
    blocked[s] = True
    stack = [(s, iter(adj[s]))]
    closed = [False]
    while stack:
        v, it = stack[-1]
        w = next(it, None)
        if w is not None:
            if w == s:
                cycles.add(_canonical_cycle(idx.ids, path[:]))
                closed[-1] = True
            elif not blocked[w]:
                path.append(w)
                blocked[w] = True
                stack.append((w, iter(adj[w])))
                closed.append(False)
            continue
        stack.pop()
        found = closed.pop()
        path.pop()
        if found:
            unblock(v)
        else:
            for x in adj[v]:
                bset[x].add(v)
        if closed:
            closed[-1] = closed[-1] or found
    return cycles


def _has_cycle(q: Qbaf, nodes: np.ndarray) -> bool:
    idx = q.index
    members = np.flatnonzero(nodes).tolist()
    indeg = {u: 0 for u in members}
    for u in members:
        for v, _ in idx.succ[u]:
            if nodes[v]:
                indeg[v] += 1
    queue = deque(u for u in members if indeg[u] == 0)
    seen = 0
    while queue:
        u = queue.popleft()
        seen += 1
        for v, _ in idx.succ[u]:
            if nodes[v]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    queue.append(v)
    return seen != len(members)


def connectivity(q: Qbaf, source: str, target: str) -> Connectivity:
    """How many paths (elementary or not) lead from ``source`` to ``target``.

    Any cycle on a node between them yields infinitely many paths.
    """
    s, t = _check(q, source, target)
    if s == t:
        raise ValueError("source and target must differ")
    rel = _relevant(q, s, t)
    if not rel[s]:
        return Connectivity.DISCONNECTED
    if _has_cycle(q, rel):
        return Connectivity.MULTI_PATH
    # acyclic between them: count paths in the DAG, saturating at 2
    idx = q.index
    memo: dict[int, int] = {t: 1}
    order = [u for u in idx.topo.tolist() if rel[u]] if idx.topo is not None else _topo(q, rel)
    for u in reversed(order):
        if u == t:
            continue
        memo[u] = min(2, sum(memo.get(v, 0) for v, _ in idx.succ[u] if rel[v]))
    return Connectivity.SINGLE_PATH if memo[s] == 1 else Connectivity.MULTI_PATH


def _topo(q: Qbaf, nodes: np.ndarray) -> list[int]:
    idx = q.index
    members = np.flatnonzero(nodes).tolist()
    indeg = {u: 0 for u in members}
    for u in members:
        for v, _ in idx.succ[u]:
            if nodes[v]:
                indeg[v] += 1
    queue = deque(u for u in members if indeg[u] == 0)
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for v, _ in idx.succ[u]:
            if nodes[v]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    queue.append(v)
    return order


def polarity(q: Qbaf, source: str, target: str) -> Polarity:
    """Polarity from ``source`` to ``target`` by path and cycle inspection.

    Elementary paths are enumerated by DFS; an odd-attack elementary cycle
    anywhere between the two arguments makes the polarity unknown. The cycle
    check covers every node on some source-to-target path, not only nodes of
    elementary paths, so cycles hanging off other cycles are caught.
    """
    s, t = _check(q, source, target)
    if s == t:
        raise ValueError("polarity is undefined from an argument to itself")
    paths = enumerate_simple_paths(q, source, target)
    if not paths:
        return Polarity.NEUTRAL
    ids = q.index.ids
    checked: set[int] = set()
    for u in np.flatnonzero(_relevant(q, s, t)).tolist():
        if u in checked:
            continue
        for cyc in find_elementary_cycles(q, ids[u]):
            if attack_count(q, cyc) % 2:
                return Polarity.UNKNOWN
        checked.add(u)
    parities = {attack_count(q, p) % 2 for p in paths}
    if parities == {1}:
        return Polarity.NEGATIVE
    if parities == {0}:
        return Polarity.POSITIVE
    return Polarity.UNKNOWN


def walk_parities(q: Qbaf, topic: str) -> tuple[np.ndarray, np.ndarray]:
    """For every argument, whether an even / odd-attack path to ``topic`` exists.

    Backward BFS over (argument, parity) states from ``(topic, even)``;
    linear in the size of the QBAF.
    """
    (t,) = _check(q, topic)
    idx = q.index
    reach = np.zeros((idx.n, 2), dtype=bool)
    reach[t, 0] = True
    queue = deque([(t, 0)])
    while queue:
        v, p = queue.popleft()
        for u, sign in idx.pred[v]:
            pu = p ^ (sign == ATTACK)
            if not reach[u, pu]:
                reach[u, pu] = True
                queue.append((u, pu))
    return reach[:, 0], reach[:, 1]


def polarity_map(q: Qbaf, topic: str) -> dict[str, Polarity]:
    """Polarity of every other argument towards ``topic`` in one pass."""
    even, odd = walk_parities(q, topic)
    out = {}
    for i, a in enumerate(q.index.ids):
        if a == topic:
            continue
        if even[i] and odd[i]:
            out[a] = Polarity.UNKNOWN
        elif even[i]:
            out[a] = Polarity.POSITIVE
        elif odd[i]:
            out[a] = Polarity.NEGATIVE
        else:
            out[a] = Polarity.NEUTRAL
    return out


def on_cycle(q: Qbaf, a: str) -> bool:
    """True iff some elementary cycle passes through ``a``."""
    (i,) = _check(q, a)
    idx = q.index
    return any(idx.ancestors(i)[v] for v, _ in idx.succ[i])


def _distances_to(q: Qbaf, t: int) -> np.ndarray:
    idx = q.index
    dist = np.full(idx.n, -1, dtype=np.int64)
    dist[t] = 0
    queue = deque([t])
    while queue:
        v = queue.popleft()
        for u, _ in idx.pred[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def priority(q: Qbaf, source: str, target: str, c: float = 2.0) -> float:
    """``c`` for an argument to itself, else 1 / shortest path length (0 if none)."""
    if c <= 1:
        raise ValueError(f"self priority must exceed 1, got {c}")
    s, t = _check(q, source, target)
    if s == t:
        return float(c)
    d = int(_distances_to(q, t)[s])
    return 0.0 if d < 0 else 1.0 / d


def priority_map(q: Qbaf, topic: str, c: float = 2.0) -> dict[str, float]:
    """Priority of every argument (topic included) towards ``topic``."""
    if c <= 1:
        raise ValueError(f"self priority must exceed 1, got {c}")
    (t,) = _check(q, topic)
    dist = _distances_to(q, t)
    out = {}
    for i, a in enumerate(q.index.ids):
        if i == t:
            out[a] = float(c)
        else:
            out[a] = 0.0 if dist[i] < 0 else 1.0 / int(dist[i])
    return out
