"""Independent reference implementations used only by the tests.

Nothing here calls into the evaluation kernels: strengths are recomputed from
the textbook formulas over plain dictionaries.
"""

from __future__ import annotations

import itertools
import math

from qbafx import Qbaf


def agg(sem, att, sup):
    if sem == "dfquad":
        return math.prod(1 - x for x in att) - math.prod(1 - x for x in sup)
    return sum(sup) - sum(att)


def infl(sem, t, e):
    if sem == "dfquad":
        return t - t * abs(e) if e <= 0 else t + (1 - t) * e
    if sem == "qe":
        sq = e * e / (1 + e * e)
        return t - t * sq if e <= 0 else t + (1 - t) * sq
    return 1 - (1 - t * t) / (1 + t * math.exp(e))


def naive_strengths(q: Qbaf, sem: str, tol: float = 1e-13, max_iter: int = 200_000) -> dict[str, float]:
    """Jacobi iteration on dictionaries until the change drops below ``tol``."""
    att = {a: [s for s, t in q.attacks if t == a] for a in q.arguments}
    sup = {a: [s for s, t in q.supports if t == a] for a in q.arguments}
    s = dict(q.base_scores)
    for _ in range(max_iter):
        nxt = {
            a: min(1.0, max(0.0, infl(sem, q.base_scores[a], agg(sem, [s[b] for b in att[a]], [s[b] for b in sup[a]]))))
            for a in q.arguments
        }
        diff = max((abs(nxt[a] - s[a]) for a in s), default=0.0)
        s = nxt
        if diff <= tol:
            return s
    raise RuntimeError("oracle did not converge")


def delete(q: Qbaf, keep: set[str]) -> Qbaf:
    """Sub-QBAF induced by ``keep`` (a fresh object, not a mask)."""
    return Qbaf.build(
        {a: q.base_scores[a] for a in keep},
        [e for e in q.attacks if e[0] in keep and e[1] in keep],
        [e for e in q.supports if e[0] in keep and e[1] in keep],
    )


def permutation_shapley(q: Qbaf, sem: str, topic: str) -> dict[str, float]:
    """Average marginal contribution over every ordering of the other arguments."""
    players = [a for a in q.arguments if a != topic]
    totals = dict.fromkeys(players, 0.0)
    count = 0
    for order in itertools.permutations(players):
        present: set[str] = {topic}
        prev = naive_strengths(delete(q, present), sem)[topic]
        for p in order:
            present.add(p)
            cur = naive_strengths(delete(q, present), sem)[topic]
            totals[p] += cur - prev
            prev = cur
        count += 1
    return {p: v / max(count, 1) for p, v in totals.items()}


def walk_polarity(q: Qbaf, source: str, target: str) -> str:
    """Polarity from parities of all walks up to length 2n (layered DP).

    The product graph over (argument, parity) has 2n states, so any parity
    reachable at all is reachable within 2n steps.
    """
    n = len(q.arguments)
    edges = [(s, t, 1) for s, t in q.attacks] + [(s, t, 0) for s, t in q.supports]
    frontier = {(source, 0)}
    seen_at_target = set()
    for _ in range(2 * n):
        nxt = set()
        for s, t, odd in edges:
            for node, par in frontier:
                if node == s:
                    nxt.add((t, par ^ odd))
        for node, par in nxt:
            if node == target:
                seen_at_target.add(par)
        frontier = nxt
        if not frontier:
            break
    if not seen_at_target:
        return "neutral"
    if seen_at_target == {0}:
        return "positive"
    if seen_at_target == {1}:
        return "negative"
    return "unknown"


def has_cycle_colour(q: Qbaf) -> bool:
    """Three-colour DFS cycle check."""
    succ = {a: [] for a in q.arguments}
    for s, t in list(q.attacks) + list(q.supports):
        succ[s].append(t)
    colour = dict.fromkeys(q.arguments, 0)

    def visit(u):
        colour[u] = 1
        for v in succ[u]:
            if colour[v] == 1 or (colour[v] == 0 and visit(v)):
                return True
        colour[u] = 2
        return False

    return any(colour[a] == 0 and visit(a) for a in q.arguments)
