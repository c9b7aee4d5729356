"""Pure-Python evaluation kernels; mirrors ``_kernels.pyx`` line for line.

Arrays follow the CSR layout of :class:`qbafx.core.GraphIndex`. ``active`` is a
uint8 mask: inactive nodes are pinned at strength 0, which is exactly deletion
for all three aggregation functions (a zero-strength parent contributes nothing).
"""

from __future__ import annotations

import math

DFQUAD = 0
QE = 1
REB = 2


def aggregate(sem, att, sup):
    if sem == DFQUAD:
        pa = 1.0
        for s in att:
            pa *= 1.0 - s
        ps = 1.0
        for s in sup:
            ps *= 1.0 - s
        return pa - ps
    return sum(sup) - sum(att)


def influence(sem, base, e):
    if sem == DFQUAD:
        v = base - base * abs(e) if e <= 0.0 else base + (1.0 - base) * e
    elif sem == QE:
        sq = e * e / (1.0 + e * e)
        v = base - base * sq if e <= 0.0 else base + (1.0 - base) * sq
    elif e == 0.0:
        v = base  # algebraically exact; the general form leaves rounding error
    else:
        v = 1.0 - (1.0 - base * base) / (1.0 + base * math.exp(e))
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


def _node(sem, j, tau, ptr, src, sign, cur):
    if sem == DFQUAD:
        pa = 1.0
        ps = 1.0
        for k in range(ptr[j], ptr[j + 1]):
            if sign[k] < 0:
                pa *= 1.0 - cur[src[k]]
            else:
                ps *= 1.0 - cur[src[k]]
        e = pa - ps
    else:
        e = 0.0
        for k in range(ptr[j], ptr[j + 1]):
            e += cur[src[k]] * sign[k]
    return influence(sem, tau[j], e)


def propagate_acyclic(sem, tau, order, in_ptr, in_src, in_sign, active, out):
    """Exact evaluation in topological ``order``; writes into ``out``."""
    tau_l = tau.tolist()
    ptr = in_ptr.tolist()
    src = in_src.tolist()
    sign = in_sign.tolist()
    act = active.tolist()
    cur = [0.0] * len(tau_l)
    for j in order.tolist():
        if act[j]:
            cur[j] = _node(sem, j, tau_l, ptr, src, sign, cur)
    out[:] = cur


def propagate_fixed_point(sem, tau, in_ptr, in_src, in_sign, active, tol, max_iter, out):
    """Synchronous sweeps from the base scores; returns ``(sweeps, last_max_change)``."""
    tau_l = tau.tolist()
    ptr = in_ptr.tolist()
    src = in_src.tolist()
    sign = in_sign.tolist()
    act = active.tolist()
    n = len(tau_l)
    cur = [tau_l[j] if act[j] else 0.0 for j in range(n)]
    nodes = [j for j in range(n) if act[j]]
    it = 0
    diff = 0.0
    while it < max_iter:
        nxt = cur[:]
        diff = 0.0
        for j in nodes:
            v = _node(sem, j, tau_l, ptr, src, sign, cur)
            d = abs(v - cur[j])
            if d > diff:
                diff = d
            nxt[j] = v
        cur = nxt
        it += 1
        if diff <= tol:
            break
    out[:] = cur
    return it, diff


def residual(sem, tau, in_ptr, in_src, in_sign, active, strengths):
    """max_j |influence(tau_j, aggregate(parents under strengths)) - strengths_j| over active j."""
    tau_l = tau.tolist()
    ptr = in_ptr.tolist()
    src = in_src.tolist()
    sign = in_sign.tolist()
    cur = strengths.tolist()
    worst = 0.0
    for j, a in enumerate(active.tolist()):
        if a:
            d = abs(_node(sem, j, tau_l, ptr, src, sign, cur) - cur[j])
            if d > worst:
                worst = d
    return worst
