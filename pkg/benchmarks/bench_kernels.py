"""Compare the compiled and pure-Python evaluation kernels.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json out.json]

Times the raw propagation kernels on generated trees and cyclic graphs, then
one end-to-end counterfactual search per backend (the backend is swapped on
the evaluator module for the duration of the run).
"""

from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from qbafx import CexQuery, EvalConfig, SolverConfig, solve, topic_strength
from qbafx import semantics as sem_mod
from qbafx.generators import CyclicSpec, TreeSpec, gen_cyclic, gen_tree
from qbafx.kernels import available_backends
from qbafx.semantics import Evaluator


def _cases():
    for w, d in [(2, 5), (2, 8), (4, 5)]:
        spec = TreeSpec(w, d, seed=1)
        yield spec.describe(), gen_tree(spec), spec.topic
    for n in (50, 200):
        q, topic = gen_cyclic(CyclicSpec(n, n, seed=1))
        yield CyclicSpec(n, n).describe(), q, topic


def _kernel_time(mod, ev: Evaluator, tau: np.ndarray, repeat: int) -> float:
    out = np.empty(ev.size)
    act = np.ones(ev.size, dtype=np.uint8)
    code = ev.sem.code
    if ev.acyclic:
        call = lambda: mod.propagate_acyclic(code, tau, ev.order, ev.in_ptr, ev.in_src, ev.in_sign, act, out)  # noqa: E731
    else:
        call = lambda: mod.propagate_fixed_point(  # noqa: E731
            code, tau, ev.in_ptr, ev.in_src, ev.in_sign, act, 1e-6, 10_000, out
        )
    return min(timeit.repeat(call, number=1, repeat=repeat))


def _solve_time(mod, q, topic: str, repeat: int) -> float:
    saved = sem_mod._k
    sem_mod._k = mod
    try:
        cur = topic_strength(q, "qe", topic)
        query = CexQuery(topic, 0.9 if cur < 0.5 else 0.1, delta=0.1)
        return min(timeit.repeat(lambda: solve(q, "qe", query, SolverConfig()), number=1, repeat=repeat))
    finally:
        sem_mod._k = saved


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the python backend is available")
    rows = []
    for name, q, topic in _cases():
        for sem in ("dfquad", "qe", "reb"):
            ev = Evaluator(q, sem, EvalConfig())
            tau = q.tau_array()
            times = {b: _kernel_time(m, ev, tau, args.repeat) for b, m in backends.items()}
            rows.append({"case": name, "what": f"kernel/{sem}", **times})
        times = {b: _solve_time(m, q, topic, max(1, args.repeat // 2)) for b, m in backends.items()}
        rows.append({"case": name, "what": "solve/qe", **times})

    names = list(backends)
    header = f"{'case':<20} {'what':<14}" + "".join(f"{b + ' (ms)':>14}" for b in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for r in rows:
        line = f"{r['case']:<20} {r['what']:<14}" + "".join(f"{r[b] * 1e3:>14.4f}" for b in names)
        if len(names) == 2:
            line += f"{r['python'] / r['cython']:>9.1f}x"
        print(line)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
