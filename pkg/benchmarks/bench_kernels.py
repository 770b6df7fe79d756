"""Compare the numba kernels with their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Micro-benchmarks call both implementations in-process.  The end-to-end
section runs each workload in a fresh interpreter with RML_NUMBA=1 and
RML_NUMBA=0, so the environment switch itself is what gets measured.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from rml.instances import gen_mult
from rml.kernel3 import (
    CoverGraph,
    adversarial_bipartite,
    build_cover_graph,
    cover_masks,
    first_cover_nb,
    first_cover_np,
)
from rml.solver.kernels import pivot_nb, pivot_np


def time_call(fn, repeat: int) -> float:
    """Best-of-``repeat`` seconds per call."""
    return min(timeit.repeat(fn, repeat=repeat, number=1))


def bench_pivot(repeat: int) -> list[dict]:
    rows = []
    rng = np.random.default_rng(0)
    for m, n in ((100, 300), (400, 1200), (1300, 2700)):
        T = rng.normal(size=(m, n))
        beta = rng.normal(size=m)
        d = rng.normal(size=n)
        out = {"kernel": "pivot", "size": f"{m}x{n}"}
        for name, fn in (("numba", pivot_nb), ("numpy", pivot_np)):
            fn(T.copy(), beta.copy(), d.copy(), 1, 2)  # compile
            best = float("inf")
            # a pivot zeroes its column, so every timed call needs a fresh tableau
            for _ in range(repeat * 5):
                args = (T.copy(), beta.copy(), d.copy())
                t0 = time.perf_counter()
                fn(*args, 1, 2)
                best = min(best, time.perf_counter() - t0)
            out[name] = best
        rows.append(out)
    return rows


def bench_cover(repeat: int) -> list[dict]:
    rows = []
    cases = [
        ("mult3 n=9 m=16", build_cover_graph(gen_mult(9, 16, 3, 5))),
        ("mult3 n=9 m=18", build_cover_graph(gen_mult(9, 18, 3, 1))),
    ]
    for k in (6, 8):
        B, V, U = adversarial_bipartite(k)
        pos = {x: i for i, x in enumerate(V + U)}
        adj_v = {(pos[v], len(pos)): {tuple(sorted((pos[u], len(pos)))) for u in B[v]} for v in V}
        adj_u: dict = {}
        for v, us in adj_v.items():
            for u in us:
                adj_u.setdefault(u, set()).add(v)
        cases.append((f"adversary k={k}", CoverGraph(adj_u, adj_v)))
    for label, g in cases:
        us, masks, full = cover_masks(g)
        # time the search at the optimum size, the expensive final round
        r = next(r for r in range(1, len(us) + 1) if first_cover_nb(masks, full, r).size)
        out = {"kernel": "first_cover", "size": f"{label} (|U|={len(us)}, r={r})"}
        for name, fn in (("numba", first_cover_nb), ("numpy", first_cover_np)):
            fn(masks, full, r)
            out[name] = time_call(lambda: fn(masks, full, r), repeat)
        rows.append(out)
    return rows


E2E = {
    "lp_bound full mult3 n=12 m=30": (
        "from rml.instances import gen_mult; from rml import lp_bound, full_linearize\n"
        "m = gen_mult(12, 30, 3, 1); lp_bound(m, full_linearize(m))"
    ),
    "minlin vision g=3": (
        "from rml.instances import gen_vision; from rml.models import solve_minlin\n"
        "solve_minlin(gen_vision(3, 0))"
    ),
    "min cover mult3 n=9 m=18": (
        "from rml.instances import gen_mult; from rml.kernel3 import build_cover_graph, min_cover_bruteforce\n"
        "min_cover_bruteforce(build_cover_graph(gen_mult(9, 18, 3, 1)), guard=40)"
    ),
}


def bench_end_to_end(repeat: int) -> list[dict]:
    rows = []
    for label, stmt in E2E.items():
        out = {"kernel": "end-to-end", "size": label}
        for name, flag in (("numba", "1"), ("numpy", "0")):
            code = (
                "import time\n"
                f"exec({stmt!r})\n"  # warm-up: compilation and imports
                f"best = min((lambda t: (exec({stmt!r}), time.perf_counter() - t)[1])(time.perf_counter())"
                f" for _ in range({repeat}))\n"
                "print(best)"
            )
            env = dict(os.environ, RML_NUMBA=flag)
            res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
            out[name] = float(res.stdout.strip().splitlines()[-1])
        rows.append(out)
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the rows to this file")
    ap.add_argument("--skip-e2e", action="store_true")
    a = ap.parse_args()
    rows = bench_pivot(a.repeat) + bench_cover(a.repeat)
    if not a.skip_e2e:
        rows += bench_end_to_end(max(1, a.repeat // 2))
    print(f"{'kernel':<12} {'case':<44} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for r in rows:
        print(f"{r['kernel']:<12} {r['size']:<44} {r['numba'] * 1e3:>10.3f} {r['numpy'] * 1e3:>10.3f}"
              f" {r['numpy'] / r['numba']:>8.2f}")
    if a.json:
        with open(a.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
