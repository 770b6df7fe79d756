"""Best-first branch-and-bound over the dual simplex."""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .model import LpModel, SolveResult, SolverConfig, Status
from .simplex import DualSimplex, LpData


@dataclass
class _Node:
    bound: float
    depth: int
    lb: np.ndarray
    ub: np.ndarray
    basis: tuple | None


def _integral_objective(model: LpModel) -> bool:
    """True when every feasible objective value is an integer."""
    for c, is_int in zip(model.obj, model.integer):
        if c == 0.0:
            continue
        if not is_int or not float(c).is_integer():
            return False
    return float(model.obj_offset).is_integer()


def solve_mip(
    model: LpModel,
    config: SolverConfig | None = None,
    warm: np.ndarray | dict | None = None,
    time_limit: float | None = None,
) -> SolveResult:
    """Branch-and-bound: best-bound node selection, most-fractional branching.

    ``warm`` is either a full column vector or a mapping ``{column: value}``
    fixing integer columns; it seeds the incumbent when feasible.
    """
    cfg = config or SolverConfig()
    limit = cfg.time_limit if time_limit is None else time_limit
    t0 = time.perf_counter()
    deadline = t0 + limit
    data = LpData(model)
    engine = DualSimplex(data, cfg)
    sign = data.sign  # internal minimization of sign * obj
    is_int = np.asarray(model.integer, dtype=bool)
    int_idx = np.flatnonzero(is_int)
    lb0 = np.asarray(model.lb, dtype=float)
    ub0 = np.asarray(model.ub, dtype=float)
    round_bound = _integral_objective(model)

    inc_x: np.ndarray | None = None
    inc_val = math.inf  # internal (minimization) value
    nodes = 0
    iters = 0

    def tighten(val: float) -> float:
        if round_bound:
            return math.ceil(val - 1e-6)
        return val

    def internal(res: SolveResult) -> float:
        return sign * (res.objective)

    def fractional(x: np.ndarray) -> int:
        if int_idx.size == 0:
            return -1
        vals = x[int_idx]
        frac = np.abs(vals - np.round(vals))
        k = int(np.argmax(frac))
        if frac[k] <= cfg.int_tol:
            return -1
        # most fractional: distance to nearest integer closest to 0.5
        score = np.minimum(vals - np.floor(vals), np.ceil(vals) - vals)
        return int(int_idx[int(np.argmax(score))])

    def accept(x: np.ndarray, val: float) -> None:
        nonlocal inc_x, inc_val
        if val < inc_val - 1e-12:
            xr = x.copy()
            xr[int_idx] = np.round(xr[int_idx])
            inc_x, inc_val = xr, val

    def gap_abs() -> float:
        return cfg.gap_tol * max(1.0, abs(inc_val)) if math.isfinite(inc_val) else 0.0

    def lp(lb, ub, basis):
        nonlocal iters
        budget = None if cfg.work_limit is None else max(0, cfg.work_limit - iters)
        res = engine.solve(lb, ub, basis, deadline=deadline, budget=budget)
        iters += res.iterations
        return res

    def out_of_work() -> bool:
        return cfg.work_limit is not None and iters >= cfg.work_limit

    # warm start seeds the incumbent
    if warm is not None:
        wl, wu = lb0.copy(), ub0.copy()
        if isinstance(warm, dict):
            for j, v in warm.items():
                wl[j] = wu[j] = v
        else:
            w = np.asarray(warm, dtype=float)
            wl[int_idx] = wu[int_idx] = np.round(w[int_idx])
        res = lp(wl, wu, None)
        if res.ok and fractional(res.x) < 0:
            accept(res.x, internal(res))

    root = lp(lb0, ub0, None)
    if root.status == Status.TIME_LIMIT:
        return _finish(model, Status.TIME_LIMIT, inc_x, inc_val, -math.inf, sign, nodes, iters, t0)
    if root.status in (Status.INFEASIBLE, Status.UNBOUNDED):
        # an unbounded relaxation (rational data) means the MIP is unbounded or infeasible
        return SolveResult(root.status, nodes=1, iterations=iters, runtime=time.perf_counter() - t0)

    counter = 0
    heap: list[tuple[float, int, int, _Node]] = []

    def push(node: _Node) -> None:
        nonlocal counter
        counter += 1
        # best bound first; deeper nodes break ties
        heapq.heappush(heap, (node.bound, -node.depth, counter, node))

    root_bound = tighten(internal(root))
    if cfg.dive and int_idx.size:
        _dive(root, lb0, ub0, lp, fractional, accept, internal, deadline, cfg)

    def branch(res: SolveResult, lb, ub, depth) -> None:
        j = fractional(res.x)
        if j < 0:
            accept(res.x, internal(res))
            return
        v = res.x[j]
        bnd = tighten(internal(res))
        down_ub = ub.copy()
        down_ub[j] = math.floor(v)
        up_lb = lb.copy()
        up_lb[j] = math.ceil(v)
        push(_Node(bnd, depth + 1, lb, down_ub, res.basis))
        push(_Node(bnd, depth + 1, up_lb, ub, res.basis))

    nodes = 1
    if root_bound < inc_val - gap_abs():
        branch(root, lb0, ub0, 0)
    global_bound = root_bound
    status = Status.OPTIMAL
    while heap:
        global_bound = heap[0][0]
        if global_bound >= inc_val - gap_abs():
            global_bound = min(global_bound, inc_val)
            heap.clear()
            break
        if time.perf_counter() > deadline or nodes >= cfg.max_nodes or out_of_work():
            status = Status.TIME_LIMIT
            break
        _, _, _, node = heapq.heappop(heap)
        nodes += 1
        res = lp(node.lb, node.ub, node.basis)
        if res.status == Status.TIME_LIMIT:
            status = Status.TIME_LIMIT
            push(node)
            global_bound = heap[0][0]
            break
        if res.status != Status.OPTIMAL:
            continue
        if tighten(internal(res)) >= inc_val - gap_abs():
            continue
        branch(res, node.lb, node.ub, node.depth)
    else:
        global_bound = inc_val if math.isfinite(inc_val) else global_bound

    if status == Status.OPTIMAL and inc_x is None:
        return SolveResult(Status.INFEASIBLE, nodes=nodes, iterations=iters, runtime=time.perf_counter() - t0)
    return _finish(model, status, inc_x, inc_val, global_bound, sign, nodes, iters, t0)


def _dive(root, lb0, ub0, lp, fractional, accept, internal, deadline, cfg, max_depth: int = 200):
    """Round-and-resolve dive from the root to find an early incumbent."""
    res, lb, ub = root, lb0.copy(), ub0.copy()
    for _ in range(max_depth):
        if time.perf_counter() > deadline:
            return
        j = fractional(res.x)
        if j < 0:
            accept(res.x, internal(res))
            return
        v = round(res.x[j])
        lb, ub = lb.copy(), ub.copy()
        lb[j] = ub[j] = v
        nxt = lp(lb, ub, res.basis)
        if not nxt.ok:
            # try the other side once
            alt = math.floor(res.x[j]) if v > res.x[j] else math.ceil(res.x[j])
            lb[j] = ub[j] = alt
            nxt = lp(lb, ub, res.basis)
            if not nxt.ok:
                return
        res = nxt


def _finish(model, status, inc_x, inc_val, bound, sign, nodes, iters, t0) -> SolveResult:
    if inc_x is None:
        return SolveResult(
            status, bound=sign * bound + model.obj_offset, nodes=nodes, iterations=iters,
            runtime=time.perf_counter() - t0,
        )
    return SolveResult(
        status,
        objective=sign * inc_val + model.obj_offset,
        x=inc_x,
        bound=sign * bound + model.obj_offset,
        nodes=nodes,
        iterations=iters,
        runtime=time.perf_counter() - t0,
    )
