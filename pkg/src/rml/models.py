"""Exact MIP models over the triple universe.

* minimum-size linearization (routing variables ``u`` per monomial, activation ``v``)
* finite big-M bounds on optimal dual multipliers
* best-bound MIP: the dual of the RML LP with ``lambda <= M v`` and ``sum v <= k``
* exact MIP for binary-domain instances
* QCP export with one bilinear equality per triple
"""

from __future__ import annotations

import logging
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import (
    Domain,
    IndexSet,
    MlpInstance,
    Triple,
    TripleSet,
    TripleUniverse,
    build_universe,
    derivations,
    eta,
    index_key,
    is_proper,
    triple_set,
)
from .errors import DomainError, ImproperTripleSetError, InfeasibleError
from .relax import (
    ENV_B_MATRIX,
    build_rml_lp,
    lp_bound,
    var_name,
)
from .solver import LpModel, SolverConfig, Status, export_lp_format, solve_lp, solve_mip

log = logging.getLogger(__name__)

BIG_M_WARN = 1e12


def _add_routing(model: LpModel, mlp: MlpInstance, universe: TripleUniverse) -> tuple[list[int], dict]:
    """Binary v per universe triple and u per (monomial, triple) with the covering rows."""
    v = [model.add_var(f"v_{k + 1}", 0, 1, 0.0, integer=True) for k in range(len(universe))]
    u: dict[tuple[int, Triple], int] = {}
    for i, (mono, ts) in enumerate(zip(mlp.monomials, universe.per_monomial)):
        if mono.degree < 2:
            continue
        for t in ts:
            u[i, t] = model.add_var(f"u_{i + 1}_{universe.index(t) + 1}", 0, 1, 0.0, integer=True)
        heads: dict[IndexSet, list[int]] = defaultdict(list)
        tails: dict[IndexSet, list[int]] = defaultdict(list)
        for t in ts:
            heads[t.head].append(u[i, t])
            for S in t.tails():
                tails[S].append(u[i, t])
        model.add_row(f"top_{i + 1}", {c: 1.0 for c in heads[mono.vars]}, "=", 1.0)
        for J in sorted(heads, key=index_key):
            if J == mono.vars:
                continue
            row = {c: 1.0 for c in heads[J]}
            for c in tails[J]:
                row[c] = row.get(c, 0.0) - 1.0
            model.add_row(f"flow_{i + 1}_{var_name(J, 's')}", row, "=", 0.0)
        for t in ts:
            model.add_row(f"link_{i + 1}_{universe.index(t) + 1}", {u[i, t]: 1.0, v[universe.index(t)]: -1.0}, "<=", 0.0)
    return v, u


def build_minlin_mip(mlp: MlpInstance, universe: TripleUniverse | None = None) -> LpModel:
    """min sum v subject to every monomial being built from active triples."""
    universe = universe or build_universe(mlp)
    model = LpModel(sense="min")
    v, u = _add_routing(model, mlp, universe)
    for c in v:
        model.obj[c] = 1.0
    model.meta.update(kind="minlin", universe=universe, v=v, u=u)
    return model


def routing_start(model: LpModel, mlp: MlpInstance, T: Iterable[Triple]) -> dict[int, float]:
    """Integer column values realizing the proper set ``T`` in a routed model."""
    T = triple_set(T)
    paths = derivations(T, mlp)
    if paths is None:
        raise ImproperTripleSetError("warm start is not proper")
    universe = model.meta["universe"]
    start = {c: 0.0 for c in model.meta["v"]}
    start.update({c: 0.0 for c in model.meta["u"].values()})
    for i, ts in enumerate(paths):
        for t in ts:
            start[model.meta["u"][i, t]] = 1.0
    # triples outside every derivation are still active
    for t in T:
        start[model.meta["v"][universe.index(t)]] = 1.0
    return start


@dataclass
class MinlinSolution:
    triple_set: TripleSet
    routing: list[TripleSet]
    objective: int
    status: str
    bound: float = math.nan
    runtime: float = 0.0
    nodes: int = 0


def _status(res) -> str:
    if res.status == Status.OPTIMAL:
        return "optimal"
    if res.status == Status.TIME_LIMIT and res.x is not None:
        return "feasible"
    if res.status == Status.TIME_LIMIT:
        return "time_limit"
    return "infeasible"


def _active(model: LpModel, x: np.ndarray) -> TripleSet:
    universe = model.meta["universe"]
    return triple_set(t for t, c in zip(universe.all, model.meta["v"]) if x[c] > 0.5)


def solve_minlin(
    mlp: MlpInstance,
    time_limit: float = 30.0,
    warm: Iterable[Triple] | None = None,
    config: SolverConfig | None = None,
) -> MinlinSolution:
    t0 = time.perf_counter()
    model = build_minlin_mip(mlp)
    start = routing_start(model, mlp, warm) if warm is not None else None
    res = solve_mip(model, config, warm=start, time_limit=time_limit)
    if res.x is None:
        raise InfeasibleError(f"minimum linearization: no solution ({res.status.value})")
    T = _active(model, res.x)
    routing = [
        triple_set(t for (i, t), c in model.meta["u"].items() if i == k and res.x[c] > 0.5)
        for k in range(mlp.m)
    ]
    return MinlinSolution(
        triple_set=T,
        routing=routing,
        objective=len(T),
        status=_status(res),
        bound=res.bound,
        runtime=time.perf_counter() - t0,
        nodes=res.nodes,
    )


@dataclass
class DualBounds:
    m_t: dict[Triple, tuple[float, float, float]]
    m_j: dict[IndexSet, float]
    warnings: list[str] = field(default_factory=list)


def dual_bounds(mlp: MlpInstance, universe: TripleUniverse | None = None) -> DualBounds:
    """Finite bounds on optimal dual multipliers, built tier by tier in |J|."""
    universe = universe or build_universe(mlp)
    e = eta(mlp)
    beta = mlp.beta()
    by_head: dict[IndexSet, list[Triple]] = defaultdict(list)
    by_tail: dict[IndexSet, list[tuple[Triple, int]]] = defaultdict(list)
    for t in universe.all:
        by_head[t.head].append(t)
        by_tail[t.tail1].append((t, 0))
        by_tail[t.tail2].append((t, 1))
    sets = sorted(set(universe.index_sets) | {(j,) for j in mlp.used_variables()}, key=index_key)
    warnings: list[str] = []
    R: dict[IndexSet, float] = {}
    m12: dict[Triple, list[float]] = {t: [0.0, 0.0] for t in universe.all}
    for J in sets:  # increasing cardinality: heads are settled before their tails are used
        r = beta.get(J, 0.0) + e + sum(m12[t][0] + m12[t][1] for t in by_head.get(J, ()))
        if not math.isfinite(r):
            raise OverflowError(f"big-M for {J} overflowed")
        if r < 0.0:
            warnings.append(f"negative bound {r:g} for {J} clamped to 0")
            r = 0.0
        if r > BIG_M_WARN:
            warnings.append(f"big-M {r:g} for {J} exceeds {BIG_M_WARN:g}")
        R[J] = r
        # triples using J as a tail inherit R_J before their (larger) heads are reached
        for t, pos in by_tail.get(J, ()):
            m12[t][pos] = r
    for w in warnings:
        log.warning(w)
    return DualBounds(
        m_t={t: (m12[t][0], m12[t][1], e) for t in universe.all},
        m_j={J: e for J in sets},
        warnings=warnings,
    )


def build_bestbound_mip(
    mlp: MlpInstance,
    k: int,
    M: DualBounds | None = None,
    universe: TripleUniverse | None = None,
) -> LpModel:
    """max -sum lambda_3 - sum mu over dual-feasible multipliers gated by v, |v| <= k."""
    universe = universe or build_universe(mlp)
    M = M or dual_bounds(mlp, universe)
    beta = mlp.beta()
    model = LpModel(sense="max")
    v, u = _add_routing(model, mlp, universe)
    model.add_row("card", {c: 1.0 for c in v}, "<=", float(k))
    sets = sorted(M.m_j, key=index_key)
    lam = []
    for idx, t in enumerate(universe.all):
        cols = []
        for r in range(3):
            bound = M.m_t[t][r]
            c = model.add_var(f"lam{r + 1}_{idx + 1}", 0.0, bound, -1.0 if r == 2 else 0.0)
            model.add_row(f"gate{r + 1}_{idx + 1}", {c: 1.0, v[idx]: -bound}, "<=", 0.0)
            cols.append(c)
        lam.append(tuple(cols))
    mu = {J: model.add_var(var_name(J, "mu"), 0.0, M.m_j[J], -1.0) for J in sets}
    rows: dict[IndexSet, dict[int, float]] = {J: {mu[J]: 1.0} for J in sets}
    for t, cols in zip(universe.all, lam):
        for J, col in zip((t.tail1, t.tail2, t.head), range(3)):
            row = rows[J]
            for r in range(3):
                a = ENV_B_MATRIX[r][col]
                if a:
                    row[cols[r]] = row.get(cols[r], 0.0) + a
    for J in sets:
        model.add_row(var_name(J, "dual"), rows[J], ">=", -beta.get(J, 0.0))
    model.meta.update(kind="bestbound", universe=universe, v=v, u=u, lam=lam, mu=mu, k=k)
    return model


@dataclass
class BestBoundSolution:
    triple_set: TripleSet
    bound: float
    mip_objective: float
    status: str
    runtime: float = 0.0
    nodes: int = 0


def solve_bestbound(
    mlp: MlpInstance,
    k: int,
    warm: Iterable[Triple] | None = None,
    time_limit: float = 30.0,
    config: SolverConfig | None = None,
) -> BestBoundSolution:
    t0 = time.perf_counter()
    model = build_bestbound_mip(mlp, k)
    start = None
    if warm is not None:
        warm = triple_set(warm)
        if len(warm) > k:
            raise ValueError(f"warm start has {len(warm)} triples but k = {k}")
        start = routing_start(model, mlp, warm)
    res = solve_mip(model, config, warm=start, time_limit=time_limit)
    if res.x is None:
        raise InfeasibleError(f"best-bound MIP: no solution for k = {k} ({res.status.value})")
    T = _active(model, res.x)
    return BestBoundSolution(
        triple_set=T,
        bound=lp_bound(mlp, T, config),
        mip_objective=res.objective,
        status=_status(res),
        runtime=time.perf_counter() - t0,
        nodes=res.nodes,
    )


def bestbound_fixed(mlp: MlpInstance, T: Iterable[Triple], k: int | None = None, M: DualBounds | None = None):
    """Value of the best-bound MIP with its integer columns pinned to ``T``."""
    T = triple_set(T)
    model = build_bestbound_mip(mlp, len(T) if k is None else k, M)
    lb, ub = np.array(model.lb), np.array(model.ub)
    for c, val in routing_start(model, mlp, T).items():
        lb[c] = ub[c] = val
    return solve_lp(model, lb=lb, ub=ub)


def build_binary_exact_mip(mlp: MlpInstance, T: Iterable[Triple]) -> LpModel:
    """RML rows with integral singleton columns: exact on the binary cube."""
    if mlp.domain != Domain.BINARY:
        raise DomainError("exact MIP requires a binary-domain instance")
    model = build_rml_lp(mlp, T)
    for J, c in model.meta["col"].items():
        if len(J) == 1:
            model.integer[c] = True
    return model


def solve_binary(mlp: MlpInstance, T: Iterable[Triple], time_limit: float = 30.0, config: SolverConfig | None = None):
    model = build_binary_exact_mip(mlp, T)
    res = solve_mip(model, config, time_limit=time_limit)
    x = None
    if res.x is not None:
        x = [0] * mlp.n
        for J, c in model.meta["col"].items():
            if len(J) == 1:
                x[J[0]] = int(round(res.x[c]))
    return res, x


def export_qcp(mlp: MlpInstance, T: Iterable[Triple]) -> str:
    """LP-format text with one bilinear equality ``y_S = y_A * y_B`` per triple."""
    T = triple_set(T)
    if not is_proper(T, mlp):
        raise ImproperTripleSetError("triple set is not proper")
    beta = mlp.beta()
    model = LpModel(sense="min")
    sets = sorted({(j,) for j in mlp.used_variables()} | {S for t in T for S in (t.tail1, t.tail2, t.head)}
                  | set(beta), key=index_key)
    for J in sets:
        model.add_var(var_name(J), 0.0, 1.0, beta.get(J, 0.0))
    quad = [
        (f"prod_{k + 1}", [(-1.0, var_name(t.head))], [(1.0, var_name(t.tail1), var_name(t.tail2))], "=", 0.0)
        for k, t in enumerate(T)
    ]
    return export_lp_format(model, quad)
