"""RML linear relaxation, its dual, bound evaluation and gap metrics.

Each triple ``t = (A, B, S)`` contributes three envelope rows over
``(y_A, y_B, y_S)``::

    -y_A        + y_S <= 1 - v_t
          -y_B  + y_S <= 1 - v_t
     y_A  + y_B - y_S <= 2 - v_t

With ``v_t = 1`` these are the McCormick inequalities; with ``v_t = 0`` they
hold for every point of the unit cube, so inactive rows can be dropped.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .core import (
    IndexSet,
    MlpInstance,
    Triple,
    TripleUniverse,
    build_universe,
    eta,
    index_key,
    is_proper,
    triple_set,
)
from .errors import ImproperTripleSetError, SolverError
from .solver import LpModel, SolverConfig, Status, export_lp_format, solve_lp

ENV_B = np.array([1.0, 1.0, 2.0])
ENV_C = np.array([-1.0, -1.0, -1.0])
# rows of B over (y_tail1, y_tail2, y_head)
ENV_B_MATRIX = np.array([[-1.0, 0.0, 1.0], [0.0, -1.0, 1.0], [1.0, 1.0, -1.0]])


def var_name(J: IndexSet, prefix: str = "y") -> str:
    return prefix + "_" + "_".join(str(j + 1) for j in J)


def _check_proper(mlp: MlpInstance, T: Iterable[Triple]) -> tuple[Triple, ...]:
    T = triple_set(T)
    if not is_proper(T, mlp):
        raise ImproperTripleSetError("triple set is not proper")
    return T


def lp_index_sets(mlp: MlpInstance, T: Iterable[Triple]) -> list[IndexSet]:
    """Singletons of used variables, every head/tail of ``T`` and every monomial support."""
    sets: set[IndexSet] = {(j,) for j in mlp.used_variables()}
    for t in T:
        sets.update((t.tail1, t.tail2, t.head))
    sets.update(mono.vars for mono in mlp.monomials)
    return sorted(sets, key=index_key)


def _layout(mlp, active, gated, universe):
    active = _check_proper(mlp, active)
    if gated:
        universe = universe or build_universe(mlp)
        triples = list(universe.all)
        sets = sorted(set(universe.index_sets) | {(j,) for j in mlp.used_variables()}, key=index_key)
    else:
        triples = list(active)
        sets = lp_index_sets(mlp, active)
    on = set(active)
    vhat = [1.0 if t in on else 0.0 for t in triples]
    return triples, sets, vhat


def build_rml_lp(
    mlp: MlpInstance,
    active: Iterable[Triple],
    gated: bool = False,
    universe: TripleUniverse | None = None,
) -> LpModel:
    """Minimization LP over y in [0,1] for the proper triple set ``active``.

    With ``gated`` every universe triple gets its rows with rhs ``b + c v``;
    otherwise only the active triples appear.
    """
    triples, sets, vhat = _layout(mlp, active, gated, universe)
    beta = mlp.beta()
    model = LpModel(sense="min")
    col = {}
    for J in sets:
        col[J] = model.add_var(var_name(J), 0.0, 1.0, beta.get(J, 0.0))
    for k, (t, v) in enumerate(zip(triples, vhat)):
        cols = (col[t.tail1], col[t.tail2], col[t.head])
        for r in range(3):
            coeffs = {c: a for c, a in zip(cols, ENV_B_MATRIX[r]) if a}
            model.add_row(f"env{r + 1}_{k + 1}", coeffs, "<=", ENV_B[r] + ENV_C[r] * v)
    model.meta.update(kind="rml", triples=triples, vhat=vhat, sets=sets, col=col)
    return model


def build_dual(
    mlp: MlpInstance,
    active: Iterable[Triple],
    gated: bool = False,
    universe: TripleUniverse | None = None,
) -> LpModel:
    """Maximization over lambda, mu >= 0 with one constraint per index set."""
    triples, sets, vhat = _layout(mlp, active, gated, universe)
    beta = mlp.beta()
    model = LpModel(sense="max")
    lam = []
    for k, (t, v) in enumerate(zip(triples, vhat)):
        cost = -(ENV_B + ENV_C * v)
        lam.append(tuple(model.add_var(f"lam{r + 1}_{k + 1}", 0.0, math.inf, cost[r]) for r in range(3)))
    mu = {J: model.add_var(var_name(J, "mu"), 0.0, math.inf, -1.0) for J in sets}
    rows: dict[IndexSet, dict[int, float]] = {J: {mu[J]: 1.0} for J in sets}
    for t, (l1, l2, l3) in zip(triples, lam):
        for J, coeffs in ((t.tail1, ((l1, -1.0), (l3, 1.0))), (t.tail2, ((l2, -1.0), (l3, 1.0))),
                          (t.head, ((l1, 1.0), (l2, 1.0), (l3, -1.0)))):
            row = rows[J]
            for c, a in coeffs:
                row[c] = row.get(c, 0.0) + a
    for J in sets:
        model.add_row(var_name(J, "dual"), rows[J], ">=", -beta.get(J, 0.0))
    model.meta.update(kind="rml_dual", triples=triples, vhat=vhat, sets=sets, lam=lam, mu=mu)
    return model


def _dump(model: LpModel) -> str:
    fd, path = tempfile.mkstemp(prefix="rml_failed_", suffix=".lp")
    with os.fdopen(fd, "w") as fh:
        fh.write(export_lp_format(model))
    return path


def solve_checked(model: LpModel, config: SolverConfig | None = None):
    try:
        res = solve_lp(model, config)
    except SolverError as exc:
        raise SolverError(str(exc), _dump(model)) from None
    if res.status != Status.OPTIMAL:
        raise SolverError(f"LP ended with status {res.status.value}", _dump(model))
    return res


def lp_bound(mlp: MlpInstance, T: Iterable[Triple], config: SolverConfig | None = None) -> float:
    """Optimal value of the RML relaxation for ``T``; always within [-eta, 0]."""
    return solve_checked(build_rml_lp(mlp, T), config).objective


def bound_report(mlp: MlpInstance, T: Iterable[Triple], config: SolverConfig | None = None) -> dict:
    model = build_rml_lp(mlp, T)
    res = solve_checked(model, config)
    return {
        "bound": res.objective,
        "eta": eta(mlp),
        "n_vars": model.n_vars,
        "n_rows": model.n_rows,
        "status": res.status.value,
    }


@dataclass
class DualSolution:
    lam: dict[Triple, np.ndarray]
    mu: dict[IndexSet, float]
    objective: float


def solve_dual(
    mlp: MlpInstance,
    active: Iterable[Triple],
    gated: bool = False,
    config: SolverConfig | None = None,
) -> DualSolution:
    model = build_dual(mlp, active, gated)
    res = solve_checked(model, config)
    meta = model.meta
    lam = {t: res.x[list(cols)].copy() for t, cols in zip(meta["triples"], meta["lam"])}
    mu = {J: float(res.x[c]) for J, c in meta["mu"].items()}
    return DualSolution(lam, mu, res.objective)


def dual_objective(
    lam: Mapping[Triple, np.ndarray], mu: Mapping[IndexSet, float], active: Iterable[Triple]
) -> float:
    on = set(active)
    total = 0.0
    for t, lt in lam.items():
        v = 1.0 if t in on else 0.0
        total -= float(np.dot(ENV_B + ENV_C * v, lt))
    return total - sum(mu.values())


def dual_slack(
    mlp: MlpInstance, lam: Mapping[Triple, np.ndarray], mu: Mapping[IndexSet, float]
) -> dict[IndexSet, float]:
    """Left-hand side minus zero of every dual constraint; feasible iff all >= 0."""
    beta = mlp.beta()
    lhs = {J: beta.get(J, 0.0) + m for J, m in mu.items()}
    for t, (l1, l2, l3) in lam.items():
        for J, val in ((t.tail1, l3 - l1), (t.tail2, l3 - l2), (t.head, l1 + l2 - l3)):
            lhs[J] = lhs.get(J, beta.get(J, 0.0)) + val
    return lhs


def shift_multipliers(
    lam: Mapping[Triple, np.ndarray],
    mu: Mapping[IndexSet, float],
    t: Triple,
    active: Iterable[Triple] = (),
) -> tuple[dict[Triple, np.ndarray], dict[IndexSet, float]]:
    """Move the multipliers of an inactive triple onto mu of its three sets.

    Feasibility and the dual objective are unchanged.
    """
    if t in set(active):
        raise ValueError(f"triple {t} is active; only inactive multipliers can be shifted")
    lam2 = {s: np.array(v, dtype=float) for s, v in lam.items()}
    mu2 = dict(mu)
    l1, l2, l3 = lam2.get(t, np.zeros(3))
    for J, inc in ((t.tail1, l3), (t.tail2, l3), (t.head, l1 + l2)):
        mu2[J] = mu2.get(J, 0.0) + inc
    if t in lam2:
        lam2[t] = np.zeros(3)
    return lam2, mu2


def root_node_gap(f_full: float, f_alg: float) -> float:
    return (f_full - f_alg) / max(abs(f_full), 1e-3) * 100.0


def opt_gap(f_ub: float, f_lb: float) -> float:
    return (f_ub - f_lb) / max(abs(f_ub), 1e-3) * 100.0
