"""Bounded-variable dual simplex on a dense tableau.

The model ``A x (<=,>=,=) b, lb <= x <= ub`` is put in the form
``[A I] (x, s) = b`` with sign-constrained slacks.  Starting from the slack
basis, every structural column sits at the bound its cost prefers, which is
dual feasible whenever that bound is finite; the dual simplex then restores
primal feasibility.  Branch-and-bound re-enters with the parent's basis after
tightening bounds, which keeps the basis dual feasible.
"""

from __future__ import annotations

import math
import time

import numpy as np
import scipy.linalg

from ..errors import SolverError
from . import kernels
from .model import LpModel, SolveResult, SolverConfig, Status


class LpData:
    """Dense arrays derived from an ``LpModel`` (internally a minimization)."""

    def __init__(self, model: LpModel):
        keep = [i for i, row in enumerate(model.rows) if row]
        for i, row in enumerate(model.rows):
            if not row:
                s, r = model.row_sense[i], model.rhs[i]
                if (s == "<=" and r < 0) or (s == ">=" and r > 0) or (s == "=" and r != 0):
                    self.trivially_infeasible = True
                    break
        else:
            self.trivially_infeasible = False
        self.kept_rows = np.array(keep, dtype=np.int64)
        self.n = model.n_vars
        self.m = len(keep)
        A = np.zeros((self.m, self.n))
        for k, i in enumerate(keep):
            for j, a in model.rows[i].items():
                A[k, j] = a
        self.M = np.hstack([A, np.eye(self.m)])
        self.b = np.array([model.rhs[i] for i in keep], dtype=float)
        self.sign = 1.0 if model.sense == "min" else -1.0
        c = np.zeros(self.n + self.m)
        c[: self.n] = self.sign * np.asarray(model.obj, dtype=float)
        self.c = c
        slack_lb = np.empty(self.m)
        slack_ub = np.empty(self.m)
        for k, i in enumerate(keep):
            s = model.row_sense[i]
            slack_lb[k] = 0.0 if s in ("<=", "=") else -np.inf
            slack_ub[k] = 0.0 if s in (">=", "=") else np.inf
        self.slack_lb = slack_lb
        self.slack_ub = slack_ub

    def bounds(self, lb, ub):
        return (
            np.concatenate([np.asarray(lb, dtype=float), self.slack_lb]),
            np.concatenate([np.asarray(ub, dtype=float), self.slack_ub]),
        )


class DualSimplex:
    def __init__(self, data: LpData, config: SolverConfig | None = None):
        self.data = data
        self.cfg = config or SolverConfig()

    def _factor(self, basic):
        B = self.data.M[:, basic]
        try:
            lu = scipy.linalg.lu_factor(B, check_finite=False)
        except (ValueError, np.linalg.LinAlgError) as exc:  # pragma: no cover
            raise SolverError(f"basis factorization failed: {exc}") from None
        if np.min(np.abs(np.diag(lu[0]))) < 1e-12:
            raise SolverError("singular basis")
        T = scipy.linalg.lu_solve(lu, self.data.M, check_finite=False)
        beta = scipy.linalg.lu_solve(lu, self.data.b, check_finite=False)
        d = self.data.c - self.data.c[basic] @ T
        T[np.abs(T) < 1e-13] = 0.0
        return T, beta, d

    def solve(self, lb, ub, basis=None, deadline: float | None = None, budget: int | None = None) -> SolveResult:
        """Infinite structural bounds are replaced by large artificial ones.

        A solution resting on an artificial bound is re-solved with a wider
        box; if the objective keeps improving the model is unbounded.
        """
        t0 = time.perf_counter()
        data, cfg = self.data, self.cfg
        if data.trivially_infeasible:
            return SolveResult(Status.INFEASIBLE, runtime=time.perf_counter() - t0)
        L, U = self.data.bounds(lb, ub)
        if np.any(L > U + cfg.feas_tol):
            return SolveResult(Status.INFEASIBLE, runtime=time.perf_counter() - t0)
        n = data.n
        art_lo, art_hi = np.isinf(L[:n]), np.isinf(U[:n])
        if not (art_lo.any() or art_hi.any()):
            return self._run(L, U, basis, deadline, t0, budget)
        finite = np.concatenate([np.abs(L[:n][~art_lo]), np.abs(U[:n][~art_hi]), np.abs(data.b), [1.0]])
        scale = float(finite.max())
        prev = None
        for big in (1e6 * scale, 1e9 * scale):
            La, Ua = L.copy(), U.copy()
            La[:n][art_lo] = -big
            Ua[:n][art_hi] = big
            res = self._run(La, Ua, basis, deadline, t0, budget)
            if res.status is not Status.OPTIMAL:
                return res
            x = res.x
            hit = (art_lo & (x <= -big * (1 - 1e-9))) | (art_hi & (x >= big * (1 - 1e-9)))
            if not hit.any():
                return res
            if prev is not None and res.objective * data.sign < prev - cfg.opt_tol * (1 + abs(prev)):
                return SolveResult(Status.UNBOUNDED, iterations=res.iterations, runtime=time.perf_counter() - t0)
            prev = res.objective * data.sign
            basis = res.basis
        # stuck on the wider box without further gain: an optimal face reaches far out
        return res

    def _run(self, L, U, basis, deadline, t0, budget=None) -> SolveResult:
        data, cfg = self.data, self.cfg
        m, N = data.m, data.n + data.m

        if basis is None:
            basic = np.arange(data.n, N, dtype=np.int64)
            upper_hint = np.zeros(N, dtype=np.bool_)
        else:
            basic = np.array(basis[0], dtype=np.int64)
            upper_hint = np.array(basis[1], dtype=np.bool_)

        T, beta, d = self._factor(basic)
        is_basic = np.zeros(N, dtype=np.bool_)
        is_basic[basic] = True
        at_upper = self._place(d, L, U, is_basic, upper_hint)
        x = np.where(at_upper, U, L)
        x[is_basic] = 0.0
        movable = (~is_basic) & (U > L)

        iters = 0
        since_refactor = 0
        bland = False
        best_obj = -math.inf
        stall = 0
        while True:
            xb = kernels.basic_values(T, beta, x, is_basic)
            obj = float(data.c[~is_basic] @ x[~is_basic] + data.c[basic] @ xb)
            if obj > best_obj + 1e-12:
                best_obj = obj
                stall = 0
            else:
                stall += 1
                if stall >= cfg.stall_limit:
                    bland = True
            r = kernels.leaving_row(xb, L[basic], U[basic], basic, cfg.feas_tol, bland)
            if r < 0:
                if since_refactor > 0:
                    # confirm optimality on a fresh factorization
                    T, beta, d = self._factor(basic)
                    since_refactor = 0
                    at_upper = self._place(d, L, U, is_basic, at_upper)
                    x = np.where(at_upper, U, L)
                    x[is_basic] = 0.0
                    continue
                break
            if iters >= cfg.max_iter:
                raise SolverError(f"dual simplex exceeded {cfg.max_iter} iterations")
            if (budget is not None and iters >= budget) or (
                deadline is not None and iters % 50 == 0 and time.perf_counter() > deadline
            ):
                return SolveResult(Status.TIME_LIMIT, iterations=iters, runtime=time.perf_counter() - t0)
            p = basic[r]
            direction = 1.0 if xb[r] < L[p] else -1.0
            q = kernels.entering_col(
                T[r], d, at_upper, movable, direction, cfg.pivot_tol, cfg.opt_tol, bland
            )
            if q < 0:
                if since_refactor > 0:
                    T, beta, d = self._factor(basic)
                    since_refactor = 0
                    continue
                return SolveResult(Status.INFEASIBLE, iterations=iters, runtime=time.perf_counter() - t0)
            kernels.pivot(T, beta, d, r, q)
            basic[r] = q
            is_basic[q] = True
            is_basic[p] = False
            movable[q] = False
            movable[p] = U[p] > L[p]
            at_upper[q] = False
            at_upper[p] = direction < 0
            x[p] = U[p] if direction < 0 else L[p]
            x[q] = 0.0
            iters += 1
            since_refactor += 1
            if since_refactor >= cfg.refactor_every:
                T, beta, d = self._factor(basic)
                since_refactor = 0

        xb = kernels.basic_values(T, beta, x, is_basic)
        x = x.copy()
        x[basic] = xb
        x = np.clip(x, L, U)
        # y_i = c_B B^{-1} e_i; the slack column of row i has zero cost.
        y = -d[data.n :]
        obj = float(data.c @ x)
        struct = x[: data.n]
        return SolveResult(
            Status.OPTIMAL,
            objective=data.sign * obj,
            x=struct,
            duals=data.sign * y,
            reduced_costs=data.sign * d[: data.n],
            bound=data.sign * obj,
            iterations=iters,
            runtime=time.perf_counter() - t0,
            basis=(basic.copy(), at_upper.copy()),
        )

    def _place(self, d, L, U, is_basic, hint):
        """Put each nonbasic column at the bound its reduced cost prefers."""
        tol = self.cfg.opt_tol
        at_upper = np.where(d < -tol, True, np.where(d > tol, False, hint))
        at_upper &= ~is_basic
        # infinite sides are never usable
        at_upper = np.where(np.isinf(U), False, at_upper)
        at_upper = np.where(np.isinf(L) & ~is_basic, True, at_upper)
        bad = (~is_basic) & (
            (at_upper & np.isinf(U)) | (~at_upper & np.isinf(L)) | ((d < -tol) & np.isinf(U)) | ((d > tol) & np.isinf(L))
        )
        if bad.any():
            j = int(np.flatnonzero(bad)[0])
            raise SolverError(f"column {j} has an infinite bound on its preferred side")
        return at_upper.astype(np.bool_)


def solve_lp(model: LpModel, config: SolverConfig | None = None, lb=None, ub=None, basis=None) -> SolveResult:
    """Solve the continuous relaxation of ``model``."""
    data = LpData(model)
    engine = DualSimplex(data, config)
    res = engine.solve(model.lb if lb is None else lb, model.ub if ub is None else ub, basis)
    if res.ok:
        res.objective += model.obj_offset
        res.bound = res.objective
        full = np.zeros(model.n_rows)
        full[data.kept_rows] = res.duals
        res.duals = full
    return res
