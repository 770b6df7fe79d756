"""Row-oriented LP/MIP containers and solve results."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    TIME_LIMIT = "time_limit"


@dataclass
class SolverConfig:
    """All solver tolerances and limits in one place."""

    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    int_tol: float = 1e-6
    gap_tol: float = 1e-6
    pivot_tol: float = 1e-9
    time_limit: float = 30.0
    max_iter: int = 200_000
    max_nodes: int = 1_000_000
    refactor_every: int = 100
    stall_limit: int = 200
    dive: bool = True
    # total simplex iterations per MIP solve; unlike time_limit it is machine independent
    work_limit: int | None = None


@dataclass
class LpModel:
    """A linear model: named bounded columns, sparse rows, min or max sense.

    Rows are stored as ``(name, {col: coeff}, sense, rhs)`` with sense one of
    ``"<="``, ``">="``, ``"="``.
    """

    sense: str = "min"
    var_names: list[str] = field(default_factory=list)
    lb: list[float] = field(default_factory=list)
    ub: list[float] = field(default_factory=list)
    obj: list[float] = field(default_factory=list)
    integer: list[bool] = field(default_factory=list)
    row_names: list[str] = field(default_factory=list)
    rows: list[dict[int, float]] = field(default_factory=list)
    row_sense: list[str] = field(default_factory=list)
    rhs: list[float] = field(default_factory=list)
    obj_offset: float = 0.0
    meta: dict = field(default_factory=dict, repr=False)
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def add_var(
        self, name: str, lb: float = 0.0, ub: float = 1.0, obj: float = 0.0, integer: bool = False
    ) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        if integer and not (
            (math.isinf(lb) or float(lb).is_integer()) and (math.isinf(ub) or float(ub).is_integer())
        ):
            raise ValueError(f"integer variable {name!r} needs integer bounds")
        self._index[name] = len(self.var_names)
        self.var_names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.obj.append(float(obj))
        self.integer.append(bool(integer))
        return self._index[name]

    def var(self, name: str) -> int:
        return self._index[name]

    def add_row(
        self, name: str, coeffs: Mapping[int, float] | Iterable[tuple[int, float]], sense: str, rhs: float
    ) -> int:
        if sense not in ("<=", ">=", "="):
            raise ValueError(f"bad row sense {sense!r}")
        row: dict[int, float] = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for j, a in items:
            if not 0 <= j < len(self.var_names):
                raise IndexError(f"row {name!r} references unknown column {j}")
            row[j] = row.get(j, 0.0) + float(a)
        row = {j: a for j, a in row.items() if a != 0.0}
        self.row_names.append(name)
        self.rows.append(row)
        self.row_sense.append(sense)
        self.rhs.append(float(rhs))
        return len(self.rows) - 1

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def is_mip(self) -> bool:
        return any(self.integer)

    def dense(self) -> np.ndarray:
        A = np.zeros((self.n_rows, self.n_vars))
        for i, row in enumerate(self.rows):
            for j, a in row.items():
                A[i, j] = a
        return A

    def copy(self) -> "LpModel":
        out = LpModel(
            sense=self.sense,
            var_names=list(self.var_names),
            lb=list(self.lb),
            ub=list(self.ub),
            obj=list(self.obj),
            integer=list(self.integer),
            row_names=list(self.row_names),
            rows=[dict(r) for r in self.rows],
            row_sense=list(self.row_sense),
            rhs=list(self.rhs),
            obj_offset=self.obj_offset,
            meta=dict(self.meta),
        )
        out._index = dict(self._index)
        return out

    def objective_value(self, x: np.ndarray) -> float:
        return float(np.dot(self.obj, x)) + self.obj_offset

    def max_violation(self, x: np.ndarray) -> float:
        """Largest bound or row violation at ``x``."""
        x = np.asarray(x, dtype=float)
        viol = max(
            0.0,
            float(np.max(np.asarray(self.lb) - x, initial=0.0)),
            float(np.max(x - np.asarray(self.ub), initial=0.0)),
        )
        for row, sense, rhs in zip(self.rows, self.row_sense, self.rhs):
            act = sum(a * x[j] for j, a in row.items())
            if sense == "<=":
                viol = max(viol, act - rhs)
            elif sense == ">=":
                viol = max(viol, rhs - act)
            else:
                viol = max(viol, abs(act - rhs))
        return viol


# A MIP is an LpModel with integrality marks; the alias keeps signatures readable.
MipModel = LpModel


@dataclass
class SolveResult:
    status: Status
    objective: float = math.nan
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    bound: float = math.nan
    iterations: int = 0
    nodes: int = 0
    runtime: float = 0.0
    basis: tuple | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == Status.OPTIMAL

    def value(self, model: LpModel, name: str) -> float:
        return float(self.x[model.var(name)])
