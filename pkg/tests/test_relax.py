import numpy as np
import pytest

from rml import build_universe, eta, full_linearize, greedy_linearize, is_proper, lp_bound, seq_linearize
from rml.core import Triple, build_universe
from rml.errors import ImproperTripleSetError
from rml.instances import gen_mult
from rml.relax import (
    bound_report,
    build_dual,
    build_rml_lp,
    dual_objective,
    dual_slack,
    opt_gap,
    root_node_gap,
    shift_multipliers,
    solve_checked,
    solve_dual,
)
from rml.solver import solve_lp

from conftest import random_proper, scipy_rml_bound


def test_identity_order_bound(cubics, order_1234):
    model = build_rml_lp(cubics, order_1234)
    assert model.n_vars == 10 and model.n_rows == 18
    assert lp_bound(cubics, order_1234) == pytest.approx(-4 / 3, abs=1e-9)


def test_order_3412_matches_oracle(cubics, order_3412):
    # the five-triple set from order 3412; the oracle decides its value independently
    assert lp_bound(cubics, order_3412) == pytest.approx(scipy_rml_bound(cubics, order_3412), abs=1e-9)


def test_order_3412_witness_point(cubics, order_3412):
    """A feasible point of that set with value -4/3, checked by hand."""
    model = build_rml_lp(cubics, order_3412)
    col = model.meta["col"]
    x = np.zeros(model.n_vars)
    vals = {(0,): 2 / 3, (1,): 2 / 3, (2,): 2 / 3, (3,): 1.0, (0, 2): 1 / 3, (2, 3): 2 / 3,
            (0, 1, 2): 0.0, (1, 2, 3): 2 / 3, (0, 2, 3): 2 / 3}
    for J, v in vals.items():
        x[col[J]] = v
    assert model.max_violation(x) <= 1e-12
    assert model.objective_value(x) == pytest.approx(-4 / 3)


def test_full_universe_bound(cubics, order_1234):
    full = full_linearize(cubics)
    b = lp_bound(cubics, full)
    assert -1 - 1e-9 <= b <= 1e-9
    assert b >= lp_bound(cubics, order_1234) - 1e-9
    assert b == pytest.approx(-1, abs=1e-9)


def test_improper_rejected(cubics, order_3412):
    with pytest.raises(ImproperTripleSetError):
        lp_bound(cubics, order_3412[1:])


def test_positive_coefficients_give_zero():
    mlp = gen_mult(6, 6, 3, 1)
    mlp = type(mlp).from_terms(mlp.n, [(abs(m.coeff), m.vars) for m in mlp.monomials])
    assert eta(mlp) == 0
    assert lp_bound(mlp, greedy_linearize(mlp)) == pytest.approx(0, abs=1e-9)


def test_bound_report(cubics, order_1234):
    rep = bound_report(cubics, order_1234)
    assert rep["n_vars"] == 10 and rep["eta"] == 2 and rep["status"] == "optimal"


@pytest.mark.parametrize("seed", range(15))
def test_bound_matches_scipy(seed):
    mlp = gen_mult(7, 8, 3 + seed % 2, seed)
    T = random_proper(mlp, np.random.default_rng(seed))
    assert lp_bound(mlp, T) == pytest.approx(scipy_rml_bound(mlp, T), abs=1e-7)


@pytest.mark.parametrize("seed", range(10))
def test_strong_duality_and_gated(seed):
    mlp = gen_mult(6, 6, 3, seed)
    T = random_proper(mlp, np.random.default_rng(seed))
    primal = lp_bound(mlp, T)
    assert solve_dual(mlp, T).objective == pytest.approx(primal, abs=1e-7)
    gated = solve_checked(build_rml_lp(mlp, T, gated=True)).objective
    assert gated == pytest.approx(primal, abs=1e-7)
    assert solve_dual(mlp, T, gated=True).objective == pytest.approx(primal, abs=1e-7)


def test_dual_duals_match_primal(cubics, order_1234):
    """Row duals of the primal give an objective equal to the bound."""
    res = solve_lp(build_rml_lp(cubics, order_1234))
    d = solve_dual(cubics, order_1234)
    assert d.objective == pytest.approx(res.objective, abs=1e-9)
    assert min(dual_slack(cubics, d.lam, d.mu).values()) >= -1e-9


def random_dual_point(mlp, rng):
    U = build_universe(mlp)
    lam = {t: rng.random(3) * rng.integers(0, 2, 3) for t in U.all}
    sets = set(U.index_sets) | {(j,) for j in mlp.used_variables()}
    mu = {J: 0.0 for J in sets}
    slack = dual_slack(mlp, lam, mu)
    mu = {J: max(0.0, -slack[J]) + rng.random() * 0.1 for J in sets}
    return lam, mu


@pytest.mark.parametrize("seed", range(10))
def test_shift_preserves_objective_and_feasibility(seed):
    mlp = gen_mult(6, 5, 3, seed)
    rng = np.random.default_rng(seed)
    T = random_proper(mlp, rng)
    lam, mu = random_dual_point(mlp, rng)
    assert min(dual_slack(mlp, lam, mu).values()) >= -1e-12
    obj = dual_objective(lam, mu, T)
    for t in list(lam):
        if t in set(T):
            continue
        lam, mu = shift_multipliers(lam, mu, t, T)
        assert abs(dual_objective(lam, mu, T) - obj) <= 1e-9
        assert min(dual_slack(mlp, lam, mu).values()) >= -1e-9
    assert all(not np.any(v) for t, v in lam.items() if t not in set(T))


def test_shift_refuses_active(cubics, order_1234):
    lam = {t: np.ones(3) for t in order_1234}
    with pytest.raises(ValueError):
        shift_multipliers(lam, {}, order_1234[0], order_1234)


@pytest.mark.parametrize("seed", range(8))
def test_monotone_in_added_triples(seed):
    mlp = gen_mult(6, 6, 3, seed)
    rng = np.random.default_rng(seed)
    T = list(random_proper(mlp, rng))
    b = lp_bound(mlp, T)
    for t in build_universe(mlp).all:
        if t not in T and rng.random() < 0.5:
            T.append(t)
            b2 = lp_bound(mlp, T)
            assert b2 >= b - 1e-9
            b = b2
    assert b <= lp_bound(mlp, full_linearize(mlp)) + 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_redundant_rows(seed):
    """Switching off rows of inactive triples never moves the bound."""
    mlp = gen_mult(6, 5, 3, seed)
    T = seq_linearize(mlp)
    base = build_rml_lp(mlp, T, gated=True)
    ref = solve_checked(base).objective
    vhat = base.meta["vhat"]
    inactive = [k for k, v in enumerate(vhat) if v == 0]
    rng = np.random.default_rng(seed)
    for _ in range(5):
        keep = set(rng.choice(inactive, size=len(inactive) // 2, replace=False).tolist()) if inactive else set()
        m = base.copy()
        for i in (3 * k + r for k in inactive if k not in keep for r in range(3)):
            m.rhs[i] = 10.0  # never binding on the unit box
        assert solve_checked(m).objective == pytest.approx(ref, abs=1e-7)


def test_gap_formulas():
    assert root_node_gap(-1.0, -4 / 3) == pytest.approx(100 / 3)
    assert root_node_gap(0.0, -0.5) == pytest.approx(0.5 / 1e-3 * 100)
    assert opt_gap(-2.0, -3.0) == pytest.approx(50.0)
