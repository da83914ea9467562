import io
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from orthohide import bounds, commutant
from orthohide import ppt_lp as pl
from orthohide.errors import ResourceLimitError, ShapeError
from orthohide.simplex import solve_lp


def highs_primal(d, k):
    """Same primal, solved by HiGHS."""
    lp = pl.build_primal(d, k)
    a = lp.constraint_matrix
    n = 4**k
    res = linprog(-lp.objective, A_ub=np.vstack([a, -a]),
                  b_ub=np.concatenate([np.ones(n), np.zeros(n)]),
                  bounds=[(0, 1)] * n, method="highs")
    assert res.status == 0
    return -res.fun


@pytest.mark.parametrize("d,value", [(2, 1.0), (10, 0.6)])
def test_primal_k1(d, value):
    sol = solve_lp(pl.build_primal(d, 1))
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(value, abs=1e-12)


@pytest.mark.parametrize("d", range(2, 31))
def test_k1_is_half_plus_inverse_d(d):
    assert abs(pl.ppt_norm(d, 1).value - (0.5 + 1 / d)) <= 1e-9


@pytest.mark.parametrize("d", range(2, 11))
def test_k1_exact(d):
    r = pl.ppt_norm(d, 1, exact=True)
    assert r.value == Fraction(1, 2) + Fraction(1, d)
    assert r.dual == r.value


def test_slater_point_is_strictly_feasible():
    for d in (2, 3, 7):
        for k in (1, 2, 3):
            c = pl.slater_point(k)
            out = commutant.kron_apply(commutant.pt_matrix(d).T, c, k)
            assert np.allclose(out, 0.5, atol=1e-12)


def test_l1_objective_examples():
    assert pl.l1_objective(np.zeros(4), 2, 1) == pytest.approx(1.0)
    assert pl.l1_objective(pl.ansatz_x0(2), 2, 1) == pytest.approx(1.0)
    assert pl.l1_objective(pl.ansatz_x0(5), 5, 1) == pytest.approx(0.7)
    _, rbar = commutant.r_vectors(4)
    assert pl.l1_objective(np.zeros(64), 4, 3) == pytest.approx(np.abs(rbar).sum() ** 3)


def test_l1_objective_exact_ansatz():
    for d in range(2, 11):
        assert pl.l1_objective(pl.ansatz_x0(d, exact=True), d, 1) == Fraction(1, 2) + Fraction(1, d)


def test_l1_objective_shape():
    with pytest.raises(ShapeError):
        pl.l1_objective(np.zeros(5), 3, 1)


@pytest.mark.parametrize("d", [2, 3, 5, 10])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_strong_duality(d, k):
    primal = solve_lp(pl.build_primal(d, k))
    dual = solve_lp(pl.build_dual_l1(d, k))
    assert primal.status == dual.status == "optimal"
    assert abs(primal.value - dual.value) <= 1e-7


@pytest.mark.parametrize("d,k", [(3, 2), (3, 3), (5, 3), (10, 2), (12, 3)])
def test_against_highs(d, k):
    assert pl.ppt_norm(d, k).value == pytest.approx(highs_primal(d, k), abs=1e-9)


@pytest.mark.parametrize("d", [3, 8, 12])
def test_k4_symmetric_against_highs_full(d):
    r = pl.ppt_norm(d, 4)
    assert r.status == "optimal"
    assert r.value == pytest.approx(highs_primal(d, 4), abs=1e-9)
    assert r.duality_gap <= 1e-7


@pytest.mark.parametrize("d", [2, 3, 6])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_symmetric_reduction_same_optimum(d, k):
    full = solve_lp(pl.build_primal(d, k)).value
    sym = solve_lp(pl.build_primal_symmetric(d, k)).value
    assert sym == pytest.approx(full, abs=1e-10)


def test_factor_orbits():
    orbit_of, reps, sizes = pl.factor_orbits(3)
    assert len(reps) == 20  # C(3+3, 3)
    assert sizes.sum() == 64
    # permuted multi-indices share an orbit
    assert orbit_of[0 * 16 + 1 * 4 + 2] == orbit_of[2 * 16 + 1 * 4 + 0]
    assert orbit_of[0] != orbit_of[1]


def test_symmetric_certificate_feasible_bound():
    primal = solve_lp(pl.build_primal_symmetric(5, 4))
    x = pl.dual_certificate(primal, 4, symmetric=True)
    assert x.shape == (256,)
    assert pl.l1_objective(x, 5, 4) == pytest.approx(primal.value, abs=1e-9)


def test_full_certificate_k3():
    primal = solve_lp(pl.build_primal(3, 3))
    assert pl.l1_objective(pl.dual_certificate(primal), 3, 3) == pytest.approx(primal.value, abs=1e-9)


def test_exact_k2():
    r = pl.ppt_norm(3, 2, exact=True)
    assert r.value == Fraction(7, 9)
    assert r.duality_gap == 0
    assert float(pl.ppt_norm(4, 2, exact=True).value) == pytest.approx(pl.ppt_norm(4, 2).value, abs=1e-12)


def test_exact_limits():
    with pytest.raises(ResourceLimitError):
        pl.ppt_norm(11, 1, exact=True)
    with pytest.raises(ResourceLimitError):
        pl.ppt_norm(3, 3, exact=True)


def test_dual_lp_size_limit():
    with pytest.raises(ResourceLimitError):
        pl.build_dual_l1(3, 5)


@pytest.mark.parametrize("d", range(3, 13))
def test_below_parity_bound(d):
    for k in range(1, 5):
        assert pl.ppt_norm(d, k).value <= bounds.parity_upper_bound(d, k) + 1e-9


@pytest.mark.parametrize("d", [3, 5, 10])
def test_decay_k3_below_k1(d):
    assert pl.ppt_norm(d, 3).value < pl.ppt_norm(d, 1).value


def test_regression_values():
    # cross-checked with HiGHS
    assert pl.ppt_norm(3, 3).value == pytest.approx(0.7244084362139919, abs=1e-9)
    assert pl.ppt_norm(5, 2).value == pytest.approx(0.565, abs=1e-9)
    assert pl.ppt_norm(12, 4).value == pytest.approx(0.1717938515279831, abs=1e-9)


def test_k5_runs():
    r = pl.ppt_norm(4, 5)
    assert r.status == "optimal" and r.duality_gap <= 1e-7
    assert r.value < pl.ppt_norm(4, 4).value


def test_bad_dual_method():
    with pytest.raises(ValueError):
        pl.ppt_norm(3, 1, dual="sdp")


def test_lp_text_roundtrip():
    lp = pl.build_primal(3, 2)
    buf = io.StringIO()
    pl.write_lp(lp, buf)
    text = buf.getvalue()
    back = pl.read_lp(text)
    assert np.array_equal(back.constraint_matrix, lp.constraint_matrix)
    assert np.array_equal(back.objective, lp.objective)
    assert back.sense == "maximize"
    assert solve_lp(back).value == solve_lp(lp).value
    again = io.StringIO()
    pl.write_lp(pl.build_primal(3, 2), again)
    assert again.getvalue() == text


def test_lp_text_exact_and_dual():
    buf = io.StringIO()
    pl.write_lp(pl.build_primal(3, 1, exact=True), buf)
    assert "1/3" in buf.getvalue()
    buf = io.StringIO()
    pl.write_lp(pl.build_dual_l1(3, 1), buf)
    back = pl.read_lp(buf.getvalue())
    assert back.sense == "minimize"
    assert solve_lp(back).value == pytest.approx(5 / 6, abs=1e-12)
