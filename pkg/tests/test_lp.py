from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from countmech import Infeasible, InputError, PrivacyParam, Unbounded, solve_lp
from countmech.constructors import fixed_point_lp


def test_single_bound():
    res = solve_lp([1], A_ub=[[-1]], b_ub=[-1], exact=True)
    assert res.x.tolist() == [1] and res.fun == 1


def test_equality():
    res = solve_lp([1, 1], A_eq=[[1, 1]], b_eq=[1], exact=True)
    assert res.fun == 1 and sum(res.x) == 1


def test_infeasible():
    with pytest.raises(Infeasible):
        solve_lp([1], A_ub=[[-1], [1]], b_ub=[-1, 0], exact=True)
    with pytest.raises(Infeasible):
        solve_lp([1], A_ub=[[-1], [1]], b_ub=[-1, 0], method="highs")


def test_unbounded():
    with pytest.raises(Unbounded):
        solve_lp([-1, 0], A_ub=[[1, -1]], b_ub=[0])


def test_free_and_upper_bounds():
    # min -x - y, x <= 2, -1 <= y <= 3, x + y <= 4 ; optimum -4
    res = solve_lp([-1, -1], A_ub=[[1, 1]], b_ub=[4], bounds=[(None, 2), (-1, 3)], exact=True)
    assert res.fun == -4
    assert res.x[0] <= 2 and -1 <= res.x[1] <= 3


def test_exact_returns_fractions():
    res = solve_lp([F(1, 3), 1], A_eq=[[1, 2]], b_eq=[F(1, 2)], exact=True)
    assert res.fun == F(1, 6)
    assert all(isinstance(v, F) for v in res.x)


def test_bad_shapes():
    with pytest.raises(InputError):
        solve_lp([1, 1], A_eq=[[1, 1, 1]], b_eq=[1])
    with pytest.raises(InputError):
        solve_lp([1], method="interior")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_float_simplex_matches_highs(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(2, 6), rng.integers(2, 7)
    A = rng.normal(size=(m, n))
    x0 = rng.random(n)
    b = A @ x0 + rng.random(m)
    c = rng.normal(size=n)
    bounds = [(0, 3)] * n
    ours = solve_lp(c, A_ub=A, b_ub=b, bounds=bounds)
    ref = solve_lp(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    assert ours.fun == pytest.approx(ref.fun, abs=1e-8)


def test_exact_matches_float_on_rational_data():
    rng = np.random.default_rng(4)
    A = rng.integers(-4, 5, size=(4, 5))
    b = A @ np.ones(5) + 2
    c = rng.integers(-3, 4, size=5)
    exact = solve_lp(c.tolist(), A_ub=A.tolist(), b_ub=b.tolist(), bounds=(0, 4), exact=True)
    ref = solve_lp(c, A_ub=A, b_ub=b, bounds=(0, 4), method="highs")
    assert float(exact.fun) == pytest.approx(ref.fun, abs=1e-9)


@pytest.mark.parametrize("n", [5, 12, 21])
def test_degenerate_count_lp_matches_highs(n):
    p = PrivacyParam.from_epsilon(0.4)
    z = np.random.default_rng(n).dirichlet(np.ones(n))
    W = z[:, None] * np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    c, A_eq, b_eq, A_ub, b_ub = fixed_point_lp(z, p, W)
    ours = solve_lp(c, A_eq, b_eq, A_ub, b_ub)
    ref = solve_lp(c, A_eq, b_eq, A_ub, b_ub, method="highs")
    assert ours.fun == pytest.approx(ref.fun, rel=1e-9, abs=1e-12)
