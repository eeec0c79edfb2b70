from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import wasserstein_distance

from conftest import PSI_B1, TRUNC_GEO_3
from countmech import InputError, all_distances, build_weight_matrix, count_error, distribution_distance
from countmech.metrics import (
    analytic_output_variance,
    fixed_point_output_variance,
    validate_row_wise_concentrating,
    validate_row_wise_convex,
)


def test_distances_on_point_masses():
    assert all_distances([1, 0], [0, 1]) == {"wasserstein1": 1.0, "ks": 1.0, "tv": 1.0}
    assert distribution_distance([1, 0, 0], [0, 0, 1]) == 2
    z = [0.2, 0.3, 0.5]
    assert all(v == 0 for v in all_distances(z, z).values())


def test_distance_errors():
    with pytest.raises(InputError):
        distribution_distance([1, 0], [1, 0, 0])
    with pytest.raises(InputError):
        distribution_distance([1, 0], [0, 1], "l2")


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12).flatmap(lambda n: st.tuples(
    st.lists(st.floats(0.01, 1), min_size=n, max_size=n),
    st.lists(st.floats(0.01, 1), min_size=n, max_size=n))))
def test_wasserstein_matches_scipy(pair):
    a = np.asarray(pair[0]) / sum(pair[0])
    b = np.asarray(pair[1]) / sum(pair[1])
    support = np.arange(a.size)
    expected = wasserstein_distance(support, support, a, b)
    assert distribution_distance(a, b) == pytest.approx(expected, abs=1e-12)


def test_weight_matrices():
    W = build_weight_matrix("ead", [F(1, 2), F(1, 2)])
    assert W.tolist() == [[0, F(1, 2)], [F(1, 2), 0]]
    M = build_weight_matrix("mse", [F(1, 3)] * 3)
    assert M[0, 2] == F(4, 3)
    with pytest.raises(InputError):
        build_weight_matrix("abs", [1.0])


@pytest.mark.parametrize("kind", ["ead", "mse"])
def test_standard_weights_pass_validators(kind):
    W = build_weight_matrix(kind, np.random.default_rng(0).dirichlet(np.ones(9)))
    assert validate_row_wise_concentrating(W)
    assert validate_row_wise_convex(W)


def test_validators_reject():
    W = np.array([[0, 2, 1], [0, 0, 0], [0, 0, 0]])
    assert not validate_row_wise_concentrating(W)
    assert not validate_row_wise_convex(np.array([[0, 2, 3], [0, 0, 0], [0, 0, 0]]))
    zero = np.zeros((3, 3))
    assert validate_row_wise_concentrating(zero) and validate_row_wise_convex(zero)


def test_count_error_values():
    W = build_weight_matrix("ead", [F(1, 3)] * 3)
    assert count_error(W, np.eye(3, dtype=int).astype(object)) == 0
    # hand expansion: (1/3) * (1/2 + 2/3 + 1/2)
    assert count_error(W, TRUNC_GEO_3) == F(5, 9)
    with pytest.raises(InputError):
        count_error(W, np.eye(2))


def test_output_variance():
    zeta = np.full(4, 0.25)
    assert np.allclose(analytic_output_variance(zeta, np.eye(4), 50), 0)
    T = np.full((4, 4), 0.25)
    assert np.allclose(analytic_output_variance(zeta, T, 50), (0.25 - 1 / 16) / 50)


def test_fixed_point_variance_agrees_with_general_form():
    zeta = [F(1, 3)] * 3
    assert list(fixed_point_output_variance(zeta, PSI_B1, 7)) == \
        list(analytic_output_variance(zeta, PSI_B1, 7))
