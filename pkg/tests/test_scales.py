from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import B1, B2, B4, fr
from countmech import CapacityError, InputError, PrivacyParam, enumerate_scales, scale_from_pattern
from countmech.scales import (
    psi_affinely_simplified,
    psi_linearly_simplified,
    row_weights_closed_form,
    single_peaked_pattern,
    single_peaked_scale,
    solve_row_weights,
)

PSI_3 = fr([["4/7", "2/5", "1/4", "1/7"], ["2/7", "1/5", "1/2", "2/7"], ["1/7", "2/5", "1/4", "4/7"]])


@pytest.mark.parametrize("pat, expected", [
    ((-1, -1), (F(4, 7), F(2, 7), F(1, 7))),
    ((1, -1), (F(1, 4), F(1, 2), F(1, 4))),
    ((1, 1), (F(1, 7), F(2, 7), F(4, 7))),
])
def test_scale_from_pattern(lam2, pat, expected):
    assert tuple(scale_from_pattern(pat, lam2)) == expected


def test_bad_pattern(lam2):
    with pytest.raises(InputError):
        scale_from_pattern((1, 0), lam2)


def test_enumerate_scales_n3_canonical_order(lam2):
    psi = enumerate_scales(3, lam2)
    assert psi.k == 4
    assert np.array_equal(psi.matrix, PSI_3)


def test_enumerate_scales_sizes(lam2):
    assert enumerate_scales(1, lam2).matrix.tolist() == [[1]]
    assert enumerate_scales(11, lam2).k == 1024
    with pytest.raises(CapacityError):
        enumerate_scales(30, lam2)


def test_float_scales_sum_to_one_in_log_space():
    p = PrivacyParam.from_epsilon(5.0)
    s = scale_from_pattern((-1,) * 199, p)
    assert s.sum() == pytest.approx(1.0)
    assert s[0] > s[1] > 0


def test_single_peaked_patterns(lam2):
    assert single_peaked_pattern(0, 3) == (-1, -1)
    assert single_peaked_pattern(1, 3) == (1, -1)
    assert single_peaked_pattern(4, 5) == (1, 1, 1, 1)
    with pytest.raises(InputError):
        single_peaked_pattern(3, 3)
    assert int(np.argmax(single_peaked_scale(2, 5, lam2))) == 2


def test_row_weights_n3(lam2):
    assert list(solve_row_weights(3, lam2)) == [F(7, 6), F(2, 3), F(7, 6)]
    assert list(solve_row_weights(1, lam2)) == [1]


@pytest.mark.parametrize("n", [2, 3, 4, 7])
@pytest.mark.parametrize("lam", [F(3, 2), 2, 3])
def test_closed_form_matches_exact_solve(n, lam):
    p = PrivacyParam.from_lambda(lam)
    assert list(row_weights_closed_form(n, p)) == list(solve_row_weights(n, p))


def test_row_weights_reconstruct_ones(lam2):
    n = 6
    omega = solve_row_weights(n, lam2)
    total = sum(omega[l] * single_peaked_scale(l, n, lam2) for l in range(n))
    assert list(total) == [1] * n


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 40), eps=st.floats(0.05, 6.0))
def test_float_closed_form_matches_float_solve(n, eps):
    p = PrivacyParam.from_epsilon(eps)
    closed = row_weights_closed_form(n, p)
    sigma = np.column_stack([single_peaked_scale(l, n, p) for l in range(n)])
    assert np.allclose(sigma @ closed, 1.0, rtol=1e-10)


class TestSimplified:
    def test_named_vertex_is_affinely_simplified(self, uniform3):
        assert psi_affinely_simplified(B1, uniform3, PSI_3)
        assert psi_affinely_simplified(B2, uniform3, PSI_3)

    def test_midpoint_is_not(self, uniform3):
        mid = (B1 + B2) / 2
        assert not psi_affinely_simplified(mid, uniform3, PSI_3)

    def test_single_entry_columns(self, uniform3):
        B = fr([[1, 0, 0], [0, 0, 0], [0, 1, 0], [0, 0, 1]])
        assert psi_affinely_simplified(B, uniform3, PSI_3)

    def test_linear(self):
        assert psi_linearly_simplified(B4, PSI_3)
        repeated = fr([[1, 1, 0], [0, 0, 0], [0, 0, 0], [0, 0, 0]])
        assert not psi_linearly_simplified(repeated, PSI_3)
        assert psi_linearly_simplified(fr([[0] * 3] * 4), PSI_3)

    def test_shape_check(self, uniform3):
        with pytest.raises(InputError):
            psi_affinely_simplified(fr([[1, 0, 0]] * 3), uniform3, PSI_3)
