import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy import stats

from conftest import TRUNC_GEO_3
from countmech import (
    InputError,
    PrivacyParam,
    calibrate_sigma,
    default_gamma,
    discrete_gaussian_mechanism,
    in_U,
    staircase_mechanism,
    truncated_geometric_matrix,
)
from countmech.baselines import (
    BaselineSpec,
    discrete_gaussian_matrix,
    discrete_gaussian_sampler,
    round_half_away,
    staircase_cdf,
    staircase_matrix,
    staircase_sampler,
)


def folded_geometric(lam, n):
    """Two-sided geometric noise clamped to {0..n-1}, summed term by term."""
    a = 1 / F(lam)
    norm = (1 - a) / (1 + a)
    tail = lambda m: a ** m / (1 + a)  # P(Y >= m) for m >= 1
    T = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            if j == 0:
                T[i, j] = tail(i) if i > 0 else 1 - tail(1)
            elif j == n - 1:
                m = n - 1 - i
                T[i, j] = tail(m) if m > 0 else 1 - tail(1)
            else:
                T[i, j] = norm * a ** abs(i - j)
    return T


def staircase_density(x, eps, gamma):
    b = math.exp(-eps)
    a = (1 - b) / (2 * gamma + 2 * b * (1 - gamma))
    m = abs(x)
    k = math.floor(m)
    return a * b ** k if m - k < gamma else a * b ** (k + 1)


class TestTruncatedGeometric:
    def test_n3_lambda2(self, lam2):
        T = truncated_geometric_matrix(lam2, 3)
        assert np.array_equal(T, TRUNC_GEO_3)
        assert in_U(T, lam2)

    @pytest.mark.parametrize("lam, n", [(F(3, 2), 5), (2, 4), (3, 7)])
    def test_against_folded_tails(self, lam, n):
        T = truncated_geometric_matrix(PrivacyParam.from_lambda(lam), n)
        assert np.array_equal(T, folded_geometric(lam, n))

    def test_large_epsilon_is_identity(self):
        T = truncated_geometric_matrix(PrivacyParam.from_epsilon(60.0), 4)
        assert np.allclose(T, np.eye(4))


class TestStaircase:
    def test_default_gamma(self):
        assert default_gamma(1.0) == pytest.approx(1 / (1 + math.exp(0.5)))

    def test_rounding_ties_away(self):
        assert round_half_away([0.5, -0.5, 1.49, -2.5]).tolist() == [1, -1, 1, -3]

    @pytest.mark.parametrize("eps, gamma", [(1.0, None), (0.5, 0.3), (2.0, 0.9)])
    def test_cdf_matches_density_integral(self, eps, gamma):
        g = default_gamma(eps) if gamma is None else gamma
        # piecewise-constant density: sum length * value over its pieces
        cuts = sorted({s * (k + d) for k in range(80) for d in (0.0, g) for s in (-1, 1)})
        for x in (-3.7, -1.2, -0.1, 0.0, 0.4, 2.25, 5.5):
            edges = [c for c in cuts if c < x] + [x]
            mass = sum((b - a) * staircase_density((a + b) / 2, eps, g) for a, b in zip(edges[:-1], edges[1:]))
            assert staircase_cdf(x, eps, gamma) == pytest.approx(mass, abs=1e-9)

    def test_density_ratio_respects_epsilon(self):
        eps, g = 0.8, 0.3
        xs = np.linspace(-5, 5, 2001)
        ratio = [staircase_density(x, eps, g) / staircase_density(x + 1, eps, g) for x in xs]
        assert max(ratio) <= math.exp(eps) * (1 + 1e-12)

    def test_sampler_matches_cdf(self):
        draws = staircase_sampler(1.0, None, seed=0, size=50_000)
        res = stats.kstest(draws, lambda x: staircase_cdf(x, 1.0))
        assert res.pvalue > 1e-3

    def test_matrix_matches_sampling(self):
        counts = np.full(100_000, 3)
        out = staircase_mechanism(counts, 1.0, None, 8, seed=2)
        emp = np.bincount(out, minlength=8) / counts.size
        assert np.allclose(emp, staircase_matrix(1.0, None, 8)[3], atol=6e-3)

    def test_matrix_rows_sum_to_one(self):
        T = staircase_matrix(0.5, 0.4, 10)
        assert np.allclose(T.sum(axis=1), 1.0) and T.min() >= 0

    def test_bad_gamma(self):
        with pytest.raises(InputError):
            staircase_sampler(1.0, 1.5)


class TestDiscreteGaussian:
    def test_calibration(self):
        assert calibrate_sigma(1.0, 1e-5) == pytest.approx(math.sqrt(2 * math.log(1.25e5)))
        with pytest.raises(InputError):
            calibrate_sigma(1.0, 1.0)

    def test_variance_and_symmetry(self):
        x = discrete_gaussian_sampler(20.0, seed=1, size=200_000)
        assert x.dtype.kind == "i"
        assert np.var(x) == pytest.approx(400.0, rel=0.02)
        assert abs(x.mean()) < 0.2

    def test_pmf(self):
        sigma = 1.5
        x = discrete_gaussian_sampler(sigma, seed=4, size=300_000)
        ys = np.arange(-12, 13)
        w = np.exp(-ys ** 2 / (2 * sigma ** 2))
        w /= w.sum()
        emp = np.array([(x == y).mean() for y in ys])
        assert np.allclose(emp, w, atol=4e-3)

    def test_small_sigma_is_identity(self):
        counts = np.arange(5).repeat(400)
        out = discrete_gaussian_mechanism(counts, 0.01, 5, seed=0)
        assert (out == counts).mean() > 0.999

    def test_matrix_matches_sampling(self):
        counts = np.full(100_000, 1)
        out = discrete_gaussian_mechanism(counts, 2.0, 6, seed=9)
        emp = np.bincount(out, minlength=6) / counts.size
        assert np.allclose(emp, discrete_gaussian_matrix(2.0, 6)[1], atol=6e-3)


def test_baseline_spec():
    T = BaselineSpec("truncated-geometric", 3, epsilon=math.log(2)).matrix()
    assert np.allclose(T, TRUNC_GEO_3.astype(float))
    with pytest.raises(InputError):
        BaselineSpec("laplace", 3)
