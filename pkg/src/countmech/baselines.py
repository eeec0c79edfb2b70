"""Unfixed baseline mechanisms: truncated geometric, staircase, discrete Gaussian.

Each baseline perturbs a single count and maps the result back into
``{0, ..., n-1}``.  The ``*_matrix`` functions give the induced transition
matrix so the baselines can be analysed with the same tools as the
constructors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._validation import check_positive_int, check_positive_real
from .core import PrivacyParam
from .exceptions import InputError

__all__ = [
    "BASELINES",
    "BaselineSpec",
    "truncated_geometric_matrix",
    "default_gamma",
    "staircase_sampler",
    "staircase_mechanism",
    "staircase_cdf",
    "staircase_matrix",
    "round_half_away",
    "calibrate_sigma",
    "discrete_gaussian_sampler",
    "discrete_gaussian_mechanism",
    "discrete_gaussian_matrix",
    "baseline_matrix",
]

BASELINES = ("truncated-geometric", "staircase", "discrete-gaussian")


@dataclass(frozen=True)
class BaselineSpec:
    """Parameters of one baseline.

    ``epsilon`` drives the geometric and staircase mechanisms, ``gamma`` the
    staircase shape, ``sigma``/``delta`` the discrete Gaussian.
    """

    kind: str
    n: int
    epsilon: float | None = None
    gamma: float | None = None
    sigma: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in BASELINES:
            raise InputError(f"unknown baseline {self.kind!r}; choose from {BASELINES}")
        check_positive_int(self.n, "n")
        if self.gamma is not None and not 0 <= self.gamma <= 1:
            raise InputError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.sigma is not None and not self.sigma > 0:
            raise InputError(f"sigma must be positive, got {self.sigma}")
        if self.delta is not None and not 0 < self.delta < 1:
            raise InputError(f"delta must lie in (0, 1), got {self.delta}")

    def matrix(self) -> np.ndarray:
        return baseline_matrix(self)


# --------------------------------------------------------------------------
# truncated geometric


def truncated_geometric_matrix(p: PrivacyParam, n: int) -> np.ndarray:
    """Two-sided geometric noise with the tails folded onto ``0`` and ``n-1``.

    With ``a = 1/lam``: ``t[i, j] = (1-a)/(1+a) * a**|i-j|`` for interior
    ``j`` and ``a**|i-j| / (1+a)`` for ``j`` in ``{0, n-1}``.  Exact when
    ``p.lam`` is rational.

    Examples
    --------
    >>> T = truncated_geometric_matrix(PrivacyParam.from_lambda(2), 3)
    >>> [str(x) for x in T[0]]
    ['2/3', '1/6', '1/6']
    """
    n = check_positive_int(n, "n")
    if n == 1:
        return np.array([[Fraction(1) if p.exact else 1.0]], dtype=object if p.exact else float)
    a = 1 / p.lam if p.exact else 1.0 / float(p.lam)
    inner = (1 - a) / (1 + a)
    edge = 1 / (1 + a)
    out = np.empty((n, n), dtype=object if p.exact else float)
    for i in range(n):
        for j in range(n):
            out[i, j] = (edge if j in (0, n - 1) else inner) * a ** abs(i - j)
    return out


# --------------------------------------------------------------------------
# staircase


def default_gamma(epsilon: float) -> float:
    """Shape ``1 / (1 + exp(eps/2))`` minimizing the expected noise amplitude."""
    epsilon = check_positive_real(epsilon, "epsilon")
    return 1.0 / (1.0 + math.exp(epsilon / 2.0))


def _check_gamma(gamma):
    if not 0 < gamma <= 1:
        raise InputError(f"gamma must lie in (0, 1], got {gamma}")
    return float(gamma)


def staircase_sampler(epsilon: float, gamma: float | None = None, seed=None,
                      size: int | None = None):
    """Draw staircase noise (sensitivity 1) as a mixture.

    ``X = S * (G + gamma*U)`` with probability ``gamma / (gamma + (1-gamma) b)``
    and ``X = S * (G + gamma + (1-gamma)*U)`` otherwise, where ``b = exp(-eps)``,
    ``S`` is a fair sign, ``G`` is geometric with ``P(G=k) = (1-b) b**k`` and
    ``U`` is uniform on ``[0, 1)``.
    """
    epsilon = float(check_positive_real(epsilon, "epsilon"))
    gamma = default_gamma(epsilon) if gamma is None else _check_gamma(gamma)
    rng = np.random.default_rng(seed)
    shape = () if size is None else (check_positive_int(size, "size"),)
    b = math.exp(-epsilon)
    sign = np.where(rng.random(shape) < 0.5, -1.0, 1.0)
    geo = rng.geometric(1.0 - b, shape) - 1.0
    u = rng.random(shape)
    inner = rng.random(shape) < gamma / (gamma + (1.0 - gamma) * b)
    mag = np.where(inner, geo + gamma * u, geo + gamma + (1.0 - gamma) * u)
    out = sign * mag
    return float(out) if size is None else out


def round_half_away(x):
    """Nearest integer with ties rounded away from zero."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def staircase_mechanism(count, epsilon: float, gamma: float | None, n: int, seed=None):
    """Add staircase noise, round half away from zero and clamp to ``[0, n-1]``."""
    n = check_positive_int(n, "n")
    counts = np.asarray(count)
    noise = staircase_sampler(epsilon, gamma, seed, size=counts.size if counts.ndim else None)
    out = np.clip(round_half_away(counts + np.reshape(noise, counts.shape)), 0, n - 1).astype(int)
    return int(out) if counts.ndim == 0 else out


def staircase_cdf(x, epsilon: float, gamma: float | None = None):
    """CDF of staircase noise with sensitivity 1."""
    epsilon = float(check_positive_real(epsilon, "epsilon"))
    gamma = default_gamma(epsilon) if gamma is None else _check_gamma(gamma)
    b = math.exp(-epsilon)
    c = (1.0 - b) / (gamma + (1.0 - gamma) * b)
    x = np.asarray(x, dtype=float)
    m = np.abs(x)
    k = np.floor(m)
    f = m - k
    # probability of |X| <= m: full steps below k, then the partial step
    inside = (1.0 - b ** k) + c * b ** k * (np.minimum(f, gamma) + b * np.maximum(f - gamma, 0.0))
    return 0.5 + 0.5 * np.sign(x) * inside


def staircase_matrix(epsilon: float, gamma: float | None, n: int) -> np.ndarray:
    """Transition matrix induced by :func:`staircase_mechanism`."""
    n = check_positive_int(n, "n")
    edges = np.arange(n + 1) - 0.5
    out = np.empty((n, n))
    for i in range(n):
        cdf = staircase_cdf(edges - i, epsilon, gamma)
        cdf[0], cdf[-1] = 0.0, 1.0
        out[i] = np.diff(cdf)
    return out


# --------------------------------------------------------------------------
# discrete Gaussian


def calibrate_sigma(epsilon: float, delta: float) -> float:
    """``sqrt(2 ln(1.25/delta)) / eps`` for sensitivity 1."""
    epsilon = float(check_positive_real(epsilon, "epsilon"))
    if not 0 < delta < 1:
        raise InputError(f"delta must lie in (0, 1), got {delta}")
    return math.sqrt(2.0 * math.log(1.25 / delta)) / epsilon


def _discrete_laplace(t: int, size: int, rng) -> np.ndarray:
    """Draws with ``P(y) proportional to exp(-|y|/t)``."""
    out = np.empty(size, dtype=np.int64)
    filled = 0
    p = 1.0 - math.exp(-1.0 / t)
    while filled < size:
        m = 2 * (size - filled) + 16
        mag = rng.geometric(p, m) - 1
        neg = rng.random(m) < 0.5
        keep = ~(neg & (mag == 0))
        vals = np.where(neg, -mag, mag)[keep][: size - filled]
        out[filled:filled + vals.size] = vals
        filled += vals.size
    return out


def discrete_gaussian_sampler(sigma: float, seed=None, size: int | None = None):
    """Discrete Gaussian ``P(y) proportional to exp(-y**2 / (2 sigma**2))``.

    Rejection from a discrete Laplace proposal with scale
    ``t = floor(sigma) + 1``, accepting ``y`` with probability
    ``exp(-(|y| - sigma**2/t)**2 / (2 sigma**2))``.
    """
    sigma = float(check_positive_real(sigma, "sigma"))
    rng = np.random.default_rng(seed)
    want = 1 if size is None else check_positive_int(size, "size")
    t = math.floor(sigma) + 1
    s2 = sigma * sigma
    out = np.empty(want, dtype=np.int64)
    filled = 0
    while filled < want:
        m = 2 * (want - filled) + 16
        y = _discrete_laplace(t, m, rng)
        accept = rng.random(m) < np.exp(-((np.abs(y) - s2 / t) ** 2) / (2.0 * s2))
        vals = y[accept][: want - filled]
        out[filled:filled + vals.size] = vals
        filled += vals.size
    return int(out[0]) if size is None else out


def discrete_gaussian_mechanism(count, sigma: float, n: int, seed=None):
    """Add discrete Gaussian noise and clamp to ``[0, n-1]``."""
    n = check_positive_int(n, "n")
    counts = np.asarray(count)
    noise = discrete_gaussian_sampler(sigma, seed, size=max(counts.size, 1))
    out = np.clip(counts + np.reshape(noise[: counts.size], counts.shape), 0, n - 1).astype(int)
    return int(out) if counts.ndim == 0 else out


def discrete_gaussian_matrix(sigma: float, n: int) -> np.ndarray:
    """Transition matrix induced by :func:`discrete_gaussian_mechanism`."""
    sigma = float(check_positive_real(sigma, "sigma"))
    n = check_positive_int(n, "n")
    reach = n + int(math.ceil(40 * sigma)) + 1
    ys = np.arange(-reach, reach + 1)
    w = np.exp(-(ys.astype(float) ** 2) / (2 * sigma * sigma))
    w /= w.sum()
    out = np.zeros((n, n))
    for i in range(n):
        target = np.clip(i + ys, 0, n - 1)
        np.add.at(out[i], target, w)
    return out


def baseline_matrix(spec: BaselineSpec) -> np.ndarray:
    """Transition matrix of the baseline described by ``spec``."""
    if spec.kind == "truncated-geometric":
        if spec.epsilon is None:
            raise InputError("truncated-geometric requires epsilon")
        return truncated_geometric_matrix(PrivacyParam.from_epsilon(spec.epsilon), spec.n)
    if spec.kind == "staircase":
        if spec.epsilon is None:
            raise InputError("staircase requires epsilon")
        return staircase_matrix(spec.epsilon, spec.gamma, spec.n)
    if spec.sigma is None:
        raise InputError("discrete-gaussian requires sigma")
    return discrete_gaussian_matrix(spec.sigma, spec.n)
