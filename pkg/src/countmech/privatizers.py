"""Distribution privatizers: noisy estimates of a distribution of counts.

The cyclic mechanisms add *differences* of neighbouring noise draws,
``V_i = zeta_i + L_i - L_{i+1}`` with ``L_n = L_0``, so the noise telescopes
and the output still sums to one.  Cumulative sums then carry the noise of
only two draws, whereas independent per-bin noise accumulates linearly.
"""
from __future__ import annotations

import numpy as np

from ._validation import check_distribution, check_positive_int, check_positive_real
from .exceptions import InputError

__all__ = [
    "PRIVATIZERS",
    "laplace_noise",
    "cyclic_laplace",
    "classic_laplace",
    "cyclic_gaussian",
    "privatize_distribution",
    "project_to_simplex",
]

PRIVATIZERS = ("cyclic-laplace", "classic-laplace", "cyclic-gaussian")


def laplace_noise(scale: float, shape, rng: np.random.Generator) -> np.ndarray:
    """Laplace(0, scale) draws by inverting the CDF of a uniform on (-1/2, 1/2)."""
    u = rng.random(shape) - 0.5
    tail = np.maximum(1.0 - 2.0 * np.abs(u), np.finfo(float).tiny)
    return -scale * np.sign(u) * np.log(tail)


def _prepare(zeta, N, size):
    zeta = np.asarray(check_distribution(zeta, exact=False, tol=1e-9, name="zeta"), dtype=float)
    N = check_positive_int(N, "N")
    shape = zeta.shape if size is None else (check_positive_int(size, "size"),) + zeta.shape
    return zeta, N, shape


def cyclic_laplace(zeta, N: int, epsilon: float, seed=None, size: int | None = None) -> np.ndarray:
    """Cyclic Laplace mechanism.

    Draws ``L_0..L_{n-1} ~ Laplace(1/(N*epsilon))``, sets ``L_n = L_0`` and
    returns ``V_i = zeta_i + L_i - L_{i+1}``.

    Parameters
    ----------
    zeta : array-like of shape (n,)
        True distribution of counts.
    N : int
        Number of categories.
    epsilon : float
        Privacy budget for this stage.
    seed : int or Generator, optional
    size : int, optional
        Number of independent replicates; output gains a leading axis.
    """
    zeta, N, shape = _prepare(zeta, N, size)
    epsilon = check_positive_real(epsilon, "epsilon")
    rng = np.random.default_rng(seed)
    L = laplace_noise(1.0 / (N * epsilon), shape, rng)
    return zeta + L - np.roll(L, -1, axis=-1)


def classic_laplace(zeta, N: int, epsilon: float, seed=None, size: int | None = None) -> np.ndarray:
    """Independent ``Laplace(2/(N*epsilon))`` noise added to every bin."""
    zeta, N, shape = _prepare(zeta, N, size)
    epsilon = check_positive_real(epsilon, "epsilon")
    rng = np.random.default_rng(seed)
    return zeta + laplace_noise(2.0 / (N * epsilon), shape, rng)


def cyclic_gaussian(zeta, N: int, sigma: float, seed=None, size: int | None = None) -> np.ndarray:
    """Cyclic Gaussian mechanism with ``n`` draws ``G_i ~ Normal(0, sigma**2)``.

    ``N`` is accepted for signature symmetry; ``sigma`` is used as given.
    """
    zeta, N, shape = _prepare(zeta, N, size)
    sigma = check_positive_real(sigma, "sigma")
    rng = np.random.default_rng(seed)
    G = rng.normal(0.0, sigma, shape)
    return zeta + G - np.roll(G, -1, axis=-1)


def privatize_distribution(kind: str, zeta, N: int, seed=None, epsilon: float | None = None,
                           sigma: float | None = None) -> np.ndarray:
    """Dispatch to one of :data:`PRIVATIZERS` by name."""
    if kind == "cyclic-laplace":
        return cyclic_laplace(zeta, N, epsilon, seed)
    if kind == "classic-laplace":
        return classic_laplace(zeta, N, epsilon, seed)
    if kind == "cyclic-gaussian":
        if sigma is None:
            raise InputError("cyclic-gaussian requires sigma")
        return cyclic_gaussian(zeta, N, sigma, seed)
    raise InputError(f"unknown privatizer {kind!r}; choose from {PRIVATIZERS}")


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection of ``v`` onto the probability simplex.

    Sort-based, ``O(n log n)``.  The result is renormalized so it sums to one
    to within one rounding step.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise InputError("expected a nonempty vector")
    if not np.all(np.isfinite(v)):
        raise InputError("vector contains non-finite values")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ks > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    x = np.maximum(v - theta, 0.0)
    return x / x.sum()
