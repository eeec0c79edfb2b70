"""Distribution distances, count-error weights and output-variance formulas."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_numeric, check_same_length, infer_exact
from .exceptions import InputError

__all__ = [
    "DISTANCES",
    "ErrorReport",
    "distribution_distance",
    "all_distances",
    "build_weight_matrix",
    "validate_row_wise_concentrating",
    "validate_row_wise_convex",
    "count_error",
    "analytic_output_variance",
    "fixed_point_output_variance",
]

DISTANCES = ("wasserstein1", "ks", "tv")


@dataclass(frozen=True)
class ErrorReport:
    wasserstein1: float
    ks: float
    tv: float
    count_error_ead: float | None = None
    count_error_mse: float | None = None


def _pair(a, b):
    check_same_length(a, b)
    exact = infer_exact(a, b)
    return as_numeric(a, exact, 1, "a"), as_numeric(b, exact, 1, "b")


def distribution_distance(a, b, kind: str = "wasserstein1"):
    """Distance between two distributions on ``{0, ..., n-1}``.

    ``wasserstein1`` is the L1 distance between CDFs (unit spacing), ``ks``
    the sup distance between CDFs and ``tv`` half the L1 distance between the
    probability vectors.
    """
    a, b = _pair(a, b)
    if kind == "tv":
        return sum(abs(x - y) for x, y in zip(a, b)) / 2
    gap = [abs(x) for x in np.cumsum(a - b)]
    if kind == "wasserstein1":
        return sum(gap)
    if kind == "ks":
        return max(gap)
    raise InputError(f"unknown distance {kind!r}; choose from {DISTANCES}")


def all_distances(a, b) -> dict:
    return {kind: float(distribution_distance(a, b, kind)) for kind in DISTANCES}


def build_weight_matrix(kind: str, z) -> np.ndarray:
    """Count-error weights: ``z_i |i-j|`` (``ead``) or ``z_i (i-j)**2`` (``mse``)."""
    exact = infer_exact(z)
    z = as_numeric(z, exact, 1, "z")
    n = len(z)
    dist = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    if kind == "ead":
        power = dist
    elif kind == "mse":
        power = dist ** 2
    else:
        raise InputError(f"unknown error kind {kind!r}; choose 'ead' or 'mse'")
    if exact:
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = z[i] * int(power[i, j])
        return out
    return z[:, None] * power


def _square(W):
    exact = infer_exact(W)
    W = as_numeric(W, exact, 2, "W")
    if W.shape[0] != W.shape[1]:
        raise InputError("weight matrix must be square")
    return W, exact


def _ge(a, b, tol):
    return a >= b - tol * max(abs(a), abs(b), 1)


def validate_row_wise_concentrating(W, tol=None) -> bool:
    """Each row is non-decreasing moving away from the diagonal on both sides."""
    W, exact = _square(W)
    tol = 0 if exact else (1e-12 if tol is None else tol)
    n = W.shape[0]
    for i in range(n):
        for j in range(i, n - 1):
            if not _ge(W[i, j + 1], W[i, j], tol):
                return False
        for j in range(i, 0, -1):
            if not _ge(W[i, j - 1], W[i, j], tol):
                return False
    return True


def validate_row_wise_convex(W, tol=None) -> bool:
    """Row increments ``w[i, j+1] - w[i, j]`` are non-decreasing in ``j``."""
    W, exact = _square(W)
    tol = 0 if exact else (1e-12 if tol is None else tol)
    n = W.shape[0]
    for i in range(n):
        diffs = [W[i, j + 1] - W[i, j] for j in range(n - 1)]
        for a, b in zip(diffs[:-1], diffs[1:]):
            if not _ge(b, a, tol):
                return False
    return True


def count_error(W, T):
    """Frobenius inner product ``<W, T> = sum_ij w_ij t_ij``."""
    exact = infer_exact(W, T)
    W = as_numeric(W, exact, 2, "W")
    T = as_numeric(T, exact, 2, "T")
    if W.shape != T.shape:
        raise InputError(f"shape mismatch: W {W.shape} vs T {T.shape}")
    return (W * T).sum()


def analytic_output_variance(zeta, T, N: int) -> np.ndarray:
    """Per-bin variance of the published distribution of counts.

    Each of the ``N`` categories lands in bin ``j`` independently with
    probability ``T[d, j]``, so ``Var(zhat_j) = sum_l zeta_l t_lj (1 - t_lj) / N``.
    """
    exact = infer_exact(zeta, T)
    zeta = as_numeric(zeta, exact, 1, "zeta")
    T = as_numeric(T, exact, 2, "T")
    if T.shape != (len(zeta), len(zeta)):
        raise InputError("zeta and T dimensions disagree")
    if N < 1:
        raise InputError("N must be positive")
    return (zeta @ (T * (1 - T))) / N


def fixed_point_output_variance(zeta, T, N: int) -> np.ndarray:
    """``(zeta_j - sum_l zeta_l t_lj**2) / N``; equals the general form when ``zeta T = zeta``."""
    exact = infer_exact(zeta, T)
    zeta = as_numeric(zeta, exact, 1, "zeta")
    T = as_numeric(T, exact, 2, "T")
    return (zeta - zeta @ (T * T)) / N
