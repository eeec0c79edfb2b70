"""Epsilon-scales, the scale matrix ``Psi`` and representation predicates.

An *epsilon-scale* is a positive probability vector in which every adjacent
DP constraint binds: ``s[i] = lam**(-p[i]) * s[i+1]`` for a sign pattern
``p`` in ``{-1, +1}**(n-1)``.  The ``2**(n-1)`` scales are the building
blocks of every DP count mechanism; a mechanism is written ``T = Psi @ B``
for a nonnegative coefficient matrix ``B``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._validation import check_positive_int, infer_exact
from .core import PrivacyParam
from .exact import matrix_rank, solve_square
from .exceptions import CapacityError, InputError

__all__ = [
    "Pattern",
    "ScaleMatrix",
    "check_pattern",
    "scale_from_pattern",
    "enumerate_scales",
    "single_peaked_pattern",
    "single_peaked_scale",
    "solve_row_weights",
    "row_weights_closed_form",
    "psi_affinely_simplified",
    "psi_linearly_simplified",
    "SCALE_CAP",
]

Pattern = tuple  # tuple of +1 / -1 of length n-1

SCALE_CAP = 20
LOG_SPACE_THRESHOLD = 64


def check_pattern(pat: Sequence[int], n: int | None = None) -> tuple:
    pat = tuple(int(x) for x in pat)
    if any(x not in (-1, 1) for x in pat):
        raise InputError(f"pattern entries must be +1 or -1, got {pat}")
    if n is not None and len(pat) != n - 1:
        raise InputError(f"pattern must have length {n - 1}, got {len(pat)}")
    return pat


def scale_from_pattern(pat: Sequence[int], p: PrivacyParam) -> np.ndarray:
    """The unique epsilon-scale with sign pattern ``pat``.

    Built as ``s[0] = 1``, ``s[i+1] = s[i] * lam**pat[i]`` and then normalized.
    Exact (Fractions) when ``p.lam`` is rational.  In float mode patterns
    longer than 64 are accumulated in log space to avoid overflow.

    Examples
    --------
    >>> from fractions import Fraction
    >>> p = PrivacyParam.from_lambda(2)
    >>> [str(x) for x in scale_from_pattern((-1, -1), p)]
    ['4/7', '2/7', '1/7']
    """
    pat = check_pattern(pat)
    if p.exact:
        vals = [Fraction(1)]
        for sign in pat:
            vals.append(vals[-1] * p.lam if sign > 0 else vals[-1] / p.lam)
        total = sum(vals)
        return np.array([v / total for v in vals], dtype=object)
    if len(pat) + 1 > LOG_SPACE_THRESHOLD:
        logs = np.concatenate([[0.0], np.cumsum(np.asarray(pat, dtype=float) * math.log(p.lam))])
        w = np.exp(logs - logs.max())
        return w / w.sum()
    vals = np.empty(len(pat) + 1)
    vals[0] = 1.0
    lam = float(p.lam)
    for i, sign in enumerate(pat):
        vals[i + 1] = vals[i] * lam if sign > 0 else vals[i] / lam
    return vals / vals.sum()


def _pattern_of_index(index: int, n: int) -> tuple:
    # first pattern element is the most significant bit
    return tuple(1 if (index >> (n - 2 - i)) & 1 else -1 for i in range(n - 1))


@dataclass(frozen=True)
class ScaleMatrix:
    """All ``2**(n-1)`` scales as columns of ``matrix`` in canonical order."""

    matrix: np.ndarray
    patterns: tuple

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> int:
        return self.matrix.shape[1]

    def column(self, u: int) -> np.ndarray:
        return self.matrix[:, u]


def enumerate_scales(n: int, p: PrivacyParam, cap: int = SCALE_CAP) -> ScaleMatrix:
    """Enumerate the scale matrix ``Psi`` (``n x 2**(n-1)``).

    Columns are ordered by the pattern read as an ``(n-1)``-bit integer with
    ``+1`` as bit 1 and the first sign as the most significant bit.

    Raises
    ------
    CapacityError
        If ``n`` exceeds ``cap``.
    """
    n = check_positive_int(n, "n")
    if n > cap:
        raise CapacityError(f"n={n} exceeds the scale enumeration cap of {cap}")
    k = 1 << (n - 1)
    patterns = tuple(_pattern_of_index(u, n) for u in range(k))
    cols = [scale_from_pattern(pat, p) for pat in patterns]
    matrix = np.empty((n, k), dtype=object if p.exact else float)
    for u, col in enumerate(cols):
        matrix[:, u] = col
    return ScaleMatrix(matrix, patterns)


def single_peaked_pattern(j: int, n: int) -> tuple:
    """Pattern rising up to index ``j`` and falling afterwards."""
    n = check_positive_int(n, "n")
    if not 0 <= j <= n - 1:
        raise InputError(f"peak index {j} out of range for n={n}")
    return tuple(1 if i < j else -1 for i in range(n - 1))


def single_peaked_scale(j: int, n: int, p: PrivacyParam) -> np.ndarray:
    return scale_from_pattern(single_peaked_pattern(j, n), p)


def solve_row_weights(n: int, p: PrivacyParam) -> np.ndarray:
    """Weights ``omega`` with ``sum_l omega[l] * sigma_l = 1`` (all ones).

    ``sigma_l`` is the single-peaked scale with peak ``l``.  The system is
    solved exactly in rational mode.
    """
    n = check_positive_int(n, "n")
    if p.exact:
        cols = [single_peaked_scale(l, n, p) for l in range(n)]
        a = [[cols[l][i] for l in range(n)] for i in range(n)]
        return np.array(solve_square(a, [1] * n), dtype=object)
    sigma = np.column_stack([single_peaked_scale(l, n, p) for l in range(n)])
    return np.linalg.solve(sigma, np.ones(n))


def row_weights_closed_form(n: int, p: PrivacyParam) -> np.ndarray:
    """Closed form of :func:`solve_row_weights`.

    With ``a = 1/lam``, ``omega[l] = c_l * sum_i a**|i - l|`` where
    ``c_l = (1 - a) / (1 + a)`` for interior ``l`` and ``1 / (1 + a)`` at the
    two ends (``n = 1`` gives ``omega = [1]``).
    """
    n = check_positive_int(n, "n")
    if n == 1:
        return np.array([Fraction(1) if p.exact else 1.0], dtype=object if p.exact else float)
    a = 1 / p.lam if p.exact else 1.0 / float(p.lam)
    out = []
    for l in range(n):
        norm = sum(a ** abs(i - l) for i in range(n))
        c = 1 / (1 + a) if l in (0, n - 1) else (1 - a) / (1 + a)
        out.append(c * norm)
    return np.array(out, dtype=object if p.exact else float)


def _psi_columns(psi) -> np.ndarray:
    return psi.matrix if isinstance(psi, ScaleMatrix) else np.asarray(psi)


def _independent(vectors: list, exact: bool) -> bool:
    if not vectors:
        return True
    if len(vectors) > len(vectors[0]):
        return False
    if exact:
        return matrix_rank([list(v) for v in vectors]) == len(vectors)
    return matrix_rank(np.asarray(vectors, dtype=float)) == len(vectors)


def psi_affinely_simplified(B, z, psi) -> bool:
    """Whether the multiset union of ``H(B_j)`` is linearly independent.

    For a column ``x`` of ``B`` with positive support ``S`` and smallest
    positive index ``v``, ``H(x) = {Psi_u / (z Psi_u) - Psi_v / (z Psi_v)}``
    for ``u`` in ``S`` minus ``v``.
    """
    P = _psi_columns(psi)
    B = np.asarray(B, dtype=object)
    exact = infer_exact(B, z, P)
    if not exact:
        B, z, P = B.astype(float), np.asarray(z, dtype=float), P.astype(float)
    else:
        z = np.asarray(z, dtype=object)
    if B.shape[0] != P.shape[1]:
        raise InputError("B must have one row per scale")
    vectors = []
    for j in range(B.shape[1]):
        support = [u for u in range(B.shape[0]) if B[u, j] > 0]
        if len(support) < 2:
            continue
        v = support[0]
        anchor = P[:, v] / (z @ P[:, v])
        for u in support[1:]:
            vectors.append(P[:, u] / (z @ P[:, u]) - anchor)
    return _independent(vectors, exact)


def psi_linearly_simplified(B, psi) -> bool:
    """Whether the multiset union of ``G(B_j) = {Psi_u : B_uj > 0}`` is independent."""
    P = _psi_columns(psi)
    B = np.asarray(B, dtype=object)
    exact = infer_exact(B, P)
    if B.shape[0] != P.shape[1]:
        raise InputError("B must have one row per scale")
    vectors = [P[:, u] for j in range(B.shape[1]) for u in range(B.shape[0]) if B[u, j] > 0]
    if not exact:
        vectors = [np.asarray(v, dtype=float) for v in vectors]
    return _independent(vectors, exact)
