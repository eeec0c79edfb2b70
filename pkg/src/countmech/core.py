"""Count tables, distributions of counts, and the polytopes U and F.

A count mechanism is an ``n x n`` row-stochastic matrix ``T`` where
``T[i, j]`` is the probability of publishing ``j`` when the true count is
``i``.  It is differentially private at level ``eps`` when every column is
*neighbor indistinguishable*::

    v[i + 1] / lam <= v[i] <= lam * v[i + 1],    lam = exp(eps)

``U`` is the set of such matrices and ``F`` the subset that additionally
keeps a distribution ``z`` fixed (``z @ T == z``).

Two numeric modes coexist.  When ``lam`` is an ``int`` or ``Fraction`` every
predicate runs in exact rational arithmetic with zero tolerance; otherwise
float64 with relative tolerance ``1e-9``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from ._validation import (
    as_numeric,
    check_distribution,
    check_positive_int,
    check_transition_matrix,
    infer_exact,
    resolve_tol,
)
from .exact import matrix_rank, sparse_rank
from .exceptions import InputError, MembershipError

__all__ = [
    "PrivacyParam",
    "CountTable",
    "histogram_of",
    "distribution_of",
    "apply_mechanism",
    "row_uniforms",
    "neighbor_indistinguishable",
    "in_U",
    "in_F",
    "is_extreme",
    "binding_constraint_rows",
    "is_extreme_full_rank",
]


# --------------------------------------------------------------------------
# privacy parameter


@dataclass(frozen=True)
class PrivacyParam:
    """Privacy level stored both as ``epsilon`` and ``lam = exp(epsilon)``.

    Use :meth:`from_lambda` with an ``int``/``Fraction`` to get exact mode
    (``epsilon`` is then only informational), or :meth:`from_epsilon` for
    float mode.
    """

    epsilon: float
    lam: float | Fraction

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InputError(f"epsilon must be positive, got {self.epsilon}")
        if not self.lam > 1:
            raise InputError(f"lambda must exceed 1, got {self.lam}")
        if not self.exact and not math.isclose(self.lam, math.exp(self.epsilon), rel_tol=1e-12):
            raise InputError("lambda must equal exp(epsilon) in float mode")

    @classmethod
    def from_epsilon(cls, epsilon: float) -> "PrivacyParam":
        epsilon = float(epsilon)
        if not epsilon > 0 or not math.isfinite(epsilon):
            raise InputError(f"epsilon must be positive and finite, got {epsilon}")
        lam = math.exp(epsilon) if epsilon < 710 else math.inf
        if not math.isfinite(lam):
            raise InputError(f"epsilon={epsilon} overflows exp(epsilon)")
        return cls(epsilon, lam)

    @classmethod
    def from_lambda(cls, lam) -> "PrivacyParam":
        if isinstance(lam, Rational) and not isinstance(lam, bool):
            lam = Fraction(lam)
            if lam <= 1:
                raise InputError(f"lambda must exceed 1, got {lam}")
            return cls(math.log(lam), lam)
        lam = float(lam)
        if not lam > 1:
            raise InputError(f"lambda must exceed 1, got {lam}")
        return cls(math.log(lam), lam)

    @property
    def exact(self) -> bool:
        return isinstance(self.lam, Fraction)


# --------------------------------------------------------------------------
# tables, histograms, distributions


@dataclass(frozen=True)
class CountTable:
    """A table of per-category counts, top-coded to ``{0, ..., n-1}``.

    Parameters
    ----------
    categories : tuple of str
    counts : ndarray of int
        Already top-coded; use :meth:`from_counts` to apply saturation.
    n : int
        Number of possible count values.
    """

    categories: tuple
    counts: np.ndarray = field(repr=False)
    n: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "categories", tuple(str(c) for c in self.categories))
        check_positive_int(self.n, "n")
        if counts.ndim != 1 or len(counts) != len(self.categories):
            raise InputError("categories and counts must have equal length")
        if counts.size and (counts.min() < 0 or counts.max() > self.n - 1):
            raise InputError(f"counts must lie in [0, {self.n - 1}]")
        counts.flags.writeable = False

    @classmethod
    def from_counts(cls, counts: Iterable[int], n: int, categories: Sequence[str] | None = None) -> "CountTable":
        """Build a table, saturating counts above ``n-1``."""
        n = check_positive_int(n, "n")
        raw = np.asarray(list(counts))
        if raw.size and not np.issubdtype(raw.dtype, np.integer):
            raise InputError("counts must be integers")
        raw = raw.astype(np.int64)
        if raw.size and raw.min() < 0:
            raise InputError("counts must be nonnegative")
        if categories is None:
            categories = [str(i) for i in range(len(raw))]
        return cls(tuple(categories), np.minimum(raw, n - 1), n)

    @property
    def N(self) -> int:
        return len(self.counts)

    def with_counts(self, counts) -> "CountTable":
        return CountTable(self.categories, np.asarray(counts, dtype=np.int64), self.n)

    def __eq__(self, other):
        if not isinstance(other, CountTable):
            return NotImplemented
        return (self.n == other.n and self.categories == other.categories
                and np.array_equal(self.counts, other.counts))

    def __hash__(self):
        return hash((self.n, self.categories, self.counts.tobytes()))


def histogram_of(table: CountTable, n: int | None = None) -> np.ndarray:
    """Histogram of counts ``eta`` with ``eta[i] = #{categories with count i}``.

    Counts at or above ``n-1`` fall into the top bin.
    """
    n = table.n if n is None else check_positive_int(n, "n")
    if table.N == 0:
        raise InputError("count table is empty")
    return np.bincount(np.minimum(table.counts, n - 1), minlength=n).astype(np.int64)


def distribution_of(hist, exact: bool = False) -> np.ndarray:
    """Normalize a histogram to a distribution of counts ``zeta``.

    With ``exact=True`` the result is an object array of Fractions summing to
    exactly one.
    """
    bins = np.asarray(hist)
    if bins.ndim != 1 or bins.size == 0:
        raise InputError("histogram must be a nonempty vector")
    if np.any(bins < 0):
        raise InputError("histogram has negative bins")
    total = int(bins.sum())
    if total < 1:
        raise InputError("histogram is all zero")
    if exact:
        return np.array([Fraction(int(b), total) for b in bins], dtype=object)
    return bins.astype(float) / total


# --------------------------------------------------------------------------
# applying a mechanism

_BLOCK = 1 << 16


def row_uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """Uniform draws in ``[0, 1)`` for rows ``start..stop-1``.

    Row ``i`` always receives the same value for a given seed, regardless of
    how the row range is chunked.  Rows are grouped into blocks of ``2**16``;
    each block reads its own Philox stream keyed by ``seed`` with the block
    index in the high counter word.
    """
    if stop <= start:
        return np.empty(0)
    out = np.empty(stop - start)
    pos = start
    while pos < stop:
        block, offset = divmod(pos, _BLOCK)
        take = min(stop - pos, _BLOCK - offset)
        bitgen = np.random.Philox(key=seed % (1 << 128), counter=[0, 0, 0, block])
        draws = np.random.Generator(bitgen).random(offset + take)
        out[pos - start:pos - start + take] = draws[offset:]
        pos += take
    return out


def apply_mechanism(table: CountTable, T, seed: int, chunk_size: int = _BLOCK) -> CountTable:
    """Pass every count through ``T`` independently.

    The output for row ``i`` depends only on ``(seed, i, table.counts[i], T)``.
    """
    T = check_transition_matrix(T)
    if T.shape[0] != table.n:
        raise InputError(f"mechanism has size {T.shape[0]} but table has n={table.n}")
    Tf = np.asarray(T, dtype=float)
    if np.any(Tf < 0):
        raise InputError("mechanism has negative entries")
    cum = np.cumsum(Tf, axis=1)
    totals = cum[:, -1]
    if np.any(np.abs(totals - 1.0) > 1e-6):
        raise InputError("mechanism rows must sum to 1")
    n = table.n
    out = np.empty(table.N, dtype=np.int64)
    for start in range(0, table.N, chunk_size):
        stop = min(table.N, start + chunk_size)
        d = table.counts[start:stop]
        u = row_uniforms(seed, start, stop) * totals[d]
        # side='right' search: zero-probability outputs are never chosen
        idx = (u[:, None] >= cum[d]).sum(axis=1)
        out[start:stop] = np.minimum(idx, n - 1)
    return table.with_counts(out)


# --------------------------------------------------------------------------
# polytope predicates


# entries this small arise only from underflow of exponentially decaying
# columns; they are compared with an absolute slack
_UNDERFLOW = 1e-300


def _le(a, b, tol) -> bool:
    """``a <= b`` with slack ``tol`` relative to the larger magnitude."""
    if tol == 0:
        return a <= b
    return a <= b + tol * max(abs(a), abs(b)) + _UNDERFLOW


def neighbor_indistinguishable(v, p: PrivacyParam, tol=None) -> bool:
    """True iff ``v[i+1]/lam <= v[i] <= lam*v[i+1]`` for every adjacent pair.

    The zero vector qualifies.  ``tol`` is a relative slack (default 0 in
    exact mode, ``1e-9`` otherwise).
    """
    exact = p.exact and all(isinstance(x, Rational) for x in v)
    tol = resolve_tol(tol, exact)
    lam = p.lam if exact else float(p.lam)
    vals = list(v) if exact else [float(x) for x in v]
    for a, b in zip(vals[:-1], vals[1:]):
        if not (_le(a, lam * b, tol) and _le(b, lam * a, tol)):
            return False
    return True


def _mode(T, p: PrivacyParam, *others) -> bool:
    return p.exact and infer_exact(T, *others)


def in_U(T, p: PrivacyParam, tol=None) -> bool:
    """Membership in ``U``: nonnegative, row-stochastic, DP columns."""
    exact = _mode(T, p)
    T = as_numeric(T, exact, ndim=2, name="T")
    tol = resolve_tol(tol, exact)
    n = T.shape[0]
    if T.shape != (n, n):
        return False
    if any(x < 0 for x in T.flat):
        return False
    for i in range(n):
        s = sum(T[i])
        if (s != 1) if tol == 0 else abs(s - 1) > tol * max(1.0, n):
            return False
    return all(neighbor_indistinguishable(T[:, j], p, tol) for j in range(n))


def in_F(T, z, p: PrivacyParam, tol=None) -> bool:
    """Membership in ``F``: ``T`` in ``U`` and ``z @ T == z``."""
    exact = _mode(T, p, z)
    T = as_numeric(T, exact, ndim=2, name="T")
    z = as_numeric(z, exact, ndim=1, name="z")
    if len(z) != T.shape[0]:
        raise InputError("z and T dimensions disagree")
    tol = resolve_tol(tol, exact)
    if not in_U(T, p, tol):
        return False
    zt = z @ T
    if tol == 0:
        return all(a == b for a, b in zip(zt, z))
    return bool(np.all(np.abs(np.asarray(zt, dtype=float) - np.asarray(z, dtype=float)) <= tol * max(1.0, len(z))))


def _binding(a, b, lam, tol) -> bool:
    """Whether ``a == lam * b`` holds (within relative ``tol``)."""
    if tol == 0:
        return a == lam * b
    return abs(a - lam * b) <= tol * max(abs(a), abs(lam * b))


def _column_segments(col, lam, tol) -> list[list[int]]:
    """Split a positive column into runs linked by binding DP constraints."""
    segments = [[0]]
    for i in range(len(col) - 1):
        a, b = col[i], col[i + 1]
        if _binding(a, b, lam, tol) or _binding(b, a, lam, tol):
            segments[-1].append(i + 1)
        else:
            segments.append([i + 1])
    return segments


def is_extreme(T, p: PrivacyParam, z=None, tol=None) -> bool:
    """Whether ``T`` is a vertex of ``U`` (``z=None``) or of ``F`` (``z`` given).

    A member column is either identically zero or strictly positive.  Inside a
    positive column, adjacent entries joined by a binding DP inequality move
    together, so every feasible perturbation is a combination of the column's
    own values restricted to those linked segments.  ``T`` is a vertex iff
    no nonzero combination of segment directions preserves the row sums (and
    the fixed point for ``F``), i.e. iff the small matrix assembled below has
    full column rank.  :func:`is_extreme_full_rank` is the literal
    ``n**2``-dimensional binding-constraint rank test used to cross-check it.

    Raises
    ------
    MembershipError
        If ``T`` is not a member of the polytope.
    """
    exact = _mode(T, p) if z is None else _mode(T, p, z)
    T = as_numeric(T, exact, ndim=2, name="T")
    tol = resolve_tol(tol, exact)
    n = T.shape[0]
    if z is None:
        if not in_U(T, p, tol):
            raise MembershipError("matrix is not a member of U")
    else:
        z = as_numeric(z, exact, ndim=1, name="z")
        if not in_F(T, z, p, tol):
            raise MembershipError("matrix is not a member of F")
    lam = p.lam if exact else float(p.lam)
    zero_tol = 0 if exact else tol
    n_rows = 2 * n if z is not None else n
    columns = []
    for j in range(n):
        col = T[:, j]
        if all(x <= zero_tol for x in col):
            continue
        for seg in _column_segments(col, lam, tol):
            vec = [0] * n_rows
            for i in seg:
                vec[i] = col[i]
            if z is not None:
                vec[n + j] = sum(z[i] * col[i] for i in seg)
            columns.append(vec)
    if not columns:
        return True
    if len(columns) > n_rows:
        return False
    mat = [list(row) for row in zip(*columns)]
    if not exact:
        mat = np.asarray(mat, dtype=float)
    return matrix_rank(mat) == len(columns)


def binding_constraint_rows(T, p: PrivacyParam, z=None, tol=None) -> list[dict]:
    """Sparse rows of every binding constraint over the ``n**2`` coordinates.

    Coordinates are ordered row-major (``i * n + j``).  Includes the row-sum
    equalities, the fixed-point equalities when ``z`` is given, and each
    inequality ``t_ij >= 0``, ``t_ij <= lam t_(i+1)j``,
    ``t_(i+1)j <= lam t_ij`` that holds with equality.
    """
    exact = _mode(T, p) if z is None else _mode(T, p, z)
    T = as_numeric(T, exact, ndim=2, name="T")
    tol = resolve_tol(tol, exact)
    lam = p.lam if exact else float(p.lam)
    n = T.shape[0]
    rows: list[dict] = []
    for i in range(n):
        rows.append({i * n + j: 1 for j in range(n)})
    if z is not None:
        z = as_numeric(z, exact, ndim=1, name="z")
        for j in range(n):
            rows.append({i * n + j: z[i] for i in range(n) if z[i] != 0})
    for i in range(n):
        for j in range(n):
            if T[i, j] <= (0 if exact else tol):
                rows.append({i * n + j: 1})
    for j in range(n):
        for i in range(n - 1):
            a, b = T[i, j], T[i + 1, j]
            if _binding(a, b, lam, tol):
                rows.append({i * n + j: 1, (i + 1) * n + j: -lam})
            if _binding(b, a, lam, tol):
                rows.append({(i + 1) * n + j: 1, i * n + j: -lam})
    return rows


def is_extreme_full_rank(T, p: PrivacyParam, z=None, tol=None) -> bool:
    """Vertex test by rank of the full binding-constraint matrix (``= n**2``)."""
    exact = _mode(T, p) if z is None else _mode(T, p, z)
    if z is None:
        member = in_U(T, p, tol)
    else:
        member = in_F(T, z, p, tol)
    if not member:
        raise MembershipError("matrix is not a member of the polytope")
    rows = binding_constraint_rows(T, p, z, tol)
    n = np.asarray(T).shape[0]
    if exact:
        return sparse_rank(rows) == n * n
    dense = np.zeros((len(rows), n * n))
    for r, row in enumerate(rows):
        for c, v in row.items():
            dense[r, c] = float(v)
    return matrix_rank(dense) == n * n
