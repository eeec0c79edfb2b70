"""Small linear-algebra kernels that work over exact rationals or floats.

Matrices are plain sequences of rows.  When every entry is an ``int`` or a
``Fraction`` the routines run exact Gaussian elimination; otherwise they fall
back to floating point (SVD for rank, least squares for solves).
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

RANK_RTOL = 1e-8


def is_exact(value) -> bool:
    """True for ``int``/``Fraction`` scalars (and arrays made only of them)."""
    if isinstance(value, np.ndarray):
        if value.dtype == object:
            return all(is_exact(v) for v in value.flat)
        return np.issubdtype(value.dtype, np.integer)
    if isinstance(value, (list, tuple)):
        return all(is_exact(v) for v in value)
    return isinstance(value, Rational) and not isinstance(value, bool)


def as_fraction_array(values) -> np.ndarray:
    """Object array of ``Fraction`` with the same shape as ``values``."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = Fraction(v)
    return out


def _to_rows(matrix) -> list[list]:
    if isinstance(matrix, np.ndarray):
        return [list(row) for row in matrix]
    return [list(row) for row in matrix]


def _row_echelon(rows: list[list], n_cols: int) -> tuple[list[list], list[int]]:
    """In-place exact reduced row echelon form; returns (rows, pivot columns)."""
    pivots: list[int] = []
    r = 0
    n_rows = len(rows)
    for col in range(n_cols):
        if r == n_rows:
            break
        pivot = next((i for i in range(r, n_rows) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = Fraction(1) / rows[r][col]
        rows[r] = [v * inv for v in rows[r]]
        prow = rows[r]
        for i in range(n_rows):
            if i != r:
                factor = rows[i][col]
                if factor != 0:
                    row_i = rows[i]
                    rows[i] = [a - factor * b for a, b in zip(row_i, prow)]
        pivots.append(col)
        r += 1
    return rows, pivots


def matrix_rank(matrix, rtol: float = RANK_RTOL) -> int:
    """Rank of ``matrix``; exact for rational input, SVD-thresholded otherwise.

    The float threshold is ``rtol`` times the largest singular value.
    """
    rows = _to_rows(matrix)
    if not rows or not rows[0]:
        return 0
    if is_exact(rows):
        return len(_row_echelon([[Fraction(v) for v in row] for row in rows], len(rows[0]))[1])
    arr = np.asarray(rows, dtype=float)
    sv = np.linalg.svd(arr, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def sparse_rank(rows: Sequence[dict]) -> int:
    """Exact rank of a sparse rational matrix given as ``{col: value}`` rows.

    Pivots on the shortest remaining row first, which keeps the elimination
    sparse for constraint systems dominated by one- and two-term rows.
    """
    work = [dict((c, Fraction(v)) for c, v in row.items() if v != 0) for row in rows]
    work = [row for row in work if row]
    rank = 0
    while work:
        work.sort(key=len)
        pivot_row = work.pop(0)
        if not pivot_row:
            continue
        col = min(pivot_row)
        pv = pivot_row[col]
        rank += 1
        nxt = []
        for row in work:
            factor = row.get(col)
            if factor is not None:
                f = factor / pv
                for c, v in pivot_row.items():
                    nv = row.get(c, 0) - f * v
                    if nv == 0:
                        row.pop(c, None)
                    else:
                        row[c] = nv
            if row:
                nxt.append(row)
        work = nxt
    return rank


def solve_unique(a, b) -> list | None:
    """Unique solution of ``a x = b``, or ``None``.

    Returns ``None`` when the columns of ``a`` are linearly dependent or the
    system is inconsistent.  Exact for rational input.
    """
    rows = _to_rows(a)
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    rhs = list(b)
    if is_exact(rows) and is_exact(rhs):
        aug = [[Fraction(v) for v in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
        aug, pivots = _row_echelon(aug, n_cols)
        if len(pivots) < n_cols:
            return None
        if any(aug[i][n_cols] != 0 for i in range(len(pivots), n_rows)):
            return None
        x = [Fraction(0)] * n_cols
        for i, col in enumerate(pivots):
            x[col] = aug[i][n_cols]
        return x
    arr = np.asarray(rows, dtype=float)
    vec = np.asarray(rhs, dtype=float)
    if matrix_rank(arr) < n_cols:
        return None
    x, *_ = np.linalg.lstsq(arr, vec, rcond=None)
    scale = max(1.0, float(np.max(np.abs(vec))) if vec.size else 1.0)
    if np.max(np.abs(arr @ x - vec), initial=0.0) > 1e-9 * scale:
        return None
    return list(x)


def solve_square(a, b) -> list:
    """Solve a nonsingular square system (exact for rational input)."""
    x = solve_unique(a, b)
    if x is None:
        raise np.linalg.LinAlgError("singular or inconsistent system")
    return x
