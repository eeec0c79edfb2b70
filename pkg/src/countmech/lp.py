"""Dense two-phase primal simplex over Fractions or floats.

The problem format mirrors :func:`scipy.optimize.linprog`::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                lo <= x <= hi      (default 0 <= x)

Bounds are folded into the standard form ``A y = b, y >= 0`` by shifting,
reflecting or splitting variables and adding slack rows for finite upper
bounds.  In exact mode the tableau holds Fractions and Bland's rule is used
throughout; in float mode Dantzig's rule is used until a long run of
degenerate pivots is seen, after which Bland's rule takes over to rule out
cycling.  Rows that already carry a unit slack column start with that slack
in the basis, so artificials are only added where needed.
"""
from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import numpy as np

from ._validation import infer_exact
from .exact import as_fraction_array
from .exceptions import CountMechError, Infeasible, InputError, Unbounded

__all__ = ["LPResult", "solve_lp", "Infeasible", "Unbounded"]

FLOAT_TOL = 1e-9
DEGENERATE_SWITCH = 5000
# the HiGHS default of 1e-7 leaves absolute violations that relative DP checks
# on tiny entries reject
HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


class LPResult(NamedTuple):
    x: np.ndarray
    fun: object


def _as_2d(a, n_vars, exact):
    if a is None:
        return np.zeros((0, n_vars), dtype=object if exact else float)
    arr = as_fraction_array(a) if exact else np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.shape[1] != n_vars:
        raise InputError(f"constraint matrix has {arr.shape[1]} columns, expected {n_vars}")
    return arr


def _as_1d(b, m, exact):
    if b is None:
        b = []
    arr = as_fraction_array(b) if exact else np.asarray(b, dtype=float)
    arr = arr.reshape(-1)
    if arr.shape[0] != m:
        raise InputError(f"right-hand side has length {arr.shape[0]}, expected {m}")
    return arr


def _normalize_bounds(bounds, n_vars):
    if bounds is None:
        return [(0, None)] * n_vars
    if isinstance(bounds, tuple) and len(bounds) == 2 and not isinstance(bounds[0], (tuple, list)):
        return [bounds] * n_vars
    bounds = list(bounds)
    if len(bounds) != n_vars:
        raise InputError(f"expected {n_vars} bounds, got {len(bounds)}")
    return [tuple(b) for b in bounds]


class _Tableau:
    """Simplex tableau ``[A | b]`` with an explicit basis and cost row."""

    def __init__(self, A, b, exact):
        self.exact = exact
        self.tol = 0 if exact else FLOAT_TOL
        self.tab = np.concatenate([A, b.reshape(-1, 1)], axis=1)
        self.basis = [-1] * A.shape[0]
        self.degenerate_run = 0
        self.bland = exact
        self.iterations = 0

    def pivot(self, r, j, cost):
        tab = self.tab
        tab[r] = tab[r] / tab[r, j]
        col = tab[:, j].copy()
        col[r] = 0
        tab -= np.outer(col, tab[r])
        cost -= cost[j] * tab[r]
        if not self.exact:
            tab[np.abs(tab) < 1e-13] = 0.0
            cost[np.abs(cost) < 1e-13] = 0.0
        self.basis[r] = j
        self.iterations += 1

    def run(self, cost, allowed, max_iter):
        """Optimize in place; ``cost`` holds reduced costs and ``-objective``."""
        tol = self.tol
        allowed = np.asarray(allowed)
        while True:
            if self.iterations > max_iter:
                raise CountMechError(f"simplex exceeded {max_iter} iterations")
            rc = cost[allowed]
            neg = np.nonzero(rc < -tol)[0]
            if neg.size == 0:
                return
            if self.bland:
                j = int(allowed[neg[0]])
            else:
                j = int(allowed[neg[np.argmin(np.asarray(rc[neg], dtype=float))]])
            colj = self.tab[:, j]
            rows = np.nonzero(colj > tol)[0]
            if rows.size == 0:
                raise Unbounded("objective is unbounded below")
            ratios = self.tab[rows, -1] / colj[rows]
            best = ratios.min()
            tied = rows[ratios <= best + tol] if not self.exact else rows[ratios == best]
            if self.bland:
                r = min(tied, key=lambda i: self.basis[i])
            else:
                # the largest pivot element among tied rows keeps the tableau well scaled
                r = int(tied[np.argmax(np.asarray(colj[tied], dtype=float))])
            if best == 0 or (not self.exact and best <= tol):
                self.degenerate_run += 1
                if self.degenerate_run >= DEGENERATE_SWITCH:
                    self.bland = True
            else:
                self.degenerate_run = 0
            self.pivot(r, j, cost)


def _simplex_standard(c, A, b, exact, max_iter):
    """Minimize ``c @ y`` s.t. ``A y = b``, ``y >= 0``.  Returns ``(y, value)``."""
    m, n = A.shape
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    A = A.copy()
    b = b.copy()
    for i in range(m):
        if b[i] < 0:
            A[i] = -A[i]
            b[i] = -b[i]
    # reuse unit columns (slacks) as the starting basis where possible
    start = [-1] * m
    for j in range(n):
        col = A[:, j]
        nz = np.nonzero(col != 0)[0]
        if nz.size == 1 and col[nz[0]] == 1 and start[nz[0]] < 0:
            start[nz[0]] = j
    need = [i for i in range(m) if start[i] < 0]
    k = len(need)
    art = np.empty((m, k), dtype=object) if exact else np.zeros((m, k))
    if exact:
        art[:] = zero
    for t, i in enumerate(need):
        art[i, t] = one
        start[i] = n + t
    tab = _Tableau(np.concatenate([A, art], axis=1), b, exact)
    tab.basis = start
    # phase 1: minimize the sum of artificials
    cost = np.empty(n + k + 1, dtype=object) if exact else np.zeros(n + k + 1)
    cost[:] = zero
    for i in need:
        cost -= tab.tab[i]
    for t in range(k):
        cost[n + t] = zero
    tab.run(cost, np.arange(n + k), max_iter)
    infeas = -cost[-1]
    if (infeas != 0) if exact else infeas > FLOAT_TOL * max(1.0, float(np.max(np.abs(np.asarray(b, dtype=float)), initial=0.0))):
        raise Infeasible("constraints are infeasible")
    # drive remaining artificials out of the basis, dropping redundant rows
    keep = []
    for r in range(m):
        if tab.basis[r] >= n:
            row = tab.tab[r, :n]
            cand = np.nonzero((row != 0) if exact else (np.abs(row) > FLOAT_TOL))[0]
            if cand.size == 0:
                continue
            tab.pivot(r, int(cand[0]), cost)
        keep.append(r)
    tab.tab = np.concatenate([tab.tab[keep, :n], tab.tab[keep, -1:]], axis=1)
    tab.basis = [tab.basis[r] for r in keep]
    # phase 2
    cost = np.empty(n + 1, dtype=object) if exact else np.zeros(n + 1)
    cost[:n] = c
    cost[n] = zero
    for r, j in enumerate(tab.basis):
        if cost[j] != 0:
            cost -= cost[j] * tab.tab[r]
    tab.degenerate_run = 0
    tab.bland = exact
    tab.run(cost, np.arange(n), max_iter)
    y = np.empty(n, dtype=object) if exact else np.zeros(n)
    y[:] = zero
    for r, j in enumerate(tab.basis):
        y[j] = tab.tab[r, -1]
    if not exact:
        y = np.maximum(y, 0.0)
    return y, -cost[-1]


def solve_lp(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, bounds=None,
             method: str = "simplex", exact: bool | None = None, max_iter: int = 100_000) -> LPResult:
    """Solve a linear program, returning a vertex optimum.

    Parameters
    ----------
    c : array-like of shape (n,)
    A_eq, b_eq, A_ub, b_ub : array-like, optional
    bounds : (lo, hi) or sequence of (lo, hi), optional
        ``None`` means unbounded on that side.  Default ``(0, None)``.
    method : {"simplex", "highs"}
        ``"simplex"`` is the in-repo dense solver; ``"highs"`` delegates to
        :func:`scipy.optimize.linprog` (float only).
    exact : bool, optional
        Rational arithmetic; inferred from the inputs when omitted.

    Returns
    -------
    LPResult
        ``(x, fun)``.

    Raises
    ------
    Infeasible, Unbounded
    """
    c_arr = np.asarray(c, dtype=object).reshape(-1)
    n_vars = c_arr.shape[0]
    if exact is None:
        parts = [c] + [p for p in (A_eq, b_eq, A_ub, b_ub) if p is not None]
        exact = method == "simplex" and infer_exact(*[np.asarray(p, dtype=object).reshape(-1) for p in parts])
    if method == "highs":
        return _solve_highs(c, A_eq, b_eq, A_ub, b_ub, bounds)
    if method != "simplex":
        raise InputError(f"unknown LP method {method!r}")
    c_arr = as_fraction_array(c_arr) if exact else np.asarray(c_arr, dtype=float)
    A_eq = _as_2d(A_eq, n_vars, exact)
    b_eq = _as_1d(b_eq, A_eq.shape[0], exact)
    A_ub = _as_2d(A_ub, n_vars, exact)
    b_ub = _as_1d(b_ub, A_ub.shape[0], exact)
    bounds = _normalize_bounds(bounds, n_vars)
    zero = Fraction(0) if exact else 0.0
    conv = (lambda v: Fraction(v)) if exact else float

    # x = offset + M y, y >= 0
    cols = []
    offset = np.empty(n_vars, dtype=object) if exact else np.zeros(n_vars)
    offset[:] = zero
    upper_rows = []
    for k, (lo, hi) in enumerate(bounds):
        if lo is not None and hi is not None and conv(lo) > conv(hi):
            raise Infeasible(f"variable {k} has lower bound above upper bound")
        if lo is None and hi is None:
            cols.append((k, 1))
            cols.append((k, -1))
        elif lo is None:
            offset[k] = conv(hi)
            cols.append((k, -1))
        else:
            offset[k] = conv(lo)
            cols.append((k, 1))
            if hi is not None:
                upper_rows.append((len(cols) - 1, conv(hi) - conv(lo)))
    ny = len(cols)
    M = np.empty((n_vars, ny), dtype=object) if exact else np.zeros((n_vars, ny))
    M[:] = zero
    for idx, (k, sign) in enumerate(cols):
        M[k, idx] = conv(sign)

    n_ub = A_ub.shape[0] + len(upper_rows)
    n_eq = A_eq.shape[0]
    n_std = ny + n_ub
    rows_A = []
    rows_b = []

    def blank():
        row = np.empty(n_std, dtype=object) if exact else np.zeros(n_std)
        row[:] = zero
        return row

    for i in range(n_eq):
        row = blank()
        row[:ny] = A_eq[i] @ M
        rows_A.append(row)
        rows_b.append(b_eq[i] - A_eq[i] @ offset)
    for i in range(A_ub.shape[0]):
        row = blank()
        row[:ny] = A_ub[i] @ M
        row[ny + i] = conv(1)
        rows_A.append(row)
        rows_b.append(b_ub[i] - A_ub[i] @ offset)
    for t, (idx, width) in enumerate(upper_rows):
        row = blank()
        row[idx] = conv(1)
        row[ny + A_ub.shape[0] + t] = conv(1)
        rows_A.append(row)
        rows_b.append(width)
    c_std = blank()
    c_std[:ny] = c_arr @ M
    if rows_A:
        A_std = np.array(rows_A, dtype=object if exact else float)
        b_std = np.array(rows_b, dtype=object if exact else float)
    else:
        A_std = np.zeros((0, n_std), dtype=object if exact else float)
        b_std = np.zeros(0, dtype=object if exact else float)
        if any(v < 0 for v in c_std):
            raise Unbounded("objective is unbounded below")
    y, _ = _simplex_standard(c_std, A_std, b_std, exact, max_iter)
    x = offset + M @ y[:ny]
    fun = c_arr @ x
    return LPResult(x, fun)


def _solve_highs(c, A_eq, b_eq, A_ub, b_ub, bounds) -> LPResult:
    from scipy.optimize import linprog

    f = lambda a: None if a is None else np.asarray(a, dtype=float)
    res = linprog(f(c), A_ub=f(A_ub), b_ub=f(b_ub), A_eq=f(A_eq), b_eq=f(b_eq),
                  bounds=bounds if bounds is not None else (0, None), method="highs",
                  options=HIGHS_OPTIONS)
    if res.status == 2:
        raise Infeasible(res.message)
    if res.status == 3:
        raise Unbounded(res.message)
    if res.status != 0:
        raise CountMechError(f"HiGHS failed: {res.message}")
    return LPResult(np.asarray(res.x, dtype=float), float(res.fun))
