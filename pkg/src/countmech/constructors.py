"""Constructors that turn a target distribution ``z`` into a count mechanism.

* :func:`heuristic_constructor` fills one column at a time with multiples of
  epsilon-scales until the column's share of ``z`` is used up.  It always
  returns a vertex of ``F`` and runs in ``O(n**2)``.
* :func:`lp_fixed_point_constructor` minimizes count error ``<W, T>`` over
  ``F`` with a dense linear program.
* :func:`unfixed_optimum_constructor` places the ``n`` single-peaked scales
  greedily and returns a minimizer of ``<W, T>`` over ``U`` for weight
  matrices that are row-wise concentrating and row-wise convex.

The heuristic is written against plain Python sequences so the same code
runs on Fractions (exact mode) and floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._validation import as_numeric, check_distribution, check_positive_int, infer_exact
from .core import PrivacyParam, in_F, neighbor_indistinguishable
from .exceptions import CapacityError, InputError, InvariantViolation
from .lp import solve_lp
from .metrics import validate_row_wise_concentrating, validate_row_wise_convex
from .scales import single_peaked_pattern, solve_row_weights, row_weights_closed_form

__all__ = [
    "SELECTORS",
    "ConstructorState",
    "compute_q",
    "adjust_pattern",
    "select_column",
    "heuristic_constructor",
    "fixed_point_lp",
    "unfixed_lp",
    "lp_fixed_point_constructor",
    "lp_unfixed_constructor",
    "unfixed_optimum_constructor",
    "LP_CAP",
]

SELECTORS = ("max", "min", "sandwich")
LP_CAP = 64
FLIP_RTOL = 1e-9
OUTPUT_TOL = 1e-9


@dataclass
class ConstructorState:
    """Working variables of the heuristic.

    ``columns[j]`` is column ``j`` of the partial mechanism ``A``; ``r`` is
    the row remainder ``1 - A 1`` and ``c`` the column remainder ``z - z A``.
    """

    columns: list
    r: list
    c: list
    filled: set = field(default_factory=set)
    additions: int = 0
    sandwich_pos: int = 0
    pattern: tuple = ()

    def matrix(self) -> np.ndarray:
        n = len(self.r)
        exact = isinstance(self.r[0], Fraction)
        out = np.empty((n, n), dtype=object if exact else float)
        for j, col in enumerate(self.columns):
            out[:, j] = col
        return out


def _lam(p: PrivacyParam, exact: bool):
    return p.lam if exact else float(p.lam)


def _scale(pat: Sequence[int], p: PrivacyParam, exact: bool) -> list:
    """Scale with pattern ``pat`` as a Python list (log space in float mode)."""
    if exact:
        vals = [Fraction(1)]
        lam = p.lam
        for sign in pat:
            vals.append(vals[-1] * lam if sign > 0 else vals[-1] / lam)
        total = sum(vals)
        return [v / total for v in vals]
    step = math.log(p.lam)
    logs = [0.0]
    for sign in pat:
        logs.append(logs[-1] + (step if sign > 0 else -step))
    top = max(logs)
    vals = [math.exp(v - top) for v in logs]
    total = math.fsum(vals)
    return [v / total for v in vals]


def _pattern_of(s: Sequence) -> tuple:
    return tuple(1 if b > a else -1 for a, b in zip(s[:-1], s[1:]))


def compute_q(r: Sequence, c_j, s: Sequence, z: Sequence, p: PrivacyParam, pattern=None, check: bool = True):
    """Largest ``g`` with ``g * z.s <= c_j`` and ``r - g*s`` neighbor indistinguishable.

    Closed form ``min(q_0, ..., q_{n-2}, c_j / z.s)`` with, for ``lam = exp(eps)``,
    ``q_i = (lam r_{i+1} - r_i) / (lam s_{i+1} - s_i)`` when the scale rises
    at ``i`` and ``q_i = (r_i - r_{i+1}/lam) / (s_i - s_{i+1}/lam)`` when it
    falls.
    """
    exact = infer_exact(list(r), [c_j], list(s), list(z)) and p.exact
    if check and not neighbor_indistinguishable(r, p):
        raise InputError("remainder r is not neighbor indistinguishable")
    q, _ = _compute_q(list(r), c_j, list(s), list(z), p, exact,
                      tuple(pattern) if pattern is not None else _pattern_of(s))
    return q


def _q_terms(r, c_j, s, z, p, exact, pat):
    """Return ``(q, capacity_binds, binding)``.

    ``capacity_binds`` flags that the ``c_j`` term attains the minimum and
    ``binding`` lists the indices ``i`` whose ``q_i`` attains it (in float
    mode, within relative ``FLIP_RTOL``).
    """
    lam = _lam(p, exact)
    zs = sum(a * b for a, b in zip(z, s)) if exact else math.fsum(a * b for a, b in zip(z, s))
    q_cap = c_j / zs
    terms = []
    for i, sign in enumerate(pat):
        if sign > 0:
            num = lam * r[i + 1] - r[i]
            den = lam * s[i + 1] - s[i]
        else:
            num = r[i] - r[i + 1] / lam
            den = s[i] - s[i + 1] / lam
        if den <= 0:
            # only reachable in float mode when scale entries underflow
            continue
        if num > 0:
            # a subnormal denominator gives inf, which never attains the min
            with np.errstate(over="ignore"):
                terms.append((num / den, i))
        else:
            terms.append((0 * num, i))
    q = min([q_cap] + [t for t, _ in terms])
    if exact:
        binding = [i for t, i in terms if t == q]
        return q, q_cap == q, binding
    cut = q * (1 + FLIP_RTOL)
    binding = [i for t, i in terms if t <= cut]
    if q_cap <= cut:
        q = q_cap
    return q, q_cap <= cut, binding


def _compute_q(r, c_j, s, z, p, exact, pat):
    q, capacity, _ = _q_terms(r, c_j, s, z, p, exact, pat)
    return q, capacity


def adjust_pattern(pat: Sequence[int], r: Sequence, p: PrivacyParam, tol=None) -> tuple:
    """Flip ``pat[i]`` wherever ``r[i+1] / r[i] == lam**(-pat[i])``.

    Exact comparison in rational mode; relative tolerance ``1e-9`` otherwise.
    """
    exact = p.exact and infer_exact(list(r))
    return _adjust(tuple(pat), list(r), p, exact, FLIP_RTOL if tol is None else tol)


def _adjust(pat, r, p, exact, rtol):
    lam = _lam(p, exact)
    out = list(pat)
    for i, sign in enumerate(pat):
        # p_i = +1 flips when r_i = lam r_{i+1}; p_i = -1 when r_{i+1} = lam r_i
        a, b = (r[i], lam * r[i + 1]) if sign > 0 else (r[i + 1], lam * r[i])
        if exact:
            hit = a == b
        else:
            hit = b > 0 and abs(a - b) <= rtol * max(abs(a), abs(b))
        if hit:
            out[i] = -sign
    return tuple(out)


def _project_locked_runs(r, locks, lam):
    """Restore exact ratios inside each run of locked pairs (float mode).

    Each run is rebuilt from its largest entry, the one least affected by
    cancellation in ``r -= q * s``.
    """
    n = len(r)
    i = 0
    while i < n - 1:
        if i not in locks:
            i += 1
            continue
        a = i
        while i < n - 1 and i in locks:
            i += 1
        b = i
        k = max(range(a, b + 1), key=r.__getitem__)
        for t in range(k, b):
            r[t + 1] = r[t] * lam if locks[t] > 0 else r[t] / lam
        for t in range(k - 1, a - 1, -1):
            r[t] = r[t + 1] / lam if locks[t] > 0 else r[t + 1] * lam


def _sandwich_order(n: int) -> list:
    order = []
    lo, hi = 0, n - 1
    while lo <= hi:
        order.append(lo)
        if hi != lo:
            order.append(hi)
        lo += 1
        hi -= 1
    return order


def select_column(kind: str, state: ConstructorState, z: Sequence) -> int:
    """Pick the next column with ``c_j > 0``.

    ``max``/``min`` use the largest/smallest ``z_j`` (ties to the smaller
    index); ``sandwich`` follows ``0, n-1, 1, n-2, ...`` skipping exhausted
    columns.
    """
    c = state.c
    live = [j for j in range(len(c)) if c[j] > 0]
    if not live:
        raise InvariantViolation("no column with remaining capacity")
    if kind == "max":
        return min(live, key=lambda j: (-z[j], j))
    if kind == "min":
        return min(live, key=lambda j: (z[j], j))
    if kind == "sandwich":
        order = _sandwich_order(len(c))
        while state.sandwich_pos < len(order):
            j = order[state.sandwich_pos]
            if c[j] > 0:
                return j
            state.sandwich_pos += 1
        raise InvariantViolation("sandwich order exhausted with capacity remaining")
    raise InputError(f"unknown selector {kind!r}; choose from {SELECTORS}")


def heuristic_constructor(z, p: PrivacyParam, kind: str = "sandwich",
                          hook: Callable[[ConstructorState], None] | None = None,
                          return_state: bool = False):
    """Greedy fixed-point constructor; returns a vertex of ``F``.

    Parameters
    ----------
    z : array-like of shape (n,)
        Target fixed point.  Exact mode when ``z`` holds Fractions and
        ``p.lam`` is rational.
    p : PrivacyParam
    kind : {"max", "min", "sandwich"}
        Column selector.
    hook : callable, optional
        Called with the :class:`ConstructorState` after every scale addition.
    return_state : bool
        Also return the final state (``state.additions`` counts scale
        additions, at most ``2n - 1``).

    Returns
    -------
    T : ndarray of shape (n, n)
    """
    if kind not in SELECTORS:
        raise InputError(f"unknown selector {kind!r}; choose from {SELECTORS}")
    exact = p.exact and infer_exact(z)
    z = list(check_distribution(z, exact=exact))
    n = len(z)
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    state = ConstructorState(columns=[[zero] * n for _ in range(n)], r=[one] * n, c=list(z))
    # A binding remainder constraint stays binding for the rest of the run, so
    # the pattern flip is recorded once instead of re-testing ratios of r,
    # which drift under floating-point cancellation.
    locks: dict[int, int] = {}
    limit = 2 * n - 1
    c_floor = 16 * n * np.finfo(float).eps
    lam = _lam(p, exact)
    while any(cj > 0 for cj in state.c):
        j = select_column(kind, state, z)
        base = single_peaked_pattern(j, n)
        col = state.columns[j]
        last = all(state.c[k] == 0 for k in range(n) if k != j)
        while state.c[j] > 0:
            r = state.r
            if last and not exact:
                # sum_k c_k = z.r; for the final column the right side avoids
                # the cancellation accumulated in c_j
                state.c[j] = math.fsum(a * b for a, b in zip(z, r))
            pat = tuple(locks.get(i, sign) for i, sign in enumerate(base))
            if not exact:
                # pairs that bind to within rounding are locked before stepping
                adjusted = _adjust(pat, r, p, exact, FLIP_RTOL)
                for i, (old, new) in enumerate(zip(pat, adjusted)):
                    if old != new and i not in locks:
                        locks[i] = new
                if adjusted != pat:
                    pat = tuple(locks.get(i, sign) for i, sign in enumerate(base))
                    _project_locked_runs(r, locks, lam)
            state.pattern = pat
            s = _scale(pat, p, exact)
            q, capacity, binding = _q_terms(r, state.c[j], s, z, p, exact, pat)
            if not q > 0:
                if exact:
                    raise InvariantViolation(f"non-positive step q={q} in column {j}")
                # a pair binds to within underflow: record it without stepping
                fresh = [i for i in binding if i not in locks]
                for i in fresh:
                    locks[i] = -pat[i]
                if capacity:
                    state.c[j] = zero
                elif not fresh:
                    raise InvariantViolation(
                        f"floating-point precision exhausted in column {j}; use a rational lam")
                continue
            state.additions += 1
            if state.additions > limit:
                raise InvariantViolation(f"more than {limit} scale additions")
            for i in range(n):
                qs = q * s[i]
                col[i] += qs
                r[i] -= qs
            fresh = [i for i in binding if i not in locks]
            if not capacity and not fresh:
                # only a locked pair bound, meaning r is exhausted there; by
                # zero propagation all of r is, which exact arithmetic reaches
                # through the capacity term
                if exact:
                    raise InvariantViolation(f"step in column {j} bound no new constraint")
                capacity = True
            for i in fresh:
                locks[i] = -pat[i]
            if capacity:
                state.c[j] = zero
            else:
                state.c[j] -= q * (sum(a * b for a, b in zip(z, s)) if exact
                                    else math.fsum(a * b for a, b in zip(z, s)))
                if not exact and state.c[j] <= c_floor:
                    # what is left is rounding noise from earlier updates
                    state.c[j] = zero
            if not exact:
                for i in range(n):
                    if r[i] < 0:
                        r[i] = 0.0
                _project_locked_runs(r, locks, lam)
            if hook is not None:
                hook(state)
        state.filled.add(j)
    T = state.matrix()
    if not exact and not in_F(T, z, p, tol=OUTPUT_TOL):
        raise InvariantViolation(
            "floating-point result left F; use exact mode with a rational lam")
    return (T, state) if return_state else T


# --------------------------------------------------------------------------
# linear programs


def _lp_blocks(n: int, p: PrivacyParam, exact: bool, z=None):
    """Equality and DP inequality rows over row-major ``t_ij``."""
    lam = _lam(p, exact)
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    dtype = object if exact else float

    def blank(rows):
        a = np.empty((rows, n * n), dtype=dtype)
        a[:] = zero
        return a

    n_eq = n + (n - 1 if z is not None else 0)
    A_eq = blank(n_eq)
    b_eq = np.empty(n_eq, dtype=dtype)
    for i in range(n):
        A_eq[i, i * n:(i + 1) * n] = one
        b_eq[i] = one
    if z is not None:
        # the last fixed-point equality is implied by the others
        for j in range(n - 1):
            for i in range(n):
                A_eq[n + j, i * n + j] = z[i]
            b_eq[n + j] = z[j]
    A_ub = blank(2 * n * (n - 1))
    row = 0
    for j in range(n):
        for i in range(n - 1):
            A_ub[row, i * n + j] = one
            A_ub[row, (i + 1) * n + j] = -lam
            A_ub[row + 1, (i + 1) * n + j] = one
            A_ub[row + 1, i * n + j] = -lam
            row += 2
    b_ub = np.empty(A_ub.shape[0], dtype=dtype)
    b_ub[:] = zero
    return A_eq, b_eq, A_ub, b_ub


def _weights(W, n, exact):
    W = as_numeric(W, exact, 2, "W")
    if W.shape != (n, n):
        raise InputError(f"weight matrix must be {n}x{n}")
    return W.reshape(-1)


def fixed_point_lp(z, p: PrivacyParam, W):
    """LP data ``(c, A_eq, b_eq, A_ub, b_ub)`` for minimizing ``<W, T>`` over ``F``."""
    exact = p.exact and infer_exact(z, W)
    z = check_distribution(z, exact=exact)
    n = len(z)
    return (_weights(W, n, exact),) + _lp_blocks(n, p, exact, z)


def unfixed_lp(n: int, p: PrivacyParam, W):
    """LP data for minimizing ``<W, T>`` over ``U``."""
    exact = p.exact and infer_exact(W)
    return (_weights(W, n, exact),) + _lp_blocks(n, p, exact)


def _solve_matrix_lp(data, n, method, exact):
    c, A_eq, b_eq, A_ub, b_ub = data
    res = solve_lp(c, A_eq, b_eq, A_ub, b_ub, bounds=(0, None), method=method,
                   exact=exact if method == "simplex" else False)
    return np.asarray(res.x, dtype=object if exact and method == "simplex" else float).reshape(n, n), res.fun


def lp_fixed_point_constructor(z, p: PrivacyParam, W, method: str = "simplex",
                               max_n: int = LP_CAP, return_value: bool = False):
    """Minimize ``<W, T>`` over ``F`` (mechanisms with fixed point ``z``).

    Raises
    ------
    CapacityError
        If ``n > max_n``; use :func:`heuristic_constructor` instead.
    """
    exact = p.exact and infer_exact(z, W) and method == "simplex"
    n = len(z)
    if n > max_n:
        raise CapacityError(f"n={n} exceeds the LP capacity of {max_n}; use a heuristic constructor")
    T, value = _solve_matrix_lp(fixed_point_lp(z, p, W), n, method, exact)
    if not exact:
        T = np.maximum(T, 0.0)
    return (T, value) if return_value else T


def lp_unfixed_constructor(n: int, p: PrivacyParam, W, method: str = "simplex",
                           max_n: int = LP_CAP, return_value: bool = False):
    """Minimize ``<W, T>`` over ``U`` by linear programming (reference solver)."""
    n = check_positive_int(n, "n")
    if n > max_n:
        raise CapacityError(f"n={n} exceeds the LP capacity of {max_n}")
    exact = p.exact and infer_exact(W) and method == "simplex"
    T, value = _solve_matrix_lp(unfixed_lp(n, p, W), n, method, exact)
    if not exact:
        T = np.maximum(T, 0.0)
    return (T, value) if return_value else T


def unfixed_optimum_constructor(p: PrivacyParam, W, n: int | None = None,
                                return_placement: bool = False):
    """Place each single-peaked scale in its best column, left to right.

    ``W`` must be row-wise concentrating and row-wise convex.  Scale ``l``
    (weighted by ``omega_l``) goes into the column where ``<W_j, sigma_l>``
    stops decreasing; the column index never moves backwards.

    Returns
    -------
    T : ndarray of shape (n, n)
    placement : list of int, optional
        Column that received each single-peaked scale.
    """
    exact = p.exact and infer_exact(W)
    W = as_numeric(W, exact, 2, "W")
    if n is None:
        n = W.shape[0]
    if W.shape != (n, n):
        raise InputError(f"weight matrix must be {n}x{n}")
    if not validate_row_wise_concentrating(W):
        raise InputError("weight matrix is not row-wise concentrating")
    if not validate_row_wise_convex(W):
        raise InputError("weight matrix is not row-wise convex")
    omega = list(solve_row_weights(n, p) if exact else row_weights_closed_form(n, p))
    sigma = [_scale(single_peaked_pattern(l, n), p, exact) for l in range(n)]
    cols = [list(W[:, j]) for j in range(n)]
    zero = Fraction(0) if exact else 0.0
    A = [[zero] * n for _ in range(n)]

    def err(j, l):
        return omega[l] * sum(a * b for a, b in zip(cols[j], sigma[l]))

    placement = []
    j = l = 0
    while l <= n - 1:
        current = err(j, l)
        nxt = err(j + 1, l) if j < n - 1 else math.inf
        if nxt > current:
            target = A[j]
            w = omega[l]
            for i, v in enumerate(sigma[l]):
                target[i] += w * v
            placement.append(j)
            l += 1
        else:
            j += 1
    T = np.empty((n, n), dtype=object if exact else float)
    for j in range(n):
        T[:, j] = A[j]
    return (T, placement) if return_placement else T
