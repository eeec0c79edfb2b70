"""Input-validation helpers in the spirit of ``sklearn.utils.validation``.

Every public entry point funnels its array arguments through one of the
``check_*`` functions below so that the numeric mode (exact rational or
float64) is decided in one place.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Integral, Real

import numpy as np

from .exact import as_fraction_array, is_exact
from .exceptions import InputError

DEFAULT_TOL = 1e-9


def resolve_tol(tol, exact: bool) -> float:
    """Default tolerance: zero in exact mode, ``DEFAULT_TOL`` otherwise."""
    if tol is None:
        return 0 if exact else DEFAULT_TOL
    if tol < 0:
        raise InputError(f"tolerance must be nonnegative, got {tol}")
    return tol


def as_numeric(values, exact: bool, ndim: int | None = None, name: str = "array") -> np.ndarray:
    """Convert ``values`` to an object array of Fractions or a float64 array."""
    if exact:
        try:
            arr = as_fraction_array(values)
        except (TypeError, ValueError) as exc:
            raise InputError(f"{name} must contain rational values: {exc}") from exc
    else:
        try:
            arr = np.asarray(values, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InputError(f"{name} must be numeric: {exc}") from exc
        if not np.all(np.isfinite(arr)):
            raise InputError(f"{name} contains non-finite values")
    if ndim is not None and arr.ndim != ndim:
        raise InputError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    return arr


def infer_exact(*arrays) -> bool:
    """True when every argument consists solely of ints and Fractions."""
    return all(is_exact(np.asarray(a, dtype=object)) for a in arrays)


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise InputError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InputError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_positive_real(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise InputError(f"{name} must be a real number, got {value!r}")
    if not value > 0 or not np.isfinite(float(value)):
        raise InputError(f"{name} must be positive and finite, got {value}")
    return value


def check_distribution(z, exact: bool | None = None, tol=None, name: str = "z") -> np.ndarray:
    """Validate a probability vector over counts ``0..n-1``.

    Parameters
    ----------
    z : array-like of shape (n,)
    exact : bool, optional
        Force the numeric mode.  Inferred from the entries when omitted.
    tol : float, optional
        Slack on the sum-to-one check (ignored in exact mode).

    Returns
    -------
    ndarray
        Object array of Fractions (exact) or float64 array.
    """
    if exact is None:
        exact = infer_exact(z)
    arr = as_numeric(z, exact, ndim=1, name=name)
    if arr.size == 0:
        raise InputError(f"{name} must be nonempty")
    if any(v < 0 for v in arr):
        raise InputError(f"{name} has negative entries")
    total = sum(arr)
    tol = resolve_tol(tol, exact)
    if exact:
        if total != 1:
            raise InputError(f"{name} must sum to exactly 1, got {total}")
    elif abs(total - 1.0) > max(tol, 1e-12) * arr.size:
        raise InputError(f"{name} must sum to 1, got {total}")
    return arr


def check_transition_matrix(T, exact: bool | None = None, n: int | None = None, name: str = "T") -> np.ndarray:
    """Validate a square nonnegative matrix; row sums are checked by callers."""
    if exact is None:
        exact = infer_exact(T)
    arr = as_numeric(T, exact, ndim=2, name=name)
    if arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InputError(f"{name} must be a nonempty square matrix, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InputError(f"{name} has size {arr.shape[0]}, expected {n}")
    return arr


def check_same_length(a, b, names=("a", "b")) -> None:
    if len(a) != len(b):
        raise InputError(f"length mismatch: {names[0]} has {len(a)}, {names[1]} has {len(b)}")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"``, an integer or a finite decimal string as a Fraction."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot parse rational value {text!r}") from exc
    return value
