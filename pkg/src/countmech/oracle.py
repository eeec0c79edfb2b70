"""Exact vertex enumeration of ``F``, ``U`` and their representation polytopes.

``R_U = {B >= 0 : Psi B 1 = 1}`` and ``R_F = R_U intersected with
{z Psi B = z}`` are the polytopes of scale coefficients; ``T = Psi B`` maps
them onto ``U`` and ``F``.  Everything here is exact rational arithmetic and
intended for ``n <= 4``.

Two independent routes produce the vertices of ``F`` and ``U``:

* the representation route maps the vertices of ``R_F`` / ``R_U`` through
  ``Psi`` and keeps the images that pass :func:`countmech.core.is_extreme`;
* the direct route fixes, column by column, which DP inequalities bind and
  solves the resulting equality system over the ``n**2`` entries.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._validation import check_distribution, check_positive_int
from .core import PrivacyParam, in_F, in_U, is_extreme
from .exact import solve_unique
from .exceptions import CapacityError, InputError
from .scales import enumerate_scales, psi_affinely_simplified, psi_linearly_simplified

__all__ = [
    "KINDS",
    "PolytopeDescriptor",
    "RepresentationReport",
    "enumerate_vertices",
    "enumerate_representation_vertices",
    "enumerate_direct",
    "verify_representation_theorems",
    "vertices_to_json",
    "format_fraction",
]

KINDS = ("F", "U", "RF", "RU")
CAPS = {"RF": 3, "RU": 3, "F": 4, "U": 4}


def format_fraction(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class PolytopeDescriptor:
    """Which polytope to enumerate.

    Parameters
    ----------
    kind : {"F", "U", "RF", "RU"}
    n : int
    lam : Fraction
        Rational ``lam > 1``.
    z : tuple of Fraction, optional
        Target distribution; required for ``F`` and ``RF``.
    """

    kind: str
    n: int
    lam: Fraction
    z: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown polytope {self.kind!r}; choose from {KINDS}")
        check_positive_int(self.n, "n")
        try:
            lam = Fraction(self.lam)
        except (TypeError, ValueError) as exc:
            raise InputError("lambda must be rational") from exc
        if lam <= 1:
            raise InputError(f"lambda must exceed 1, got {lam}")
        object.__setattr__(self, "lam", lam)
        if self.kind in ("F", "RF"):
            if self.z is None:
                raise InputError(f"{self.kind} requires a target distribution z")
            z = tuple(check_distribution(self.z, exact=True))
            if len(z) != self.n:
                raise InputError(f"z has length {len(z)}, expected {self.n}")
            object.__setattr__(self, "z", z)
        elif self.z is not None:
            raise InputError(f"{self.kind} takes no target distribution")

    @property
    def privacy(self) -> PrivacyParam:
        return PrivacyParam.from_lambda(self.lam)

    @property
    def fixed(self) -> bool:
        return self.z is not None


def _check_cap(desc: PolytopeDescriptor, cap: int | None):
    limit = CAPS[desc.kind] if cap is None else cap
    if desc.n > limit:
        raise CapacityError(f"enumeration of {desc.kind} is limited to n <= {limit}, got n={desc.n}")


def _key(M) -> tuple:
    return tuple(Fraction(x) for x in np.asarray(M, dtype=object).ravel())


def _dedupe(mats) -> list:
    seen = {}
    for M in mats:
        seen.setdefault(_key(M), M)
    return [seen[k] for k in sorted(seen)]


# --------------------------------------------------------------------------
# representation polytopes


def enumerate_representation_vertices(desc: PolytopeDescriptor, pruned: bool = True,
                                      cap: int | None = None) -> list:
    """Vertices of ``R_F`` or ``R_U`` by support enumeration.

    A vertex is the unique solution of the equality system restricted to its
    support.  With ``pruned=True`` supports are limited to ``|P| + n - 1``
    entries (``R_F``, ``P`` the positive indices of ``z``) or ``n`` entries
    (``R_U``), and every column ``j`` in ``P`` must be touched (``R_F``).
    ``pruned=False`` scans every support.
    """
    if desc.kind not in ("RF", "RU"):
        raise InputError("representation enumeration needs kind RF or RU")
    _check_cap(desc, cap)
    n, p = desc.n, desc.privacy
    psi = enumerate_scales(n, p).matrix
    k = psi.shape[1]
    fixed = desc.fixed
    z = desc.z
    n_rows = 2 * n if fixed else n
    rhs = [Fraction(1)] * n + (list(z) if fixed else [])

    def column(u, j):
        col = list(psi[:, u])
        if fixed:
            zpsi = sum(z[i] * psi[i, u] for i in range(n))
            col += [zpsi if jj == j else Fraction(0) for jj in range(n)]
        return col

    variables = [(u, j) for u in range(k) for j in range(n)]
    cols = {v: column(*v) for v in variables}
    positive = [j for j in range(n) if fixed and z[j] > 0]
    if pruned:
        limit = len(positive) + n - 1 if fixed else n
    else:
        limit = len(variables)
    found = []
    for size in range(1, min(limit, len(variables)) + 1):
        for support in itertools.combinations(variables, size):
            if pruned and fixed:
                touched = {j for _, j in support}
                if any(j not in touched for j in positive):
                    continue
            a = [[cols[v][r] for v in support] for r in range(n_rows)]
            x = solve_unique(a, rhs)
            if x is None or any(val <= 0 for val in x):
                continue
            B = np.empty((k, n), dtype=object)
            B[:] = Fraction(0)
            for (u, j), val in zip(support, x):
                B[u, j] = val
            found.append(B)
    return _dedupe(found)


# --------------------------------------------------------------------------
# direct route over the n**2 entries


def _column_faces(n: int):
    """Per column: ``None`` (zero column) or a tuple over adjacent pairs of
    ``"u"`` (``t_(i+1) = lam t_i``), ``"d"`` (``t_(i+1) = t_i / lam``) or
    ``None`` (not binding)."""
    faces = [None]
    faces.extend(itertools.product(("u", "d", None), repeat=n - 1))
    return faces


def _segments(face, lam):
    """Segments of a positive column as lists of ``(row, relative value)``."""
    segs = [[(0, Fraction(1))]]
    for i, b in enumerate(face):
        if b is None:
            segs.append([(i + 1, Fraction(1))])
        else:
            prev = segs[-1][-1][1]
            segs[-1].append((i + 1, prev * lam if b == "u" else prev / lam))
    return segs


def enumerate_direct(desc: PolytopeDescriptor, cap: int | None = None) -> list:
    """Vertices of ``F`` or ``U`` from binding-constraint sets.

    Each column is either zero or positive with a chosen set of binding DP
    inequalities; a positive column then has one free parameter per linked
    segment.  A choice yields a vertex when the row-sum (and fixed-point)
    equalities determine those parameters uniquely and the result is feasible.
    """
    if desc.kind not in ("F", "U"):
        raise InputError("direct enumeration needs kind F or U")
    _check_cap(desc, cap)
    n, p, z = desc.n, desc.privacy, desc.z
    lam = desc.lam
    fixed = desc.fixed
    max_dof = 2 * n - 1 if fixed else n
    options = [(face, _segments(face, lam) if face is not None else []) for face in _column_faces(n)]
    rhs = [Fraction(1)] * n + (list(z) if fixed else [])
    found = []

    def solve(choice):
        vars_ = [(j, seg) for j, (_, segs) in enumerate(choice) for seg in segs]
        a = []
        for i in range(n):
            a.append([next((v for r, v in seg if r == i), Fraction(0)) for _, seg in vars_])
        if fixed:
            for j in range(n):
                a.append([sum(z[r] * v for r, v in seg) if jj == j else Fraction(0) for jj, seg in vars_])
        x = solve_unique(a, rhs)
        if x is None:
            return
        T = np.empty((n, n), dtype=object)
        T[:] = Fraction(0)
        for (j, seg), val in zip(vars_, x):
            for r, v in seg:
                T[r, j] = val * v
        ok = in_F(T, list(z), p) if fixed else in_U(T, p)
        if ok:
            found.append(T)

    def walk(j, choice, dof):
        if j == n:
            if dof:
                solve(choice)
            return
        for face, segs in options:
            if face is None and fixed and z[j] > 0:
                continue
            if dof + len(segs) > max_dof:
                continue
            walk(j + 1, choice + [(face, segs)], dof + len(segs))

    walk(0, [], 0)
    return _dedupe(found)


# --------------------------------------------------------------------------
# public entry points


def _images(desc: PolytopeDescriptor, reps: list) -> list:
    psi = enumerate_scales(desc.n, desc.privacy).matrix
    return _dedupe([psi.dot(B) for B in reps])


def _filter_extreme(desc: PolytopeDescriptor, mats: list) -> list:
    z = list(desc.z) if desc.fixed else None
    return [T for T in mats if is_extreme(T, desc.privacy, z)]


def _representation_kind(desc: PolytopeDescriptor) -> PolytopeDescriptor:
    return PolytopeDescriptor("RF" if desc.fixed else "RU", desc.n, desc.lam, desc.z)


def enumerate_vertices(desc: PolytopeDescriptor, route: str = "auto") -> list:
    """Sorted list of the extreme points of the described polytope.

    Parameters
    ----------
    desc : PolytopeDescriptor
    route : {"auto", "representation", "direct"}
        For ``F``/``U``: map the representation vertices through ``Psi`` and
        filter by :func:`is_extreme`, or use :func:`enumerate_direct`.
        ``auto`` uses the representation route where its enumeration is
        within the cap (``n <= 3``) and the direct route otherwise.

    Raises
    ------
    CapacityError
        Beyond ``n = 3`` for ``RF``/``RU`` or ``n = 4`` for ``F``/``U``.
    """
    if route not in ("auto", "representation", "direct"):
        raise InputError(f"unknown route {route!r}")
    _check_cap(desc, None)
    if desc.kind in ("RF", "RU"):
        return enumerate_representation_vertices(desc)
    use_direct = route == "direct" or (route == "auto" and desc.n > CAPS["RF"])
    if use_direct:
        return enumerate_direct(desc)
    reps = enumerate_representation_vertices(_representation_kind(desc))
    return _filter_extreme(desc, _images(desc, reps))


@dataclass
class RepresentationReport:
    """Outcome of :func:`verify_representation_theorems`.

    ``surjective``: every vertex is ``Psi B`` for some representation vertex.
    ``non_extreme_images``: representation vertices whose image is not a vertex.
    ``collisions``: pairs of distinct representation vertices with one image.
    """

    kind: str
    n: int
    n_vertices: int
    n_representation_vertices: int
    surjective: bool
    non_extreme_images: list = field(default_factory=list)
    collisions: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _dump(M) -> str:
    return "[" + "; ".join(", ".join(format_fraction(x) for x in row) for row in M) + "]"


def verify_representation_theorems(desc: PolytopeDescriptor) -> RepresentationReport:
    """Check the ``Psi`` map between representation vertices and vertices.

    Asserts that (a) every vertex of ``F``/``U`` is the image of some
    representation vertex, (b) some representation vertex maps to a
    non-extreme point and (c) two distinct representation vertices share an
    image.  Failures are listed with explicit matrices.
    """
    base = desc if desc.kind in ("F", "U") else PolytopeDescriptor(
        "F" if desc.fixed else "U", desc.n, desc.lam, desc.z)
    rep_desc = _representation_kind(base)
    _check_cap(rep_desc, None)
    p = base.privacy
    z = list(base.z) if base.fixed else None
    psi = enumerate_scales(base.n, p).matrix
    reps = enumerate_representation_vertices(rep_desc)
    vertices = enumerate_direct(base)
    vertex_keys = {_key(T) for T in vertices}
    by_image: dict = {}
    non_extreme = []
    for B in reps:
        T = psi.dot(B)
        by_image.setdefault(_key(T), []).append(B)
        if _key(T) not in vertex_keys and not is_extreme(T, p, z):
            non_extreme.append((B, T))
    missing = [T for T in vertices if _key(T) not in by_image]
    collisions = [(group[0], group[1], psi.dot(group[0]))
                  for key, group in by_image.items() if key in vertex_keys and len(group) > 1]
    report = RepresentationReport(base.kind, base.n, len(vertices), len(reps), not missing,
                                  non_extreme, collisions)
    for T in missing:
        report.failures.append(f"vertex with no representation preimage: {_dump(T)}")
    if not non_extreme:
        report.failures.append("every representation vertex maps to a vertex")
    if not collisions:
        report.failures.append("no two representation vertices share an image vertex")
    checker = psi_affinely_simplified if base.fixed else None
    for B in reps:
        simple = checker(B, base.z, psi) if checker else psi_linearly_simplified(B, psi)
        if not simple:
            report.failures.append(f"representation vertex fails the simplified test: {_dump(B)}")
    return report


def vertices_to_json(desc: PolytopeDescriptor, vertices: list) -> dict:
    """JSON-ready document with every entry as a ``"p/q"`` string."""
    return {
        "kind": desc.kind,
        "n": desc.n,
        "lambda": format_fraction(desc.lam),
        "z": None if desc.z is None else [format_fraction(x) for x in desc.z],
        "vertices": [[[format_fraction(x) for x in row] for row in M] for M in vertices],
        "count": len(vertices),
    }
