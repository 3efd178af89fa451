"""Sublattices of a ring lattice and exact Voronoi-cell membership.

Points are integer pairs in ring coordinates (basis ``{1, q}``). The planar
metric is ``|G u|^2``, which for an imaginary quadratic ring equals the norm
``a^2 - B a b + C b^2`` and is therefore an exact integer.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .rings import RingSpec, det2, gram_form, matrix_rep


class Boundary(enum.Enum):
    CLOSED = "closed"
    OPEN = "open"
    HALF_OPEN = "half_open"


def inner2(ring: RingSpec, u, v) -> int:
    """Twice the planar inner product ``<G u, G v>`` (an integer)."""
    g11, g12, g22 = gram_form(ring)
    return g11 * u[0] * v[0] + g12 * (u[0] * v[1] + u[1] * v[0]) + g22 * u[1] * v[1]


def sqnorm(ring: RingSpec, u) -> int:
    """``|G u|^2`` as an integer."""
    return inner2(ring, u, u) // 2


@dataclass(frozen=True, eq=False)
class SubLattice:
    """Sublattice ``{M k : k in Z^2}`` of the ring lattice.

    ``basis`` columns are the generating vectors in ring coordinates.
    """

    basis: tuple
    ring: RingSpec

    def __post_init__(self):
        M = tuple(tuple(int(x) for x in row) for row in np.asarray(self.basis, dtype=object))
        object.__setattr__(self, "basis", M)
        if det2(M) == 0:
            raise ValueError("sublattice basis is singular")

    @classmethod
    def principal(cls, ring: RingSpec, m) -> "SubLattice":
        """Lattice of the principal ideal ``<m>``."""
        return cls(matrix_rep(ring, m), ring)

    @classmethod
    def scaled(cls, ring: RingSpec, s: int) -> "SubLattice":
        """``s`` times the full ring lattice."""
        return cls(((s, 0), (0, s)), ring)

    @property
    def index(self) -> int:
        return abs(det2(self.basis))

    def columns(self):
        M = self.basis
        return (M[0][0], M[1][0]), (M[0][1], M[1][1])

    def point(self, k) -> tuple[int, int]:
        M = self.basis
        return (M[0][0] * k[0] + M[0][1] * k[1], M[1][0] * k[0] + M[1][1] * k[1])

    def contains(self, u) -> bool:
        M = self.basis
        det = det2(M)
        # adjugate solve, exact
        k0 = M[1][1] * u[0] - M[0][1] * u[1]
        k1 = -M[1][0] * u[0] + M[0][0] * u[1]
        return k0 % det == 0 and k1 % det == 0

    def __eq__(self, other):
        if not isinstance(other, SubLattice) or other.ring != self.ring:
            return NotImplemented
        return (self.index == other.index
                and all(other.contains(c) for c in self.columns()))

    def __hash__(self):
        return hash((self.index, self.ring))

    @cached_property
    def reduced_basis(self) -> tuple[tuple[int, int], tuple[int, int]]:
        """Gauss-Lagrange reduced basis under the planar metric."""
        b1, b2 = self.columns()
        if sqnorm(self.ring, b1) > sqnorm(self.ring, b2):
            b1, b2 = b2, b1
        while True:
            # round(<b1,b2>/<b1,b1>) with exact integers
            num, den = inner2(self.ring, b1, b2), inner2(self.ring, b1, b1)
            mu = (2 * num + den) // (2 * den)
            b2 = (b2[0] - mu * b1[0], b2[1] - mu * b1[1])
            if sqnorm(self.ring, b2) >= sqnorm(self.ring, b1):
                return b1, b2
            b1, b2 = b2, b1


def relevant_vectors(center: SubLattice) -> list[tuple[int, int]]:
    """Lattice vectors whose bisectors bound the Voronoi cell of ``center``.

    For a reduced basis ``b1, b2`` these are ``±b1``, ``±b2`` and the
    diagonal(s) ``±(b1 - s b2)`` with ``s * <b1, b2> >= 0``: six vectors for a
    hexagonal cell, eight for a rectangular one (the diagonals then only
    touch the corners, which fixes the corner tie-break).
    """
    ring = center.ring
    b1, b2 = center.reduced_basis
    ip = inner2(ring, b1, b2)
    vecs = [b1, b2]
    signs = [1, -1] if ip == 0 else [1 if ip > 0 else -1]
    for s in signs:
        vecs.append((b1[0] - s * b2[0], b1[1] - s * b2[1]))
    out = []
    for v in vecs:
        out.append(v)
        out.append((-v[0], -v[1]))
    return sorted(out)


def _lex_negative(v) -> bool:
    return v[0] < 0 or (v[0] == 0 and v[1] < 0)


@dataclass(frozen=True)
class CellSpec:
    """Voronoi cell of ``center`` around the origin with a boundary rule."""

    center: SubLattice
    boundary: Boundary = Boundary.HALF_OPEN

    @cached_property
    def relevant(self) -> list[tuple[int, int]]:
        return relevant_vectors(self.center)

    @cached_property
    def _constraints(self):
        ring = self.center.ring
        return [(v, sqnorm(ring, v)) for v in self.relevant]

    @property
    def sq_circumradius_bound(self) -> int:
        """Integer upper bound on ``|G u|^2`` over the closed cell."""
        return max(nv for _, nv in self._constraints)

    def contains(self, u) -> bool:
        return voronoi_membership(self, u)


def voronoi_membership(cell: CellSpec, u) -> bool:
    """Exact test of ``|G u| <= |G (u - v)|`` against every relevant ``v``.

    CLOSED admits ties, OPEN rejects them and HALF_OPEN admits a tie only if
    every tying relevant vector is lexicographically negative.
    """
    ring = cell.center.ring
    for v, nv in cell._constraints:
        # |u|^2 <= |u - v|^2  <=>  2<u, v> <= |v|^2
        lhs = inner2(ring, u, v)
        if lhs > nv:
            return False
        if lhs == nv:
            if cell.boundary is Boundary.OPEN:
                return False
            if cell.boundary is Boundary.HALF_OPEN and not _lex_negative(v):
                return False
    return True


def _k_range(sub: SubLattice, r2: int) -> int:
    """Coefficient bound so that ``|G M k|^2 <= r2`` implies ``|k_i| <= bound``."""
    g11, g12, g22 = gram_form(sub.ring)
    gram = np.array([[g11, g12], [g12, g22]], dtype=float) / 2.0
    M = np.array(sub.basis, dtype=float)
    lam = np.linalg.eigvalsh(M.T @ gram @ M)[0]
    return int(math.isqrt(int(r2 / lam) + 1)) + 2


def enumerate_points(sub: SubLattice, cell: CellSpec) -> list[tuple[int, int]]:
    """All points of ``sub`` inside ``cell``, sorted."""
    if sub.ring != cell.center.ring:
        raise ValueError("sublattice and cell live in different rings")
    r2 = cell.sq_circumradius_bound
    bound = _k_range(sub, r2)
    out = []
    for k0 in range(-bound, bound + 1):
        for k1 in range(-bound, bound + 1):
            u = sub.point((k0, k1))
            if sqnorm(sub.ring, u) <= r2 and voronoi_membership(cell, u):
                out.append(u)
    return sorted(out)


def lattice_points_in_cell(ring: RingSpec, cell: CellSpec) -> list[tuple[int, int]]:
    """Points of the full ring lattice inside ``cell``."""
    return enumerate_points(SubLattice.scaled(ring, 1), cell)


def voronoi_cell(ring: RingSpec, scale: int, boundary=Boundary.CLOSED) -> CellSpec:
    """Cell of the scaled ring lattice ``scale * Lambda``."""
    return CellSpec(SubLattice.scaled(ring, scale), Boundary(boundary))


def reflect(u, t) -> tuple[int, int]:
    """Point reflection ``t - u`` (through the midpoint ``t / 2``)."""
    return (t[0] - u[0], t[1] - u[1])
