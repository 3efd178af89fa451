"""Exact arithmetic in quadratic integer rings Z[q], q a root of X^2 + B X + C.

Elements are stored as coordinate pairs ``(a, b)`` meaning ``a + b q``.
All arithmetic stays in Python integers, so norms never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class QuadInt(NamedTuple):
    """Quadratic integer ``a + b q``; the owning ring is carried by context."""

    a: int
    b: int

    def __neg__(self) -> "QuadInt":
        return QuadInt(-self.a, -self.b)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0


@dataclass(frozen=True)
class RingSpec:
    """The ring Z[q] with minimal polynomial ``X^2 + B X + C``."""

    B: int
    C: int
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.disc == 0:
            raise ValueError(f"X^2 + {self.B}X + {self.C} has a repeated root")

    @property
    def disc(self) -> int:
        return self.B * self.B - 4 * self.C

    @property
    def is_imaginary(self) -> bool:
        return self.disc < 0

    def __str__(self):
        return self.name or f"Z[q], q^2 + {self.B}q + {self.C} = 0"


GAUSSIAN = RingSpec(0, 1, "gaussian")
EISENSTEIN = RingSpec(-1, 1, "eisenstein")

_NAMED_RINGS = {"gaussian": GAUSSIAN, "eisenstein": EISENSTEIN}


class UnsupportedRingError(ValueError):
    pass


class UnsupportedPrimeError(ValueError):
    pass


def get_ring(spec) -> RingSpec:
    """Look up a ring by name ("gaussian", "eisenstein") or a ``(B, C)`` pair."""
    if isinstance(spec, RingSpec):
        return spec
    if isinstance(spec, str):
        key = spec.strip().lower()
        if key in _NAMED_RINGS:
            return _NAMED_RINGS[key]
        parts = key.replace("(", "").replace(")", "").split(",")
        if len(parts) == 2:
            return RingSpec(int(parts[0]), int(parts[1]))
        raise UnsupportedRingError(f"unknown ring {spec!r}")
    B, C = spec
    for ring in _NAMED_RINGS.values():
        if (ring.B, ring.C) == (int(B), int(C)):
            return ring
    return RingSpec(int(B), int(C))


def as_quadint(m) -> QuadInt:
    if isinstance(m, QuadInt):
        return m
    if isinstance(m, (int, np.integer)):
        return QuadInt(int(m), 0)
    a, b = m
    return QuadInt(int(a), int(b))


def norm(ring: RingSpec, m) -> int:
    """Return ``a^2 - B a b + C b^2``, the product of ``m`` with its conjugate."""
    a, b = as_quadint(m)
    return a * a - ring.B * a * b + ring.C * b * b


def conjugate(ring: RingSpec, m) -> QuadInt:
    """Algebraic conjugate: replace q by its other root ``-B - q``."""
    a, b = as_quadint(m)
    return QuadInt(a - ring.B * b, -b)


def multiply(ring: RingSpec, m, n) -> QuadInt:
    a1, b1 = as_quadint(m)
    a2, b2 = as_quadint(n)
    # q^2 = -B q - C
    return QuadInt(a1 * a2 - ring.C * b1 * b2,
                   a1 * b2 + a2 * b1 - ring.B * b1 * b2)


def add(ring: RingSpec, m, n) -> QuadInt:
    m, n = as_quadint(m), as_quadint(n)
    return QuadInt(m.a + n.a, m.b + n.b)


def product(ring: RingSpec, elements) -> QuadInt:
    out = QuadInt(1, 0)
    for m in elements:
        out = multiply(ring, out, m)
    return out


def matrix_rep(ring: RingSpec, m) -> np.ndarray:
    """Integer matrix of multiplication by ``m`` in the basis ``{1, q}``.

    Columns are the coordinates of ``m`` and ``m q``, so the columns span the
    principal ideal ``<m>`` as a sublattice of Z^2.
    """
    a, b = as_quadint(m)
    return np.array([[a, -ring.C * b], [b, a - ring.B * b]], dtype=object)


def det2(M) -> int:
    return int(M[0][0]) * int(M[1][1]) - int(M[0][1]) * int(M[1][0])


def units(ring: RingSpec) -> list[QuadInt]:
    """Elements of norm 1 (finite for imaginary rings)."""
    if not ring.is_imaginary:
        raise UnsupportedRingError("unit group is infinite for real quadratic rings")
    # a^2 - B a b + C b^2 = 1 bounds |b| by 2/sqrt(-disc) and |a| accordingly
    bound = 2
    return [QuadInt(a, b)
            for a in range(-bound, bound + 1)
            for b in range(-bound, bound + 1)
            if norm(ring, (a, b)) == 1]


def is_associate(ring: RingSpec, m, n) -> bool:
    """True when ``<m> == <n>``, i.e. ``n = u m`` for a unit ``u``."""
    n = as_quadint(n)
    return any(multiply(ring, u, m) == n for u in units(ring))


def _criterion_gcds(ring: RingSpec, m: QuadInt, n: QuadInt) -> tuple[int, int]:
    m1, m2 = m
    n1, n2 = n
    Nm, Nn = norm(ring, m), norm(ring, n)
    first = math.gcd(Nm, Nn, m1 * n2 - m2 * n1)
    second = math.gcd(Nm, Nn, m1 * n1 - ring.B * m1 * n2 + ring.C * m2 * n2)
    return first, second


def coprimality_conditions(ring: RingSpec, m, n) -> tuple[bool, bool]:
    """Evaluate both gcd criteria for ``<m> + <n> = Z[q]`` separately."""
    m, n = as_quadint(m), as_quadint(n)
    if m.is_zero() or n.is_zero():
        raise ValueError("coprimality is undefined for a zero operand")
    first, second = _criterion_gcds(ring, m, n)
    return first == 1, second == 1


def is_coprime(ring: RingSpec, m, n) -> bool:
    """Coprimality via ``gcd(N(m), N(n), m1 n2 - m2 n1) == 1``.

    The second criterion ``gcd(N(m), N(n), m1 n1 - B m1 n2 + C m2 n2) == 1``
    must agree; under ``python -O`` the cross-check is skipped.

    >>> is_coprime(GAUSSIAN, (-1, 2), (-1, 4))
    True
    >>> is_coprime(GAUSSIAN, (1, 1), (1, -1))
    False
    """
    first, second = coprimality_conditions(ring, m, n)
    assert first == second, f"gcd criteria disagree for {m}, {n} in {ring}"
    return first


def smith_normal_form(M) -> list[int]:
    """Invariant factors of an integer matrix, by unimodular elimination.

    Returns the nonzero diagonal entries ``d1 | d2 | ...`` of the Smith form.
    Works on any shape; intended for the small stacked matrices used here.
    """
    A = [[int(x) for x in row] for row in M]
    rows, cols = len(A), len(A[0]) if A else 0
    factors = []
    t = 0
    while t < min(rows, cols):
        nonzero = [(abs(A[i][j]), i, j) for i in range(t, rows)
                   for j in range(t, cols) if A[i][j] != 0]
        if not nonzero:
            break
        _, pi, pj = min(nonzero)
        A[t], A[pi] = A[pi], A[t]
        for row in A:
            row[t], row[pj] = row[pj], row[t]
        while True:
            pivot = A[t][t]
            done = True
            for i in range(t + 1, rows):
                q = A[i][t] // pivot
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                if A[i][t] != 0:
                    done = False
            for j in range(t + 1, cols):
                q = A[t][j] // pivot
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                if A[t][j] != 0:
                    done = False
            if done:
                # divisibility: fold any entry not divisible by the pivot back in
                bad = next(((i, j) for i in range(t + 1, rows)
                            for j in range(t + 1, cols) if A[i][j] % pivot), None)
                if bad is None:
                    break
                A[t] = [x + y for x, y in zip(A[t], A[bad[0]])]
                continue
            # move the smallest nonzero entry of row/column t to the pivot
            cands = [(abs(A[i][t]), i, t) for i in range(t, rows) if A[i][t]]
            cands += [(abs(A[t][j]), t, j) for j in range(t, cols) if A[t][j]]
            _, pi, pj = min(cands)
            A[t], A[pi] = A[pi], A[t]
            for row in A:
                row[t], row[pj] = row[pj], row[t]
        factors.append(abs(A[t][t]))
        t += 1
    return factors


def coprime_oracle(ring: RingSpec, m, n) -> bool:
    """Independent coprimality check: ``<m> + <n>`` is the whole ring.

    The ideal ``<m> + <n>`` is the column span of ``[B_m | B_n]`` (equivalently
    the row span of the stacked transposes); it equals Z^2 exactly when both
    invariant factors of the stacked 4x2 matrix are 1.
    """
    m, n = as_quadint(m), as_quadint(n)
    if m.is_zero() or n.is_zero():
        raise ValueError("coprimality is undefined for a zero operand")
    stacked = np.vstack([matrix_rep(ring, m).T, matrix_rep(ring, n).T])
    return smith_normal_form(stacked) == [1, 1]


def split_prime(ring: RingSpec, p: int) -> tuple[QuadInt, QuadInt]:
    """Split a rational prime into a coprime conjugate pair ``(m, conj(m))``.

    The representative is the lexicographically smallest ``(a, b)`` with
    ``a > 0`` and ``N(a + b q) = p``.
    """
    p = int(p)
    if p < 2 or any(p % k == 0 for k in range(2, math.isqrt(p) + 1)):
        raise UnsupportedPrimeError(f"{p} is not a rational prime")
    for a in range(1, p + 1):
        for b in range(-p, p + 1):
            if norm(ring, (a, b)) == p:
                m = QuadInt(a, b)
                mbar = conjugate(ring, m)
                if not is_coprime(ring, m, mbar):
                    raise UnsupportedPrimeError(
                        f"{p} ramifies in {ring}: {m} and its conjugate share a factor")
                return m, mbar
    raise UnsupportedPrimeError(f"{p} does not split in {ring}")


def embedding_generator(ring: RingSpec) -> np.ndarray:
    """Real 2x2 generator G mapping ring coordinates to the complex plane.

    Column j is the planar position of basis element ``1`` or ``q``; for the
    Eisenstein ring this is ``[[1, 1/2], [0, sqrt(3)/2]]``.
    """
    if not ring.is_imaginary:
        raise UnsupportedRingError(f"{ring} is not imaginary quadratic; no planar lattice")
    return np.array([[1.0, -ring.B / 2.0],
                     [0.0, math.sqrt(-ring.disc) / 2.0]])


def gram_form(ring: RingSpec) -> tuple[int, int, int]:
    """Integer coefficients ``(2, -B, 2C)`` of twice the Gram matrix G^T G.

    ``|G u|^2 = norm(u)`` for every ring coordinate ``u``.
    """
    return 2, -ring.B, 2 * ring.C


def format_quadint(ring: RingSpec, m) -> str:
    a, b = as_quadint(m)
    sym = {"gaussian": "i", "eisenstein": "w"}.get(ring.name, "q")
    if b == 0:
        return str(a)
    coeff = "" if abs(b) == 1 else str(abs(b))
    if a == 0:
        return f"{'-' if b < 0 else ''}{coeff}{sym}"
    return f"{a}{'+' if b > 0 else '-'}{coeff}{sym}"


def parse_quadint(ring: RingSpec, text: str) -> QuadInt:
    """Parse ``"-1+2i"``, ``"3-2w"``, ``"5"`` or ``"(a,b)"``."""
    s = text.strip().replace(" ", "").replace("ω", "w")
    if s.startswith("(") or "," in s:
        a, b = s.strip("()").split(",")
        return QuadInt(int(a), int(b))
    if s and s[-1] in "iwq":
        body = s[:-1]
        # split at the last sign that is not leading
        k = max(body.rfind("+", 1), body.rfind("-", 1))
        if k <= 0:
            coeff = body if body not in ("", "+", "-") else body + "1"
            return QuadInt(0, int(coeff))
        coeff = body[k:]
        if coeff in ("+", "-"):
            coeff += "1"
        return QuadInt(int(body[:k]), int(coeff))
    return QuadInt(int(s), 0)
