import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crtarray import rings
from crtarray.rings import (EISENSTEIN, GAUSSIAN, QuadInt, RingSpec, UnsupportedPrimeError,
                            UnsupportedRingError, coprime_oracle, coprimality_conditions,
                            conjugate, embedding_generator, format_quadint, get_ring,
                            is_associate, is_coprime, matrix_rep, multiply, norm,
                            parse_quadint, smith_normal_form, split_prime, units)

RINGS = [GAUSSIAN, EISENSTEIN]
coord = st.integers(-30, 30)
nonzero = st.tuples(coord, coord).filter(lambda u: u != (0, 0))


def minors_gcd(M):
    """d1 * d2 of an n x 2 matrix from its 2x2 minors (determinantal divisors)."""
    M = [[int(x) for x in row] for row in M]
    g = 0
    for r1, r2 in itertools.combinations(range(len(M)), 2):
        g = math.gcd(g, M[r1][0] * M[r2][1] - M[r1][1] * M[r2][0])
    return g


def entries_gcd(M):
    return math.gcd(*[int(x) for row in M for x in row])


# ---------------------------------------------------------------- ring basics

def test_ring_discriminants():
    assert GAUSSIAN.disc == -4
    assert EISENSTEIN.disc == -3
    assert GAUSSIAN.is_imaginary and EISENSTEIN.is_imaginary


def test_degenerate_ring_rejected():
    with pytest.raises(ValueError):
        RingSpec(2, 1)


def test_get_ring_by_name_and_pair():
    assert get_ring("gaussian") == GAUSSIAN
    assert get_ring("Eisenstein") == EISENSTEIN
    assert get_ring((0, 1)) == GAUSSIAN
    with pytest.raises(UnsupportedRingError):
        get_ring("octonions")


def test_norm_examples():
    assert norm(GAUSSIAN, (3, 2)) == 13
    assert norm(GAUSSIAN, (-1, 4)) == 17
    assert norm(EISENSTEIN, (1, -4)) == 13
    assert norm(EISENSTEIN, (2, 1)) == 7
    assert norm(EISENSTEIN, (-1, 4)) == 13


def test_units_counts():
    assert len(units(GAUSSIAN)) == 4
    assert len(units(EISENSTEIN)) == 6


def test_real_ring_has_no_embedding():
    with pytest.raises(UnsupportedRingError):
        embedding_generator(RingSpec(0, -2, "sqrt2"))


@pytest.mark.parametrize("ring", RINGS)
@settings(max_examples=200, deadline=None)
@given(m=st.tuples(coord, coord), n=st.tuples(coord, coord))
def test_norm_is_multiplicative(ring, m, n):
    assert norm(ring, multiply(ring, m, n)) == norm(ring, m) * norm(ring, n)


@pytest.mark.parametrize("ring", RINGS)
@settings(max_examples=200, deadline=None)
@given(m=st.tuples(coord, coord))
def test_norm_matches_embedding_and_conjugate(ring, m):
    G = embedding_generator(ring)
    z = G @ np.array(m, float)
    assert math.isclose(z @ z, norm(ring, m), abs_tol=1e-9)
    assert multiply(ring, m, conjugate(ring, m)) == (norm(ring, m), 0)


@pytest.mark.parametrize("ring", RINGS)
@settings(max_examples=100, deadline=None)
@given(m=st.tuples(coord, coord), n=st.tuples(coord, coord))
def test_matrix_rep_is_multiplication(ring, m, n):
    prod = np.array(matrix_rep(ring, m), dtype=np.int64) @ np.array(n, dtype=np.int64)
    assert tuple(int(x) for x in prod) == multiply(ring, m, n)


@pytest.mark.parametrize("ring", RINGS)
@settings(max_examples=100, deadline=None)
@given(m=st.tuples(coord, coord))
def test_det_of_matrix_rep_is_norm(ring, m):
    assert rings.det2(matrix_rep(ring, m)) == norm(ring, m)


# ---------------------------------------------------------------- coprimality

def test_worked_examples():
    assert is_coprime(GAUSSIAN, (-1, -2), (-1, 2))
    assert is_coprime(GAUSSIAN, (-1, 2), (-1, 4))
    assert not is_coprime(GAUSSIAN, (1, 1), (1, -1))  # both divisible by the prime over 2
    assert not is_coprime(GAUSSIAN, (3, 0), (0, 3))


def test_zero_operand_rejected():
    with pytest.raises(ValueError):
        is_coprime(GAUSSIAN, (0, 0), (1, 2))
    with pytest.raises(ValueError):
        coprime_oracle(GAUSSIAN, (1, 2), (0, 0))


@pytest.mark.parametrize("ring", RINGS)
def test_exhaustive_sweep_matches_oracle(ring):
    pts = [(a, b) for a in range(-5, 6) for b in range(-5, 6) if (a, b) != (0, 0)]
    for m, n in itertools.product(pts, pts):
        c1, c2 = coprimality_conditions(ring, m, n)
        oracle = coprime_oracle(ring, m, n)
        assert c1 == c2 == oracle, (m, n)


@pytest.mark.parametrize("ring", RINGS)
@settings(max_examples=300, deadline=None)
@given(m=nonzero, n=nonzero)
def test_oracle_agrees_with_determinantal_divisors(ring, m, n):
    stacked = np.vstack([matrix_rep(ring, m).T, matrix_rep(ring, n).T])
    factors = smith_normal_form(stacked)
    assert len(factors) == 2
    assert factors[0] == entries_gcd(stacked)
    assert factors[0] * factors[1] == minors_gcd(stacked)
    assert factors[1] % factors[0] == 0
    assert coprime_oracle(ring, m, n) == (minors_gcd(stacked) == 1)


@settings(max_examples=200, deadline=None)
@given(M=st.lists(st.lists(st.integers(-50, 50), min_size=3, max_size=3), min_size=2, max_size=4))
def test_smith_form_divisor_chain(M):
    f = smith_normal_form(M)
    if f:
        assert f[0] == entries_gcd(M)
    for a, b in zip(f, f[1:]):
        assert b % a == 0


@pytest.mark.parametrize("ring", RINGS)
@settings(max_examples=200, deadline=None)
@given(m=nonzero, n=nonzero)
def test_coprimality_symmetric_and_unit_invariant(ring, m, n):
    assert is_coprime(ring, m, n) == is_coprime(ring, n, m)
    for u in units(ring):
        assert is_coprime(ring, multiply(ring, u, m), n) == is_coprime(ring, m, n)


@pytest.mark.parametrize("ring", RINGS)
@settings(max_examples=100, deadline=None)
@given(m=nonzero)
def test_unit_coprime_to_everything(ring, m):
    assert is_coprime(ring, (1, 0), m)


# ---------------------------------------------------------------- primes

@pytest.mark.parametrize("ring,p,expected", [
    (GAUSSIAN, 5, (1, 2)),
    (GAUSSIAN, 13, (3, 2)),
    (GAUSSIAN, 17, (1, 4)),
    (EISENSTEIN, 7, (-1, 3)),
    (EISENSTEIN, 13, (-1, 4)),
])
def test_split_prime_generates_expected_ideal(ring, p, expected):
    m, mbar = split_prime(ring, p)
    assert norm(ring, m) == norm(ring, mbar) == p
    assert is_coprime(ring, m, mbar)
    assert is_associate(ring, m, expected) or is_associate(ring, mbar, expected)


def test_split_prime_frozen_representatives():
    assert split_prime(GAUSSIAN, 13) == ((2, -3), (2, 3))
    assert split_prime(EISENSTEIN, 13) == ((1, -4), (-3, 4))
    assert split_prime(EISENSTEIN, 7) == ((1, -3), (-2, 3))


@pytest.mark.parametrize("ring,p", [(GAUSSIAN, 4), (GAUSSIAN, 3), (GAUSSIAN, 2),
                                    (EISENSTEIN, 5), (EISENSTEIN, 3), (GAUSSIAN, 1)])
def test_split_prime_rejects(ring, p):
    with pytest.raises(UnsupportedPrimeError):
        split_prime(ring, p)


# ---------------------------------------------------------------- text

@pytest.mark.parametrize("text,expected", [
    ("-1+2i", (-1, 2)), ("-1-2i", (-1, -2)), ("3-2w", (3, -2)), ("5", (5, 0)),
    ("(4,-7)", (4, -7)), ("i", (0, 1)), ("-i", (0, -1)), ("2+i", (2, 1)), ("-3w", (0, -3)),
])
def test_parse_quadint(text, expected):
    assert parse_quadint(GAUSSIAN, text) == expected


@pytest.mark.parametrize("ring", RINGS)
@settings(max_examples=200, deadline=None)
@given(m=st.tuples(coord, coord))
def test_format_parse_roundtrip(ring, m):
    assert parse_quadint(ring, format_quadint(ring, m)) == QuadInt(*m)
