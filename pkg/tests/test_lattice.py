import itertools

import pytest
from hypothesis import given, settings, strategies as st

from crtarray.lattice import (Boundary, CellSpec, SubLattice, enumerate_points, inner2,
                              lattice_points_in_cell, reflect, relevant_vectors, sqnorm,
                              voronoi_cell, voronoi_membership)
from crtarray.rings import EISENSTEIN, GAUSSIAN, det2, matrix_rep, norm

RINGS = [GAUSSIAN, EISENSTEIN]


def brute_cell(sub: SubLattice, boundary: Boundary, box: int, reach: int = 3):
    """Closest-point oracle: compare against every sublattice point nearby."""
    ring = sub.ring
    others = [sub.point(k) for k in itertools.product(range(-reach, reach + 1), repeat=2)
              if k != (0, 0)]
    out = []
    for u in itertools.product(range(-box, box + 1), repeat=2):
        nu = sqnorm(ring, u)
        ok = True
        ties = []
        for v in others:
            nd = sqnorm(ring, (u[0] - v[0], u[1] - v[1]))
            if nd < nu:
                ok = False
                break
            if nd == nu:
                ties.append(v)
        if not ok:
            continue
        if ties and boundary is Boundary.OPEN:
            continue
        if ties and boundary is Boundary.HALF_OPEN and not all(v < (0, 0) for v in ties):
            continue
        out.append(u)
    return sorted(out)


def test_inner_product_matches_norm():
    for ring in RINGS:
        for u in itertools.product(range(-4, 5), repeat=2):
            assert sqnorm(ring, u) == norm(ring, u)
            assert inner2(ring, u, u) == 2 * norm(ring, u)


def test_relevant_vector_counts():
    assert len(relevant_vectors(SubLattice.scaled(GAUSSIAN, 5))) == 8
    assert len(relevant_vectors(SubLattice.scaled(EISENSTEIN, 7))) == 6


@pytest.mark.parametrize("ring,scale", [(GAUSSIAN, 5), (GAUSSIAN, 4), (EISENSTEIN, 7),
                                        (EISENSTEIN, 6), (EISENSTEIN, 13)])
@pytest.mark.parametrize("boundary", list(Boundary))
def test_scaled_cells_match_brute_force(ring, scale, boundary):
    sub = SubLattice.scaled(ring, scale)
    got = lattice_points_in_cell(ring, CellSpec(sub, boundary))
    assert got == brute_cell(sub, boundary, scale + 1)


@pytest.mark.parametrize("ring,gen", [(GAUSSIAN, (3, 2)), (GAUSSIAN, (-1, 4)),
                                      (EISENSTEIN, (-1, 4)), (EISENSTEIN, (2, 1))])
@pytest.mark.parametrize("boundary", list(Boundary))
def test_ideal_cells_match_brute_force(ring, gen, boundary):
    sub = SubLattice.principal(ring, gen)
    got = lattice_points_in_cell(ring, CellSpec(sub, boundary))
    assert got == brute_cell(sub, boundary, 6)


def test_closed_square_cell_counts():
    assert len(lattice_points_in_cell(GAUSSIAN, voronoi_cell(GAUSSIAN, 5))) == 25
    assert len(lattice_points_in_cell(GAUSSIAN, voronoi_cell(GAUSSIAN, 4))) == 25
    assert len(lattice_points_in_cell(GAUSSIAN, voronoi_cell(GAUSSIAN, 4, Boundary.OPEN))) == 9


basis = st.tuples(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))


@pytest.mark.parametrize("ring", RINGS)
@settings(max_examples=60, deadline=None)
@given(b=basis)
def test_half_open_cell_is_fundamental_domain(ring, b):
    M = ((b[0], b[1]), (b[2], b[3]))
    if det2(M) == 0:
        return
    sub = SubLattice(M, ring)
    pts = lattice_points_in_cell(ring, CellSpec(sub))
    assert len(pts) == sub.index
    # distinct cosets
    residues = set()
    for u in pts:
        for w in residues:
            assert not sub.contains((u[0] - w[0], u[1] - w[1]))
        residues.add(u)


@pytest.mark.parametrize("ring", RINGS)
@settings(max_examples=60, deadline=None)
@given(b=basis)
def test_open_inside_half_open_inside_closed(ring, b):
    M = ((b[0], b[1]), (b[2], b[3]))
    if det2(M) == 0:
        return
    sub = SubLattice(M, ring)
    o, h, c = (set(lattice_points_in_cell(ring, CellSpec(sub, bd)))
               for bd in (Boundary.OPEN, Boundary.HALF_OPEN, Boundary.CLOSED))
    assert o <= h <= c


@pytest.mark.parametrize("ring", RINGS)
def test_closed_cell_is_centrosymmetric(ring):
    for s in (3, 5, 7):
        pts = set(lattice_points_in_cell(ring, voronoi_cell(ring, s)))
        assert pts == {(-a, -b) for a, b in pts}


def test_sublattice_equality_ignores_basis_choice():
    a = SubLattice.principal(GAUSSIAN, (3, 2))
    b = SubLattice.principal(GAUSSIAN, (-2, 3))  # associate: i * (3 + 2i)
    assert a == b and hash(a) == hash(b)
    assert a != SubLattice.principal(GAUSSIAN, (3, -2))


def test_contains_and_index():
    sub = SubLattice.principal(GAUSSIAN, (3, 2))
    assert sub.index == 13
    assert sub.contains((3, 2)) and sub.contains((13, 0))
    assert not sub.contains((1, 0))


def test_singular_basis_rejected():
    with pytest.raises(ValueError):
        SubLattice(((1, 2), (2, 4)), GAUSSIAN)


def test_enumerate_sublattice_points_in_cell():
    sub = SubLattice.principal(GAUSSIAN, (3, 2))
    cell = voronoi_cell(GAUSSIAN, 13)
    pts = enumerate_points(sub, cell)
    assert len(pts) == 13
    assert all(sub.contains(u) and voronoi_membership(cell, u) for u in pts)


def test_reflect():
    assert reflect((3, 1), (0, 13)) == (-3, 12)
    assert reflect((0, 0), (2, 2)) == (2, 2)


def test_matrix_rep_columns_span_ideal():
    sub = SubLattice(matrix_rep(EISENSTEIN, (-1, 4)), EISENSTEIN)
    assert sub.index == 13
