import json
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from crtarray.coarray import (coarray_report, contiguous_extent, difference_coarray,
                              essential_set, fragility, hole_free_check, region_points,
                              restricted_support, sum_coarray)
from crtarray.designs import (SensorArray, a2_cross, hscrt, hscrt_subarrays, spinner_array,
                              t_array, z2_cross)
from crtarray.rings import EISENSTEIN, GAUSSIAN


def make(points, ring=GAUSSIAN):
    pts = sorted(set(map(tuple, points)))
    return SensorArray(ring, pts, ["s"] * len(pts), "custom", None, 0.5, {})


def brute_differences(points):
    return Counter((a[0] - b[0], a[1] - b[1]) for a in points for b in points)


points = st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=1, max_size=12,
                  unique=True)


# ---------------------------------------------------------------- coarrays

def test_single_sensor():
    c = difference_coarray(make([(0, 0)]))
    assert c.weights == Counter({(0, 0): 1})


@settings(max_examples=100, deadline=None)
@given(pts=points)
def test_difference_coarray_matches_brute_force(pts):
    arr = make(pts)
    c = difference_coarray(arr)
    assert c.weights == brute_differences(arr.sensors)
    assert c.weight((0, 0)) == len(arr)
    assert c.total == len(arr) ** 2
    for d, w in c.weights.items():
        assert c.weight((-d[0], -d[1])) == w


@settings(max_examples=100, deadline=None)
@given(tx=points, rx=points)
def test_sum_coarray_counts(tx, rx):
    s = sum_coarray(tx, rx, GAUSSIAN)
    assert s.total == len(tx) * len(rx)
    assert len(s) <= len(tx) * len(rx)
    assert s.weights == Counter((a[0] + b[0], a[1] + b[1]) for a in tx for b in rx)


def test_sum_with_origin_transmitter_is_receiver_set():
    rx = [(1, 2), (-3, 0), (4, 4)]
    assert sum_coarray([(0, 0)], rx, GAUSSIAN).support == frozenset(rx)


def test_sum_needs_ring_for_plain_lists():
    with pytest.raises(ValueError):
        sum_coarray([(0, 0)], [(1, 0)])


def test_hscrt_p5_support_covers_cell():
    c = difference_coarray(hscrt(GAUSSIAN, 5))
    cell = region_points(GAUSSIAN, 5)
    assert len(cell) == 25
    assert set(cell) <= c.support


@pytest.mark.parametrize("ring,p", [(GAUSSIAN, 13), (EISENSTEIN, 13), (GAUSSIAN, 5), (EISENSTEIN, 7)])
def test_hscrt_sum_coarray_of_ideal_split(ring, p):
    # Z1 and Z2 are centrosymmetric, so Z1 + Z2 equals the cross differences
    # Z1 - Z2, and inside V(p) it matches the full difference coarray
    _, _, z1, z2 = hscrt_subarrays(ring, p)
    s = sum_coarray(z1, z2, ring)
    cross = {(a[0] - b[0], a[1] - b[1]) for a in z1 for b in z2}
    assert s.support == cross
    d = difference_coarray(hscrt(ring, p))
    assert restricted_support(s, p) == restricted_support(d, p)
    assert hole_free_check(s, p)[0]


# ---------------------------------------------------------------- holes

def test_two_sensor_array_has_22_holes():
    ok, missing = hole_free_check(difference_coarray(make([(0, 0), (1, 0)])), 5)
    assert not ok and len(missing) == 22


@pytest.mark.parametrize("factory,ring,p", [
    (t_array, GAUSSIAN, 5), (t_array, GAUSSIAN, 13), (t_array, GAUSSIAN, 17),
    (z2_cross, GAUSSIAN, 5), (z2_cross, GAUSSIAN, 13), (z2_cross, GAUSSIAN, 17),
    (spinner_array, EISENSTEIN, 7), (spinner_array, EISENSTEIN, 13),
    (a2_cross, EISENSTEIN, 7), (a2_cross, EISENSTEIN, 13),
])
def test_derived_arrays_hole_free_with_hscrt_support(factory, ring, p):
    d = difference_coarray(factory(p))
    ok, missing = hole_free_check(d, p)
    assert ok, missing
    base = difference_coarray(hscrt(ring, p))
    assert restricted_support(d, p) == restricted_support(base, p)


def test_contiguous_extent():
    assert contiguous_extent(difference_coarray(make([(0, 0)]))) == 1
    assert contiguous_extent(difference_coarray(hscrt(GAUSSIAN, 13))) >= 13


# ---------------------------------------------------------------- essentialness

def test_two_sensors_both_essential():
    arr = make([(0, 0), (2, 1)])
    assert essential_set(arr) == {(0, 0), (2, 1)}
    assert fragility(arr) == 1


def test_singleton_rejected():
    with pytest.raises(ValueError):
        fragility(make([(0, 0)]))


def test_redundant_sensor_not_essential():
    # interior sensors of a uniform line add no new difference
    arr = make([(0, 0), (1, 0), (2, 0), (3, 0)])
    assert essential_set(arr) == {(0, 0), (3, 0)}
    assert fragility(arr) == Fraction(1, 2)
    # a minimal ruler has no slack at all
    assert fragility(make([(0, 0), (1, 0), (2, 0), (4, 0)])) == 1


@settings(max_examples=40, deadline=None)
@given(pts=st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=2, max_size=8,
                    unique=True))
def test_essential_set_matches_definition(pts):
    arr = make(pts)
    full = set(brute_differences(arr.sensors))
    expected = {s for s in arr.sensors
                if set(brute_differences([t for t in arr.sensors if t != s])) != full}
    assert essential_set(arr) == expected
    assert essential_set(arr, threads=3) == expected


@pytest.mark.parametrize("factory,p", [(t_array, 5), (t_array, 13), (z2_cross, 5), (z2_cross, 13),
                                       (a2_cross, 7), (a2_cross, 13)])
def test_reduced_arrays_fully_essential(factory, p):
    assert fragility(factory(p)) == 1


def test_hscrt_fragility_frozen():
    assert fragility(hscrt(GAUSSIAN, 13)) == Fraction(16, 61)
    assert fragility(hscrt(EISENSTEIN, 13)) == Fraction(18, 61)


def test_spinner_fragility_frozen():
    # the origin is covered by the other sensors; see the acceptance suite
    assert fragility(spinner_array(7)) == Fraction(18, 19)
    assert fragility(spinner_array(13)) == Fraction(36, 37)
    assert (0, 0) not in essential_set(spinner_array(13))


# ---------------------------------------------------------------- report

def test_report_fields():
    rep = coarray_report(t_array(13))
    assert rep["hole_free"] is True and rep["holes"] == []
    assert rep["fragility"] == {"exact": "1/1", "value": 1.0}
    assert set(rep) >= {"kind", "support_size", "dof", "holes", "fragility", "weight_histogram"}
    hist = rep["weight_histogram"]
    assert sum(hist.values()) == rep["support_size"]
    json.dumps(rep)


def test_report_without_prime():
    rep = coarray_report(make([(0, 0), (1, 0)]))
    assert rep["hole_free"] is None
    assert rep["fragility"]["exact"] == "1/1"
