"""Difference and sum coarrays, hole checks and sensor essentialness.

All comparisons use exact integer ring coordinates.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .designs import SensorArray
from .lattice import lattice_points_in_cell, voronoi_cell
from .rings import RingSpec


@dataclass(frozen=True)
class Coarray:
    """Multiset of integer difference or sum vectors.

    Attributes
    ----------
    weights : Counter
        Maps ``(a, b)`` to the number of sensor pairs realizing it.
    kind : str
        ``"difference"`` or ``"sum"``.
    ring : RingSpec
    """

    weights: Counter
    kind: str
    ring: RingSpec

    @property
    def support(self) -> frozenset:
        return frozenset(self.weights)

    def weight(self, d) -> int:
        return self.weights.get(tuple(d), 0)

    def __len__(self):
        return len(self.weights)

    def __contains__(self, d):
        return tuple(d) in self.weights

    @property
    def total(self) -> int:
        return sum(self.weights.values())

    def weight_histogram(self) -> dict[int, int]:
        """Number of coarray points having each weight."""
        return dict(sorted(Counter(self.weights.values()).items()))


def _pair_counts(left: np.ndarray, right: np.ndarray, sign: int) -> Counter:
    pts = (left[:, None, :] + sign * right[None, :, :]).reshape(-1, 2)
    if pts.size == 0:
        return Counter()
    uniq, counts = np.unique(pts, axis=0, return_counts=True)
    return Counter({(int(a), int(b)): int(n) for (a, b), n in zip(uniq, counts)})


def _as_coords(points) -> np.ndarray:
    if isinstance(points, SensorArray):
        return points.coords
    return np.array([tuple(p) for p in points], dtype=np.int64).reshape(-1, 2)


def difference_coarray(arr: SensorArray) -> Coarray:
    """All pairwise differences ``z_m - z_n`` with multiplicities."""
    c = arr.coords
    return Coarray(_pair_counts(c, c, -1), "difference", arr.ring)


def sum_coarray(tx, rx, ring: RingSpec | None = None) -> Coarray:
    """All sums ``z_m + z_n`` of a transmit and a receive position.

    ``tx`` and ``rx`` may be SensorArrays or plain lists of integer pairs;
    in the latter case ``ring`` must be given.
    """
    if ring is None:
        for a in (tx, rx):
            if isinstance(a, SensorArray):
                ring = a.ring
                break
        else:
            raise ValueError("ring is required when both sides are plain point lists")
    return Coarray(_pair_counts(_as_coords(tx), _as_coords(rx), 1), "sum", ring)


def region_points(ring: RingSpec, p: int) -> list[tuple[int, int]]:
    """Lattice points in the closed cell ``V(p Lambda)``."""
    return lattice_points_in_cell(ring, voronoi_cell(ring, p))


def hole_free_check(c: Coarray, p: int, ring: RingSpec | None = None):
    """Check that ``c`` covers every point of the closed cell ``V(p Lambda)``.

    Returns
    -------
    ok : bool
    missing : list of tuple
        Uncovered points, sorted.
    """
    ring = ring or c.ring
    missing = [u for u in region_points(ring, p) if u not in c.weights]
    return not missing, missing


def restricted_support(c: Coarray, p: int) -> frozenset:
    """Support of ``c`` intersected with the closed cell ``V(p Lambda)``."""
    return frozenset(u for u in region_points(c.ring, p) if u in c.weights)


def contiguous_extent(c: Coarray, k_max: int | None = None) -> int:
    """Largest ``k`` with ``Lambda ∩ V(k Lambda)`` (closed) inside the support.

    Returns 0 when even the origin is missing.
    """
    k_max = k_max or int(np.abs(np.array(list(c.weights) or [(0, 0)])).max()) * 2 + 2
    best = 0
    for k in range(1, k_max + 1):
        if hole_free_check(c, k)[0]:
            best = k
        else:
            break
    return best


def contiguous_dof(c: Coarray) -> int:
    """Number of coarray points in the largest hole-free centred cell."""
    k = contiguous_extent(c)
    return len(region_points(c.ring, k)) if k else 0


def _check_removable(arr: SensorArray):
    if len(arr) < 2:
        raise ValueError("essentialness needs at least two sensors")


def is_essential(arr: SensorArray, sensor, support: frozenset | None = None) -> bool:
    """Whether removing ``sensor`` changes the difference-coarray support."""
    _check_removable(arr)
    if support is None:
        support = difference_coarray(arr).support
    return difference_coarray(arr.without(sensor)).support != support


def essential_set(arr: SensorArray, threads: int = 1) -> set[tuple[int, int]]:
    """Sensors whose individual removal alters the coarray support."""
    _check_removable(arr)
    support = difference_coarray(arr).support
    sensors = list(arr.sensors)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            flags = list(ex.map(lambda s: is_essential(arr, s, support), sensors))
    else:
        flags = [is_essential(arr, s, support) for s in sensors]
    return {s for s, f in zip(sensors, flags) if f}


def fragility(arr: SensorArray, threads: int = 1) -> Fraction:
    """Fraction of essential sensors, as an exact rational."""
    return Fraction(len(essential_set(arr, threads)), len(arr))


def coarray_report(arr: SensorArray, p: int | None = None, threads: int = 1) -> dict:
    """Summary dict with support size, DOF, holes, fragility and weights.

    ``p`` selects the cell used for the hole check; defaults to ``arr.p``.
    """
    diff = difference_coarray(arr)
    p = p if p is not None else arr.p
    report = {
        "kind": arr.kind,
        "sensors": len(arr),
        "support_size": len(diff),
        "dof": contiguous_dof(diff),
    }
    if arr.note:
        report["note"] = arr.note
    if p is not None:
        ok, missing = hole_free_check(diff, p)
        report["hole_free"] = ok
        report["holes"] = [list(u) for u in missing]
    else:
        report["hole_free"] = None
        report["holes"] = []
    if len(arr) >= 2:
        f = fragility(arr, threads)
        report["fragility"] = {"exact": f"{f.numerator}/{f.denominator}",
                               "value": round(float(f), 12)}
    else:
        report["fragility"] = None
    report["weight_histogram"] = {str(w): n for w, n in diff.weight_histogram().items()}
    if arr.generators and len(arr.generators) >= 2 and arr.kind != "q_tuple":
        tx, rx = arr.mimo_split()
        s = sum_coarray(tx, rx, arr.ring)
        report["sum_support_size"] = len(s)
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
