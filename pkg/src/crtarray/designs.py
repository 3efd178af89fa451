"""Sensor-array families built from coprime ideals of a quadratic ring.

Sensor coordinates are exact integer pairs in the ring basis ``{1, q}``;
the planar position of ``u`` is ``pitch * G @ u`` (in wavelengths) with
``G = embedding_generator(ring)``.

Families
--------
q_tuple_crt   union of ideal lattices inside the cell of their product
hscrt         small ideal in the closed cell V(p), conjugate ideal in the open cell V(2p)
t_array       HSCRT with the large subarray cut to its upper half (Gaussian)
spinner_array HSCRT with three alternating 60 degree sectors kept (Eisenstein)
z2_cross      T-like band plus the small subarray reflected through an edge midpoint
a2_cross      hexagonal analogue of z2_cross
nested_2d     dense/sparse grid baseline
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import rings
from .lattice import (Boundary, CellSpec, SubLattice, enumerate_points, inner2,
                      reflect)
from .rings import GAUSSIAN, EISENSTEIN, RingSpec, QuadInt


class InvalidDesignError(ValueError):
    pass


DEFAULT_PITCH = 0.5
EXTENSION = "extension"


@dataclass(frozen=True)
class SensorArray:
    """Labeled sensor positions on a ring lattice.

    ``labels[i]`` names the ideal that generated ``sensors[i]`` (for example
    ``"<2-3i>"``), or ``"extension"`` for points added by reflection.
    ``generators`` maps each ideal label back to its generator.
    """

    ring: RingSpec
    sensors: tuple
    labels: tuple
    kind: str
    p: int | None = None
    pitch: float = DEFAULT_PITCH
    generators: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        sensors = tuple((int(a), int(b)) for a, b in self.sensors)
        object.__setattr__(self, "sensors", sensors)
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(sensors)) != len(sensors):
            raise InvalidDesignError("duplicate sensor coordinates")
        if len(self.labels) != len(sensors):
            raise InvalidDesignError("one label per sensor required")

    def __len__(self):
        return len(self.sensors)

    def __iter__(self):
        return iter(self.sensors)

    @property
    def coords(self) -> np.ndarray:
        """Integer ring coordinates, shape (N, 2)."""
        return np.array(self.sensors, dtype=np.int64).reshape(-1, 2)

    @property
    def generator_matrix(self) -> np.ndarray:
        return rings.embedding_generator(self.ring)

    def positions(self) -> np.ndarray:
        """Planar positions in wavelengths, shape (N, 2)."""
        return self.pitch * self.coords @ self.generator_matrix.T

    def subset(self, labels) -> list[tuple[int, int]]:
        labels = {labels} if isinstance(labels, str) else set(labels)
        return [s for s, lab in zip(self.sensors, self.labels) if lab in labels]

    def negated(self) -> set:
        return {(-a, -b) for a, b in self.sensors}

    def without(self, sensor) -> "SensorArray":
        keep = [(s, lab) for s, lab in zip(self.sensors, self.labels) if s != tuple(sensor)]
        return SensorArray(self.ring, [s for s, _ in keep], [lab for _, lab in keep],
                           self.kind, self.p, self.pitch, self.generators)

    def mimo_split(self) -> tuple[list, list]:
        """Transmit/receive split.

        CRT designs transmit from the first ideal's subarray (plus any
        reflected extension) and receive on the rest; the nested baseline
        transmits from the dense grid and receives on the sparse grid.
        """
        if self.kind == "nested_2d":
            # both grids are complete; the shared corner element does both jobs
            tx = self.subset("dense")
            rx = [(0, 0)] + self.subset("sparse")
            return tx, sorted(rx)
        if not self.generators:
            raise InvalidDesignError(f"{self.kind} carries no ideal labels to split on")
        first = next(iter(self.generators))
        tx_labels = {first, EXTENSION}
        tx = [s for s, lab in zip(self.sensors, self.labels) if lab in tx_labels]
        rx = [s for s, lab in zip(self.sensors, self.labels) if lab not in tx_labels]
        return tx, rx

    # serialization ---------------------------------------------------------

    @property
    def note(self) -> str | None:
        """Caveat carried into every report about this array."""
        return RECONSTRUCTED_NOTE if self.kind == "nested_2d" else None

    def to_dict(self) -> dict:
        extra = {"note": self.note} if self.note else {}
        return extra | {
            "ring": self.ring.name or [self.ring.B, self.ring.C],
            "p": self.p,
            "kind": self.kind,
            "pitch": self.pitch,
            "sensors": [list(s) for s in self.sensors],
            "labels": list(self.labels),
            # a list keeps the transmit ideal first after key sorting
            "generators": [[k, *v] for k, v in self.generators.items()],
        }

    def to_json(self, **extra) -> str:
        payload = self.to_dict()
        payload.update(extra)
        return json.dumps(payload, indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "SensorArray":
        if not data.get("sensors"):
            raise InvalidDesignError("array file has no sensors")
        ring = rings.get_ring(data["ring"])
        raw = data.get("generators") or []
        items = raw.items() if isinstance(raw, dict) else ((g[0], g[1:]) for g in raw)
        gens = {k: QuadInt(*v) for k, v in items}
        return cls(ring, [tuple(s) for s in data["sensors"]], data["labels"],
                   data["kind"], data.get("p"), data.get("pitch", DEFAULT_PITCH), gens)

    @classmethod
    def from_json(cls, text: str) -> "SensorArray":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "label"])
        for (x, y), lab in zip(self.positions(), self.labels):
            w.writerow([f"{x:.12g}", f"{y:.12g}", lab])
        return buf.getvalue()


def _label(ring, m) -> str:
    return f"<{rings.format_quadint(ring, m)}>"


def _assemble(ring, groups, kind, p=None, pitch=DEFAULT_PITCH, generators=None):
    """Merge labeled point groups; the first group wins on shared points."""
    seen = {}
    for label, pts in groups:
        for u in pts:
            seen.setdefault(tuple(u), label)
    ordered = sorted(seen)
    return SensorArray(ring, ordered, [seen[u] for u in ordered], kind, p, pitch,
                       generators or {})


def q_tuple_count(norms) -> int:
    """Inclusion-exclusion sensor count for pairwise coprime ideals.

    ``sum over nonempty S of (-1)^(|S|+1) * N(P) / prod_{k in S} N(p_k)``.
    """
    norms = [abs(int(n)) for n in norms]
    total_norm = math.prod(norms)
    count = 0
    for r in range(1, len(norms) + 1):
        for combo in itertools.combinations(norms, r):
            count += (-1) ** (r + 1) * (total_norm // math.prod(combo))
    return count


def q_tuple_crt(ring: RingSpec, generators, pitch=DEFAULT_PITCH) -> SensorArray:
    """Q-tuple CRT array: each ideal's points inside the half-open cell of the product."""
    gens = [rings.as_quadint(g) for g in generators]
    if not gens:
        raise InvalidDesignError("at least one generator is required")
    for g in gens:
        if g.is_zero():
            raise InvalidDesignError("zero generator")
    for m, n in itertools.combinations(gens, 2):
        if not rings.is_coprime(ring, m, n):
            raise InvalidDesignError(
                f"generators {rings.format_quadint(ring, m)} and "
                f"{rings.format_quadint(ring, n)} are not coprime")
    big = rings.product(ring, gens)
    cell = CellSpec(SubLattice.principal(ring, big), Boundary.HALF_OPEN)
    groups = []
    labels = {}
    for g in gens:
        lab = _label(ring, g)
        labels[lab] = g
        groups.append((lab, enumerate_points(SubLattice.principal(ring, g), cell)))
    return _assemble(ring, groups, "q_tuple", None, pitch, labels)


def _require_imaginary(ring):
    if not ring.is_imaginary:
        raise rings.UnsupportedRingError(f"{ring} has no planar embedding")


def hscrt_subarrays(ring: RingSpec, p: int):
    """``(m, mbar, Z1, Z2)`` with Z1 = <m> in closed V(p), Z2 = <mbar> in open V(2p)."""
    _require_imaginary(ring)
    m, mbar = rings.split_prime(ring, p)
    z1 = enumerate_points(SubLattice.principal(ring, m),
                          CellSpec(SubLattice.scaled(ring, p), Boundary.CLOSED))
    z2 = enumerate_points(SubLattice.principal(ring, mbar),
                          CellSpec(SubLattice.scaled(ring, 2 * p), Boundary.OPEN))
    return m, mbar, z1, z2


def _sliced(ring, p, kind, keep, pitch, extra=None):
    m, mbar, z1, z2 = hscrt_subarrays(ring, p)
    lab1, lab2 = _label(ring, m), _label(ring, mbar)
    groups = [(lab1, z1)]
    if extra is not None:
        groups.append((EXTENSION, extra(z1)))
    groups.append((lab2, [z for z in z2 if keep(z)]))
    return _assemble(ring, groups, kind, p, pitch, {lab1: m, lab2: mbar})


def hscrt(ring: RingSpec, p: int, pitch=DEFAULT_PITCH) -> SensorArray:
    """Hole-free symmetric CRT array with ``5p - 4`` sensors."""
    return _sliced(ring, p, "hscrt", lambda z: True, pitch)


def _check_ring(ring, expected, name):
    if ring != expected:
        raise InvalidDesignError(f"{name} is defined over the {expected} ring")


def t_array(p: int, pitch=DEFAULT_PITCH, ring: RingSpec = GAUSSIAN) -> SensorArray:
    """HSCRT with only the upper half (``z_y > 0``) of the large subarray."""
    _check_ring(ring, GAUSSIAN, "t_array")
    return _sliced(ring, p, "t_array", lambda z: z[1] > 0, pitch)


def in_spinner_sectors(x: float, y: float) -> bool:
    """The three open sectors (0, 60), (120, 180) and (240, 300) degrees."""
    r3 = math.sqrt(3.0)
    return ((0 < y < r3 * x) or (0 < y < -r3 * x)
            or (y < r3 * x and y < -r3 * x))


def spinner_array(p: int, pitch=DEFAULT_PITCH, ring: RingSpec = EISENSTEIN) -> SensorArray:
    """HSCRT keeping three alternating 60 degree sectors of the large subarray."""
    _check_ring(ring, EISENSTEIN, "spinner_array")
    G = rings.embedding_generator(ring)

    def keep(z):
        x, y = G @ np.asarray(z, dtype=float)
        return in_spinner_sectors(x, y)

    return _sliced(ring, p, "spinner", keep, pitch)


def cross_array(ring: RingSpec, p: int, pitch=DEFAULT_PITCH, kind="cross") -> SensorArray:
    """Cross array around the adjacent Voronoi centre ``c = p q``.

    Keeps the band of the large subarray with ``0 < <z, c> < |c|^2 / 2`` and
    adds ``c - h`` for every small-subarray point with ``<h, c> > 0``.
    """
    c = (0, p)
    cc = inner2(ring, c, c)

    def keep(z):
        s = inner2(ring, z, c)
        return 0 < s and 2 * s < cc

    def extension(z1):
        return [reflect(h, c) for h in z1 if inner2(ring, h, c) > 0]

    return _sliced(ring, p, kind, keep, pitch, extra=extension)


def z2_cross(p: int, pitch=DEFAULT_PITCH, ring: RingSpec = GAUSSIAN) -> SensorArray:
    """Square-lattice cross array with ``(5p - 3) / 2`` sensors."""
    _check_ring(ring, GAUSSIAN, "z2_cross")
    return cross_array(ring, p, pitch, "z2_cross")


def a2_cross(p: int, pitch=DEFAULT_PITCH, ring: RingSpec = EISENSTEIN) -> SensorArray:
    """Hexagonal-lattice cross array with ``(8p - 5) / 3`` sensors."""
    _check_ring(ring, EISENSTEIN, "a2_cross")
    return cross_array(ring, p, pitch, "a2_cross")


RECONSTRUCTED_NOTE = "baseline (reconstructed)"


def nested_2d(N1: int, N2: int, pitch=DEFAULT_PITCH) -> SensorArray:
    """Baseline (reconstructed) 2D nested array.

    Dense ``N1 x N1`` unit grid plus a sparse ``N2 x N2`` grid of pitch ``N1``,
    both anchored at the origin, so the sum set fills an ``N1 N2`` square.
    """
    if N1 < 1 or N2 < 1:
        raise InvalidDesignError("N1 and N2 must be positive")
    dense = [(i, j) for i in range(N1) for j in range(N1)]
    sparse = [(N1 * i, N1 * j) for i in range(N2) for j in range(N2)]
    return _assemble(GAUSSIAN, [("dense", dense), ("sparse", sparse)], "nested_2d",
                     None, pitch)


def expected_count(kind: str, p: int | None = None, **kw) -> int | None:
    """Closed-form sensor count for a design family."""
    if kind == "hscrt":
        return 5 * p - 4
    if kind in ("t_array", "spinner"):
        return 3 * p - 2
    if kind == "z2_cross":
        return (5 * p - 3) // 2
    if kind == "a2_cross":
        return (8 * p - 5) // 3
    if kind == "nested_2d":
        N1, N2 = kw.get("N1"), kw.get("N2")
        return N1 * N1 + N2 * N2 - 1
    if kind == "q_tuple":
        ring, gens = kw["ring"], kw["generators"]
        return q_tuple_count([rings.norm(ring, g) for g in gens])
    return None


def on_labeled_ideal(arr: SensorArray, index: int) -> bool:
    """True if sensor ``index`` lies on the ideal lattice named by its label."""
    u, lab = arr.sensors[index], arr.labels[index]
    if lab not in arr.generators:
        return True
    return SubLattice.principal(arr.ring, arr.generators[lab]).contains(u)


def build(kind: str, ring=None, p=None, generators=None, N1=None, N2=None,
          pitch=DEFAULT_PITCH) -> SensorArray:
    """Dispatch by family name; used by the command line."""
    kind = kind.lower()
    if kind in ("q_tuple", "qtuple"):
        ring = rings.get_ring(ring or "gaussian")
        if not generators:
            raise InvalidDesignError("q_tuple needs generators")
        gens = [rings.parse_quadint(ring, g) if isinstance(g, str) else g for g in generators]
        return q_tuple_crt(ring, gens, pitch)
    if kind == "nested_2d":
        return nested_2d(int(N1 or 3), int(N2 or 3), pitch)
    if p is None:
        raise InvalidDesignError(f"{kind} needs a prime p")
    p = int(p)
    # fixed-ring families still validate an explicit ring= request
    kw = {} if ring is None else {"ring": rings.get_ring(ring)}
    table = {
        "hscrt": lambda: hscrt(rings.get_ring(ring or "gaussian"), p, pitch),
        "t_array": lambda: t_array(p, pitch, **kw),
        "spinner": lambda: spinner_array(p, pitch, **kw),
        "z2_cross": lambda: z2_cross(p, pitch, **kw),
        "a2_cross": lambda: a2_cross(p, pitch, **kw),
    }
    if kind not in table:
        raise InvalidDesignError(f"unknown design kind {kind!r}")
    try:
        return table[kind]()
    except rings.UnsupportedPrimeError as exc:
        raise InvalidDesignError(str(exc)) from exc

