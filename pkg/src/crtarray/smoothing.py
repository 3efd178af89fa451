"""u-space transform and generalized 2D spatial smoothing.

In u-space a coarray point is its integer coordinate pair in the ring basis,
i.e. ``d' = G^{-1} d`` for the physical difference ``d`` (in units of the
pitch). For the Gaussian ring ``G`` is the identity.

Two smoothing layouts are provided:

* Method I: ``(l_x+1) x (l_y+1)`` rectangles sliding over the square
  ``[-x_g, x_g] x [-y_g, y_g]``.
* Method II: hexagonal windows of radius ``l_p`` (``3 l_p^2 + 3 l_p + 1``
  elements) sliding inside the hexagon ``|x|, |y|, |x + y| <= l_R``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .coarray import Coarray

ORDERINGS = ("x_asc_y_asc", "y_desc_x_asc")
DEFAULT_ORDERING = "x_asc_y_asc"


class HoleError(ValueError):
    """A smoothing window needs a coarray entry that does not exist."""


class InvalidPlanError(ValueError):
    pass


def _order(points, ordering: str) -> list[tuple[int, int]]:
    if ordering == "x_asc_y_asc":
        return sorted(points)
    if ordering == "y_desc_x_asc":
        return sorted(points, key=lambda u: (-u[1], u[0]))
    raise InvalidPlanError(f"unknown ordering {ordering!r}; choose from {ORDERINGS}")


# ---------------------------------------------------------------- u-space

@dataclass(frozen=True)
class USpaceCoarray:
    """Integer u-space points of a coarray, optionally with signal values.

    ``l_R`` is the largest hexagon radius (``|x|, |y|, |x+y| <= l_R``) and
    ``l_sq`` the largest square half-width fully covered by ``points``.
    """

    points: frozenset
    values: dict | None = None

    @property
    def l_R(self) -> int:
        return _largest(self.points, in_hexagon)

    @property
    def l_sq(self) -> int:
        return _largest(self.points, in_square)


def in_hexagon(u, r: int, center=(0, 0)) -> bool:
    x, y = u[0] - center[0], u[1] - center[1]
    return abs(x) <= r and abs(y) <= r and abs(x + y) <= r


def in_square(u, r: int, center=(0, 0)) -> bool:
    return abs(u[0] - center[0]) <= r and abs(u[1] - center[1]) <= r


def hexagon_points(r: int, center=(0, 0)) -> list[tuple[int, int]]:
    cx, cy = center
    return [(cx + x, cy + y) for x in range(-r, r + 1) for y in range(-r, r + 1)
            if abs(x + y) <= r]


def _largest(points, region) -> int:
    if (0, 0) not in points:
        return -1
    r = 0
    while True:
        ring = [(x, y) for x in range(-r - 1, r + 2) for y in range(-r - 1, r + 2)
                if region((x, y), r + 1) and not region((x, y), r)]
        if not all(u in points for u in ring):
            return r
        r += 1


def to_u_space(G, points, tol: float = 1e-9) -> USpaceCoarray:
    """Map physical points ``d`` to integer u-space ``G^{-1} d``.

    Parameters
    ----------
    G : (2, 2) array_like
        Lattice generator; columns are the physical basis vectors.
    points : Coarray, mapping or iterable of 2-vectors
        A :class:`Coarray` is taken to hold ring coordinates already and is
        embedded with ``G`` first. A mapping carries its values along.

    Raises
    ------
    ValueError
        If any image is not an integer pair within ``tol``.
    """
    G = np.asarray(G, dtype=float)
    values = None
    if isinstance(points, Coarray):
        keys = list(points.weights)
        phys = (G @ np.array(keys, dtype=float).T).T if keys else np.zeros((0, 2))
    elif isinstance(points, dict):
        keys = list(points)
        values = points
        phys = np.array(keys, dtype=float).reshape(-1, 2)
    else:
        phys = np.array(list(points), dtype=float).reshape(-1, 2)
        keys = None
    img = np.linalg.solve(G, phys.T).T if len(phys) else phys
    rounded = np.rint(img)
    bad = np.abs(img - rounded).max(axis=1) > tol if len(img) else np.zeros(0, bool)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise ValueError(f"point {tuple(phys[i])} is not on the lattice generated by G")
    pts = [(int(a), int(b)) for a, b in rounded]
    if values is not None:
        values = {u: values[k] for u, k in zip(pts, keys)}
    return USpaceCoarray(frozenset(pts), values)


# ---------------------------------------------------------------- plans

@dataclass(frozen=True)
class SmoothingPlan:
    """A set of equally shaped u-space windows.

    ``subarrays[j]`` lists the u-space points of window ``j`` in the plan's
    element ordering; all windows are translates of ``subarrays[0]``.
    """

    method: str
    params: dict
    subarrays: list
    shifts: list
    ordering: str = DEFAULT_ORDERING

    @property
    def n_subarrays(self) -> int:
        return len(self.subarrays)

    @property
    def n_elements(self) -> int:
        return len(self.subarrays[0])

    @property
    def reference(self) -> list[tuple[int, int]]:
        return self.subarrays[0]

    def required_points(self) -> set:
        return {u for s in self.subarrays for u in s}

    def to_dict(self) -> dict:
        return {"method": self.method, "params": dict(self.params),
                "ordering": self.ordering, "n_subarrays": self.n_subarrays,
                "n_elements": self.n_elements,
                "shifts": [list(s) for s in self.shifts],
                "subarrays": [[list(u) for u in s] for s in self.subarrays]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"


def method1_subarrays(x_g: int, y_g: int, l_x: int, l_y: int,
                      ordering: str = DEFAULT_ORDERING) -> SmoothingPlan:
    """Rectangular windows over ``[-x_g, x_g] x [-y_g, y_g]``.

    Window ``(i1, i2)`` covers ``-x_g + i1 <= x <= -x_g + l_x + i1`` and the
    analogous range in ``y``, for ``0 <= i1 <= 2 x_g - l_x`` and
    ``0 <= i2 <= 2 y_g - l_y``.

    Examples
    --------
    >>> plan = method1_subarrays(7, 7, 7, 7)
    >>> plan.n_subarrays, plan.n_elements
    (64, 64)
    """
    if not (0 < l_x <= 2 * x_g and 0 < l_y <= 2 * y_g):
        raise InvalidPlanError("need 0 < l_x <= 2 x_g and 0 < l_y <= 2 y_g")
    base = [(-x_g + a, -y_g + b) for a in range(l_x + 1) for b in range(l_y + 1)]
    base = _order(base, ordering)
    shifts, subs = [], []
    for i1 in range(2 * x_g - l_x + 1):
        for i2 in range(2 * y_g - l_y + 1):
            shifts.append((i1, i2))
            subs.append([(x + i1, y + i2) for x, y in base])
    return SmoothingPlan("I", {"x_g": x_g, "y_g": y_g, "l_x": l_x, "l_y": l_y},
                         subs, shifts, ordering)


def method2_window(l_R: int, l_p: int, i1: int = 0, i2: int = 0) -> list[tuple[int, int]]:
    """Points of hexagonal window ``(i1, i2)`` before any clipping.

    The window is centred at ``(l_p - l_R + i1, i2)``, so window ``(0, 0)``
    touches the left corner ``(-l_R, 0)`` of the contiguous hexagon.
    """
    return hexagon_points(l_p, (l_p - l_R + i1, i2))


def method2_subarrays(l_R: int, l_p: int, ordering: str = DEFAULT_ORDERING) -> SmoothingPlan:
    """Hexagonal windows of radius ``l_p`` kept fully inside radius ``l_R``.

    Shifts range over ``0 <= i1 <= 2 l_R`` and ``-l_R <= i2 <= l_R``; only
    windows lying entirely in the hexagon ``|x|, |y|, |x+y| <= l_R`` are
    kept. Window ``(0, 0)`` is always first.

    Examples
    --------
    >>> plan = method2_subarrays(7, 3)
    >>> plan.n_elements, plan.n_subarrays
    (37, 61)
    """
    if not (0 < l_p < l_R):
        raise InvalidPlanError("need 0 < l_p < l_R")
    base = _order(method2_window(l_R, l_p), ordering)
    shifts, subs = [], []
    for i1 in range(2 * l_R + 1):
        for i2 in range(-l_R, l_R + 1):
            c = (l_p - l_R + i1, i2)
            # a hexagon of radius l_p fits iff its centre is within l_R - l_p
            if not in_hexagon(c, l_R - l_p):
                continue
            shifts.append((i1, i2))
            subs.append([(x + i1, y + i2) for x, y in base])
    return SmoothingPlan("II", {"l_R": l_R, "l_p": l_p}, subs, shifts, ordering)


# ---------------------------------------------------------------- selection

@dataclass(frozen=True)
class SelectionMatrix:
    """Binary ``R x Q`` row selector; row ``r`` picks element ``columns[r]``."""

    role: str
    columns: tuple
    n_cols: int
    elements: tuple = field(default=())

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.columns), self.n_cols

    def dense(self) -> np.ndarray:
        J = np.zeros(self.shape, dtype=np.int8)
        J[np.arange(len(self.columns)), self.columns] = 1
        return J

    def numbers(self) -> set[int]:
        """Selected element numbers, counted from 1."""
        return {c + 1 for c in self.columns}

    def to_triplet_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "col", "value"])
        for r, c in enumerate(self.columns):
            w.writerow([r, c, 1])
        return buf.getvalue()


def selection_matrices(l_R: int, l_p: int, ordering: str = DEFAULT_ORDERING) -> dict:
    """Shift-invariance selectors on window ``(0, 0)`` of Method II.

    ``x1`` picks elements whose ``+x`` neighbour is in the window and ``x2``
    those neighbours; ``y1``/``y2`` do the same along ``y``.
    """
    plan = method2_subarrays(l_R, l_p, ordering)
    S = plan.reference
    index = {u: k for k, u in enumerate(S)}
    out = {}
    for axis, step in (("x", (1, 0)), ("y", (0, 1))):
        first = [u for u in S if (u[0] + step[0], u[1] + step[1]) in index]
        second = [(u[0] + step[0], u[1] + step[1]) for u in first]
        for tag, pts in (("1", first), ("2", second)):
            out[axis + tag] = SelectionMatrix(axis + tag, tuple(index[u] for u in pts),
                                              len(S), tuple(pts))
    return out


# ---------------------------------------------------------------- covariance

def check_identifiability(plan: SmoothingPlan, K: int) -> None:
    """Reject source counts beyond what one window can resolve."""
    limit = plan.n_elements
    if plan.method == "I":
        p = plan.params
        limit = (p["l_x"] + 1) * (p["l_y"] + 1)
    if K > limit or K < 1:
        raise InvalidPlanError(f"{K} sources cannot be identified with {limit}-element windows")


def plan_holes(plan: SmoothingPlan, support) -> list[tuple[int, int]]:
    """u-space points required by ``plan`` that are absent from ``support``."""
    return sorted(u for u in plan.required_points() if u not in support)


def smoothed_covariance(plan: SmoothingPlan, coarray_signal: dict) -> np.ndarray:
    """Average of ``v_j v_j^H`` over the windows of ``plan``.

    Parameters
    ----------
    coarray_signal : dict
        Maps integer u-space points to complex values.

    Raises
    ------
    HoleError
        If a window needs a point missing from ``coarray_signal``.
    """
    holes = plan_holes(plan, coarray_signal)
    if holes:
        raise HoleError(f"coarray has no entry at {holes[0]} ({len(holes)} missing)")
    V = np.array([[coarray_signal[u] for u in s] for s in plan.subarrays], dtype=complex)
    R = V.T @ V.conj() / len(V)
    return (R + R.conj().T) / 2
