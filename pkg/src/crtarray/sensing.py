"""Narrowband simulation, coarray MUSIC and MIMO two-way patterns.

Conventions
-----------
* Wavelength is 1; sensor positions are ``pitch * G @ u`` in wavelengths.
* ``theta`` is azimuth and ``phi`` elevation from broadside, so the wave
  vector is ``v = sin(phi) * [cos(theta), sin(theta)]``.
* Receive steering phase is ``-2 pi v . z``; array factors use ``+2 pi``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment, minimize

from .designs import SensorArray
from .smoothing import SmoothingPlan, check_identifiability, smoothed_covariance


class InvalidScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Source:
    """Far-field source at azimuth ``theta`` and elevation ``phi`` (radians)."""

    theta: float
    phi: float
    power: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise InvalidScenarioError("source angles must be finite")
        if not self.power > 0:
            raise InvalidScenarioError("source power must be positive")


@dataclass(frozen=True)
class Coupling:
    c_max: float = 0.2
    radius_multiple: float = 3.0

    def __post_init__(self):
        if not 0 <= self.c_max < 1:
            raise InvalidScenarioError("c_max must lie in [0, 1)")


@dataclass(frozen=True)
class Scenario:
    sources: tuple
    snr_db: float = 0.0
    snapshots: int = 200
    coupling: Coupling | None = field(default_factory=Coupling)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if self.snapshots < 1:
            raise InvalidScenarioError("snapshots must be at least 1")

    @property
    def noise_power(self) -> float:
        return 10.0 ** (-self.snr_db / 10.0)


def wave_vectors(theta, phi) -> np.ndarray:
    """``(..., 2)`` array of ``sin(phi) [cos(theta), sin(theta)]``."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    s = np.sin(phi)
    return np.stack([s * np.cos(theta), s * np.sin(theta)], axis=-1)


def _source_vectors(sources) -> np.ndarray:
    return wave_vectors([s.theta for s in sources], [s.phi for s in sources]).reshape(-1, 2)


def steering_matrix(arr: SensorArray, sources) -> np.ndarray:
    """``N x K`` matrix with entries ``exp(-i 2 pi v_k . z_n)``."""
    z = arr.positions()
    v = _source_vectors(sources)
    return np.exp(-2j * np.pi * z @ v.T)


def coupling_matrix(arr: SensorArray, c_max: float = 0.2, radius_multiple: float = 3.0) -> np.ndarray:
    """Real symmetric coupling matrix.

    Off-diagonal entries are ``c_max * d / r`` for sensors a distance
    ``r <= radius_multiple * d`` apart and zero beyond; ``d`` is the pitch.
    """
    Coupling(c_max, radius_multiple)
    z = arr.positions() / arr.pitch
    r = np.linalg.norm(z[:, None, :] - z[None, :, :], axis=-1)
    C = np.zeros_like(r)
    near = (r > 0) & (r <= radius_multiple + 1e-9)
    C[near] = c_max / r[near]
    np.fill_diagonal(C, 1.0)
    return C.astype(complex)


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    g = rng.standard_normal(tuple(shape) + (2,))
    return (g[..., 0] + 1j * g[..., 1]) / math.sqrt(2.0)


def trial_rngs(seed: int, trial: int = 0):
    """Independent (sources, signals, noise) generators for one trial."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(trial)])
    return [np.random.default_rng(s) for s in ss.spawn(3)]


def simulate(arr: SensorArray, scenario: Scenario, trial: int = 0) -> np.ndarray:
    """Snapshot matrix ``X = C A S + E`` of shape ``N x L``.

    Signal and noise come from separate streams drawn snapshot-major, so the
    first ``L`` columns are the same for every longer run with the same seed
    and trial.
    """
    _, rs, rn = trial_rngs(scenario.seed, trial)
    L, N = scenario.snapshots, len(arr)
    K = len(scenario.sources)
    X = math.sqrt(scenario.noise_power) * _complex_normal(rn, (L, N)).T
    if K:
        A = steering_matrix(arr, scenario.sources)
        if scenario.coupling is not None:
            A = coupling_matrix(arr, scenario.coupling.c_max, scenario.coupling.radius_multiple) @ A
        amp = np.sqrt([s.power for s in scenario.sources])
        S = (_complex_normal(rs, (L, K)) * amp).T
        X = X + A @ S
    return X


def ensemble_covariance(arr: SensorArray, scenario: Scenario) -> np.ndarray:
    """Expected ``E[x x^H]`` for ``scenario``."""
    N = len(arr)
    R = scenario.noise_power * np.eye(N, dtype=complex)
    if scenario.sources:
        A = steering_matrix(arr, scenario.sources)
        if scenario.coupling is not None:
            A = coupling_matrix(arr, scenario.coupling.c_max, scenario.coupling.radius_multiple) @ A
        P = np.diag([s.power for s in scenario.sources])
        R = R + A @ P @ A.conj().T
    return R


def sample_covariance(X: np.ndarray) -> np.ndarray:
    return X @ X.conj().T / X.shape[1]


@lru_cache(maxsize=32)
def _difference_groups(coords: tuple):
    c = np.array(coords, dtype=np.int64)
    d = (c[:, None, :] - c[None, :, :]).reshape(-1, 2)
    keys, inverse, counts = np.unique(d, axis=0, return_inverse=True, return_counts=True)
    return [tuple(map(int, k)) for k in keys], inverse.ravel(), counts


def vectorized_coarray_signal(X_or_R: np.ndarray, arr: SensorArray, is_covariance: bool = False) -> dict:
    """Average covariance entries ``R[m, n]`` by difference ``u_m - u_n``.

    Parameters
    ----------
    X_or_R : ndarray
        Snapshots ``N x L`` or, with ``is_covariance``, a covariance ``N x N``.

    Returns
    -------
    dict
        Integer difference (ring coordinates) to complex coarray value.
    """
    R = X_or_R if is_covariance else sample_covariance(X_or_R)
    keys, inverse, counts = _difference_groups(tuple(map(tuple, arr.coords.tolist())))
    flat = R.ravel()
    re = np.bincount(inverse, weights=flat.real, minlength=len(keys))
    im = np.bincount(inverse, weights=flat.imag, minlength=len(keys))
    vals = (re + 1j * im) / counts
    return dict(zip(keys, vals))


# ---------------------------------------------------------------- MUSIC

@dataclass(frozen=True)
class MusicGrid:
    """Azimuth ``[-180, 180)`` and elevation ``(0, 90]`` grid in degrees."""

    step_deg: float = 1.0
    min_separation: int = 3

    @property
    def theta_deg(self) -> np.ndarray:
        return np.arange(-180.0, 180.0, self.step_deg)

    @property
    def phi_deg(self) -> np.ndarray:
        n = int(round(90.0 / self.step_deg))
        return self.step_deg * np.arange(1, n + 1)


@dataclass
class Spectrum:
    theta: np.ndarray
    phi: np.ndarray
    values: np.ndarray
    estimates: list

    def to_db(self) -> np.ndarray:
        return 10 * np.log10(self.values / self.values.max())


def _u_steering(plan: SmoothingPlan, G: np.ndarray, pitch: float, v: np.ndarray) -> np.ndarray:
    """Steering of the reference window for wave vectors ``v`` (``M x 2``)."""
    u = np.array(plan.reference, dtype=float)
    # v . (G u) = (G^T v) . u
    w = pitch * v @ G
    return np.exp(-2j * np.pi * u @ w.T)


def _noise_subspace(R: np.ndarray, K: int) -> np.ndarray:
    _, vecs = np.linalg.eigh(R)
    return vecs[:, : R.shape[0] - K]


def _pseudo(En, A) -> np.ndarray:
    proj = np.sum(np.abs(En.conj().T @ A) ** 2, axis=0)
    return 1.0 / np.maximum(proj, 1e-300)


def _peaks(values: np.ndarray, K: int, sep: int) -> list[tuple[int, int]]:
    """Top ``K`` local maxima, ``sep`` cells apart, azimuth wrapping."""
    T, P = values.shape
    pad = np.pad(values, ((1, 1), (0, 0)), mode="wrap")
    pad = np.pad(pad, ((0, 0), (1, 1)), constant_values=-np.inf)
    core = pad[1:-1, 1:-1]
    is_max = np.ones_like(values, dtype=bool)
    for dt in (-1, 0, 1):
        for dp in (-1, 0, 1):
            if dt or dp:
                is_max &= core >= pad[1 + dt:T + 1 + dt, 1 + dp:P + 1 + dp]
    cand = np.argwhere(is_max)
    order = np.argsort(-values[is_max], kind="stable")
    chosen: list[tuple[int, int]] = []
    for i in order:
        t, p = map(int, cand[i])
        ok = True
        for t2, p2 in chosen:
            dt = min(abs(t - t2), T - abs(t - t2))
            if max(dt, abs(p - p2)) < sep:
                ok = False
                break
        if ok:
            chosen.append((t, p))
            if len(chosen) == K:
                break
    return chosen


_GRID_CACHE: dict = {}


def _grid_steering(plan, G, pitch, grid: MusicGrid):
    key = (tuple(plan.reference), G.tobytes(), pitch, grid)
    A = _GRID_CACHE.get(key)
    if A is None:
        th, ph = np.radians(grid.theta_deg), np.radians(grid.phi_deg)
        v = wave_vectors(th[:, None], ph[None, :]).reshape(-1, 2)
        A = _u_steering(plan, G, pitch, v)
        if len(_GRID_CACHE) > 4:
            _GRID_CACHE.clear()
        _GRID_CACHE[key] = A
    return A


def music_2d(R_smooth: np.ndarray, plan: SmoothingPlan, K: int, G=None, pitch: float = 0.5,
             grid: MusicGrid | None = None, refine: bool = True) -> Spectrum:
    """Coarray MUSIC over an azimuth/elevation grid.

    Parameters
    ----------
    R_smooth : ndarray
        Smoothed covariance indexed like ``plan.reference``.
    K : int
        Number of sources; must be below the window size.
    G : ndarray, optional
        Ring embedding (identity for the Gaussian ring).
    refine : bool
        Polish each grid peak with a local Nelder-Mead search.

    Returns
    -------
    Spectrum
        Pseudospectrum and ``K`` estimates ``(theta, phi)`` in radians,
        strongest first.
    """
    M = R_smooth.shape[0]
    if not 0 < K < M:
        raise InvalidScenarioError(f"K={K} must satisfy 0 < K < {M}")
    grid = grid or MusicGrid()
    G = np.eye(2) if G is None else np.asarray(G, float)
    En = _noise_subspace(R_smooth, K)
    A = _grid_steering(plan, G, pitch, grid)
    th, ph = grid.theta_deg, grid.phi_deg
    vals = _pseudo(En, A).reshape(len(th), len(ph))
    est = []
    for t, p in _peaks(vals, K, grid.min_separation):
        x0 = np.radians([th[t], ph[p]])
        if refine:
            def cost(x):
                a = _u_steering(plan, G, pitch, wave_vectors(x[0], x[1]).reshape(1, 2))
                return float(np.sum(np.abs(En.conj().T @ a) ** 2))
            h = np.radians(grid.step_deg)
            res = minimize(cost, x0, method="Nelder-Mead",
                           options={"xatol": 1e-6, "fatol": 1e-14, "initial_simplex":
                                    [x0, x0 + [h / 2, 0], x0 + [0, h / 2]]})
            x = res.x if res.fun <= cost(x0) else x0
            x0 = np.array([_wrap(x[0]), float(np.clip(x[1], 1e-9, np.pi / 2))])
        est.append((float(x0[0]), float(x0[1])))
    return Spectrum(th, ph, vals, est)


def _wrap(a):
    return (np.asarray(a) + np.pi) % (2 * np.pi) - np.pi


def rmse(estimates, truth) -> float:
    """Root-mean-square angle error after optimal per-trial pairing.

    Parameters
    ----------
    estimates : sequence of trials, each a sequence of ``(theta, phi)``
    truth : sequence of ``(theta, phi)`` shared by all trials, or one such
        sequence per trial.

    Examples
    --------
    >>> rmse([[(0.1, 0.3)]], [(0.0, 0.3)])
    0.1
    """
    est = [np.asarray(e, float).reshape(-1, 2) for e in estimates]
    if not est:
        raise InvalidScenarioError("no trials")
    tr = np.asarray(truth, float)
    per_trial = tr.ndim == 3
    total, count = 0.0, 0
    for j, e in enumerate(est):
        t = tr[j] if per_trial else tr.reshape(-1, 2)
        if e.shape != t.shape:
            raise InvalidScenarioError(f"trial {j}: {len(e)} estimates for {len(t)} sources")
        dth = _wrap(e[:, None, 0] - t[None, :, 0])
        cost = dth**2 + (e[:, None, 1] - t[None, :, 1]) ** 2
        r, c = linear_sum_assignment(cost)
        total += float(cost[r, c].sum())
        count += len(t)
    return round(math.sqrt(total / count), 15)


def random_sources(rng: np.random.Generator, K: int, phi_range_deg=(10.0, 60.0),
                   min_separation: float = 0.25, power: float = 1.0) -> list[Source]:
    """``K`` sources with uniform azimuth, elevation in ``phi_range_deg`` and
    wave vectors at least ``min_separation`` apart."""
    lo, hi = np.radians(phi_range_deg)
    out: list[Source] = []
    for _ in range(10000):
        th = rng.uniform(-np.pi, np.pi)
        ph = rng.uniform(lo, hi)
        v = wave_vectors(th, ph)
        if all(np.linalg.norm(v - wave_vectors(s.theta, s.phi)) >= min_separation for s in out):
            out.append(Source(float(th), float(ph), power))
            if len(out) == K:
                return out
    raise InvalidScenarioError("could not place sources with the requested separation")


@dataclass(frozen=True)
class MonteCarloResult:
    snapshots: tuple
    rmse: dict
    truth: list
    estimates: dict

    def to_dict(self) -> dict:
        return {"snapshots": list(self.snapshots),
                "rmse": {str(L): self.rmse[L] for L in self.snapshots},
                "per_trial_truth": self.truth,
                "per_trial_estimates": {str(L): self.estimates[L] for L in self.snapshots}}


def _one_trial(arr, plan, K, snr_db, snapshot_list, seed, trial, coupling, sources,
               grid, refine, phi_range_deg, min_separation):
    rsrc, _, _ = trial_rngs(seed, trial)
    srcs = list(sources) if sources else random_sources(rsrc, K, phi_range_deg, min_separation)
    scen = Scenario(srcs, snr_db, max(snapshot_list), coupling, seed)
    X = simulate(arr, scen, trial)
    G = arr.generator_matrix
    out = {}
    for L in snapshot_list:
        sig = vectorized_coarray_signal(X[:, :L], arr)
        R = smoothed_covariance(plan, sig)
        spec = music_2d(R, plan, len(srcs), G, arr.pitch, grid, refine)
        out[L] = spec.estimates
    return [(s.theta, s.phi) for s in srcs], out


def monte_carlo(arr: SensorArray, plan: SmoothingPlan, K: int = 6, snr_db: float = 0.0,
                snapshot_list=(200,), trials: int = 100, seed: int = 0,
                coupling: Coupling | None = Coupling(), sources=None,
                grid: MusicGrid | None = None, refine: bool = True, threads: int = 1,
                phi_range_deg=(10.0, 60.0), min_separation: float = 0.25) -> MonteCarloResult:
    """Seeded DOA trials over several snapshot counts.

    Each trial owns its own random streams, and shorter runs reuse the first
    columns of the longest one, so results are identical for any ``threads``.
    """
    snapshot_list = tuple(sorted(int(L) for L in snapshot_list))
    K = len(sources) if sources else K
    check_identifiability(plan, K)
    grid = grid or MusicGrid()
    args = (arr, plan, K, snr_db, snapshot_list, seed)
    extra = (coupling, sources, grid, refine, phi_range_deg, min_separation)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(lambda t: _one_trial(*args, t, *extra), range(trials)))
    else:
        results = [_one_trial(*args, t, *extra) for t in range(trials)]
    truth = [r[0] for r in results]
    est = {L: [r[1][L] for r in results] for L in snapshot_list}
    errs = {L: rmse(est[L], truth) for L in snapshot_list}
    return MonteCarloResult(snapshot_list, errs, truth, est)


# ---------------------------------------------------------------- patterns

class Marker(enum.Enum):
    NO_SIDELOBE = "no_sidelobe"


NO_SIDELOBE = Marker.NO_SIDELOBE


def _phys(points, G=None, pitch: float = 0.5) -> np.ndarray:
    if isinstance(points, SensorArray):
        return points.positions()
    u = np.array(list(points), dtype=float).reshape(-1, 2)
    G = np.eye(2) if G is None else np.asarray(G, float)
    return pitch * u @ G.T


def array_factor(z, theta, phi, weights=None, convention: str = "standard"):
    """``sum_q I_q exp(+i 2 pi <k, z_q>)`` at the given angles.

    ``convention="standard"`` takes ``theta`` as azimuth and ``phi`` as
    elevation; ``"swapped"`` exchanges the two roles.

    Parameters
    ----------
    z : (N, 2) array or SensorArray
        Physical positions in wavelengths.
    """
    z = z.positions() if isinstance(z, SensorArray) else np.asarray(z, float).reshape(-1, 2)
    if convention == "swapped":
        theta, phi = phi, theta
    elif convention != "standard":
        raise ValueError(f"unknown convention {convention!r}")
    w = np.ones(len(z)) if weights is None else np.asarray(weights)
    if len(w) != len(z):
        raise ValueError("one weight per sensor is required")
    v = wave_vectors(theta, phi)
    return np.exp(2j * np.pi * v @ z.T) @ w


@dataclass
class PatternCut:
    """Two-way pattern along one azimuth, elevation swept over ``[-90, 90]``.

    Negative elevations stand for the opposite azimuth.
    """

    azimuth_deg: float
    elevation_deg: np.ndarray
    db: np.ndarray
    tx: np.ndarray = field(repr=False, default=None)
    rx: np.ndarray = field(repr=False, default=None)

    def level_db(self, el_deg: float) -> float:
        return float(_two_way_db(self.tx, self.rx, np.radians(self.azimuth_deg),
                                 np.radians(el_deg), self._peak))

    @property
    def _peak(self) -> float:
        return float(len(self.tx) * len(self.rx))


@dataclass
class Pattern:
    """Collection of cuts, one per azimuth in ``[0, 180)``."""

    cuts: list
    normalization: str = "peak |AF_tx| |AF_rx| = N_tx N_rx"


def _two_way_db(tx, rx, az, el, peak):
    v = wave_vectors(az, el)
    a = np.abs(np.exp(2j * np.pi * v @ tx.T).sum(-1)) * np.abs(np.exp(2j * np.pi * v @ rx.T).sum(-1))
    with np.errstate(divide="ignore"):
        return 20 * np.log10(a / peak)


def pattern_cut(tx, rx, azimuth_deg: float, step_deg: float = 0.25, G=None,
                pitch: float = 0.5) -> PatternCut:
    """Normalized two-way pattern ``|AF_tx| |AF_rx|`` along one azimuth."""
    T, Rx = _phys(tx, G, pitch), _phys(rx, G, pitch)
    if len(T) == 0 or len(Rx) == 0:
        raise ValueError("transmit and receive arrays must be non-empty")
    n = int(round(90.0 / step_deg))
    el = step_deg * np.arange(-n, n + 1)
    cut = PatternCut(float(azimuth_deg), el, None, T, Rx)
    cut.db = _two_way_db(T, Rx, np.radians(azimuth_deg), np.radians(el)[:, None], cut._peak).ravel()
    return cut


def two_way_pattern(tx, rx, step_deg: float = 0.25, az_step_deg: float | None = None,
                    G=None, pitch: float = 0.5) -> Pattern:
    """Cuts at every azimuth in ``[0, 180)`` with spacing ``az_step_deg``."""
    az_step = az_step_deg or step_deg
    az = az_step * np.arange(int(round(180.0 / az_step)))
    return Pattern([pattern_cut(tx, rx, a, step_deg, G, pitch) for a in az])


def _main_lobe(db: np.ndarray) -> tuple[int, int, int]:
    i0 = int(np.argmax(db))
    lo = i0
    while lo > 0 and db[lo - 1] <= db[lo]:
        lo -= 1
    hi = i0
    while hi < len(db) - 1 and db[hi + 1] <= db[hi]:
        hi += 1
    return i0, lo, hi


def hpbw(cut: PatternCut) -> float:
    """Width in degrees of the main lobe at -3 dB along ``cut``.

    Grid crossings are polished by root finding on the exact pattern.
    """
    el, db = cut.elevation_deg, cut.db
    i0, lo, hi = _main_lobe(db)
    peak = db[i0]

    def f(x):
        return cut.level_db(x) - (peak - 3.0) if cut.tx is not None else None

    def edge(rng_):
        for a, b in rng_:
            if db[b] < peak - 3.0 <= db[a]:
                if cut.tx is not None:
                    return brentq(f, el[a], el[b], xtol=1e-10)
                t = (db[a] - (peak - 3.0)) / (db[a] - db[b])
                return el[a] + t * (el[b] - el[a])
        return None

    right = edge((i, i + 1) for i in range(i0, hi))
    left = edge((i, i - 1) for i in range(i0, lo, -1))
    if right is None or left is None:
        return float("inf")
    return float(right - left)


def cut_sidelobe_db(cut: PatternCut):
    """Highest level outside the main lobe, or ``NO_SIDELOBE``."""
    db = cut.db
    i0, lo, hi = _main_lobe(db)
    outside = np.concatenate([db[:lo], db[hi + 1:]])
    outside = outside[np.isfinite(outside)]
    if outside.size == 0:
        return NO_SIDELOBE
    return float(outside.max())


def sls(pattern):
    """Main-peak level minus the highest sidelobe, in dB.

    Accepts a :class:`Pattern` (worst sidelobe over all cuts) or a single
    :class:`PatternCut`. Returns ``NO_SIDELOBE`` when no cut has a sidelobe,
    e.g. for a single-element array.
    """
    cuts = pattern.cuts if isinstance(pattern, Pattern) else [pattern]
    levels = [s for s in (cut_sidelobe_db(c) for c in cuts) if s is not NO_SIDELOBE]
    if not levels:
        return NO_SIDELOBE
    peak = max(float(np.max(c.db)) for c in cuts)
    return peak - max(levels)


def worst_sidelobe_cut(pattern: Pattern) -> PatternCut | None:
    best, level = None, -np.inf
    for c in pattern.cuts:
        s = cut_sidelobe_db(c)
        if s is not NO_SIDELOBE and s > level:
            best, level = c, s
    return best


def worst_hpbw(pattern: Pattern) -> tuple[float, float]:
    """Largest main-lobe width over all cuts and the azimuth where it occurs."""
    widths = [(hpbw(c), c.azimuth_deg) for c in pattern.cuts]
    return max(widths)
