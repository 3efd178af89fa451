"""Command-line front end.

Usage::

    crtarray design   --config run.cfg --out out/
    crtarray analyze  array=out/array.json
    crtarray uspace   array=out/array.json method=II l_R=7 l_p=3
    crtarray simulate --config sim.cfg --seed 7 --threads 4
    crtarray pattern  kind=t_array p=13
    crtarray verify

Settings come from a ``key=value`` config file (``#`` starts a comment,
repeated keys form a list) and may be overridden by trailing ``key=value``
arguments. Exit status is 0 on success, 2 for invalid input and 3 when a
verification fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, rings
from .coarray import coarray_report, difference_coarray, hole_free_check, restricted_support
from .designs import InvalidDesignError, SensorArray, build, expected_count, hscrt
from .sensing import (Coupling, InvalidScenarioError, MusicGrid, Source, monte_carlo,
                      NO_SIDELOBE, hpbw, sls, two_way_pattern, worst_hpbw)
from .smoothing import (HoleError, InvalidPlanError, method1_subarrays, method2_subarrays,
                        plan_holes, selection_matrices, to_u_space)

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 2, 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config

def parse_config(text: str) -> dict:
    """Parse ``key=value`` lines; a repeated key collects its values in a list.

    >>> parse_config("kind=q_tuple\\ngenerators=-1-2i\\ngenerators=-1+2i")
    {'kind': 'q_tuple', 'generators': ['-1-2i', '-1+2i']}
    """
    cfg: dict = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {n}: empty key")
        if key in cfg:
            prev = cfg[key]
            cfg[key] = (prev if isinstance(prev, list) else [prev]) + [value]
        else:
            cfg[key] = value
    return cfg


def _as_list(v) -> list:
    if v is None:
        return []
    return v if isinstance(v, list) else [v]


def _get(cfg, key, cast=str, default=None):
    v = cfg.get(key, default)
    if v is None:
        return None
    if isinstance(v, list):
        raise ConfigError(f"{key} given more than once")
    try:
        return cast(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {v!r}") from exc


def _flag(v) -> bool:
    return str(v).lower() in ("1", "true", "yes", "on")


def fmt(x) -> str:
    """Twelve significant digits, ``.`` as decimal separator."""
    return f"{float(x):.12g}"


def _clean(obj):
    """Round floats to 12 significant digits for stable JSON."""
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else str(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return _clean(obj.item())
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dump(obj) -> str:
    return json.dumps(_clean(obj), indent=1, sort_keys=True) + "\n"


class Run:
    """Output directory plus the run record embedded in every file."""

    def __init__(self, command, cfg, seed, out, threads):
        self.command, self.cfg, self.seed, self.threads = command, cfg, seed, threads
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)

    @property
    def record(self) -> dict:
        return {"command": self.command, "config": self.cfg, "seed": self.seed,
                "version": __version__}

    def write_json(self, name, payload) -> Path:
        path = self.out / name
        body = dict(payload)
        body["run"] = self.record
        path.write_text(_dump(body))
        return path

    def write_csv(self, name, header, rows) -> Path:
        buf = io.StringIO()
        for k, v in sorted(self.record.items()):
            buf.write(f"# {k}={json.dumps(v, sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        path = self.out / name
        path.write_text(buf.getvalue())
        return path


# ---------------------------------------------------------------- helpers

def _array_from_cfg(cfg) -> SensorArray:
    if "array" in cfg:
        path = Path(_get(cfg, "array"))
        if not path.exists():
            raise FileNotFoundError(f"array file {path} not found")
        try:
            return SensorArray.from_json(path.read_text())
        except (json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"{path} is not an array file: {exc}") from exc
    kind = _get(cfg, "kind")
    if kind is None:
        raise ConfigError("give either array=<file> or kind=<design>")
    return build(kind, ring=_get(cfg, "ring"), p=_get(cfg, "p", int),
                 generators=_as_list(cfg.get("generators")),
                 N1=_get(cfg, "N1", int), N2=_get(cfg, "N2", int),
                 pitch=_get(cfg, "pitch", float, 0.5))


def _plan_from_cfg(cfg, arr: SensorArray | None = None):
    method = _get(cfg, "method")
    if method is None and arr is not None:
        method = "I" if arr.ring == rings.GAUSSIAN else "II"
    ordering = _get(cfg, "ordering", str, "x_asc_y_asc")
    if str(method).upper() == "I":
        g = [_get(cfg, k, int, 7) for k in ("x_g", "y_g", "l_x", "l_y")]
        return method1_subarrays(*g, ordering=ordering)
    if str(method).upper() == "II":
        return method2_subarrays(_get(cfg, "l_R", int, 7), _get(cfg, "l_p", int, 3), ordering)
    raise ConfigError(f"method must be I or II, got {method!r}")


# ---------------------------------------------------------------- commands

def cmd_design(run: Run) -> int:
    arr = _array_from_cfg(run.cfg)
    kw = {"N1": _get(run.cfg, "N1", int, 3), "N2": _get(run.cfg, "N2", int, 3)}
    if arr.kind == "q_tuple":
        kw = {"ring": arr.ring, "generators": list(arr.generators.values())}
    expected = expected_count(arr.kind, arr.p, **kw)
    run.write_json("array.json", arr.to_dict() | {"count": len(arr), "expected": expected})
    rows = [[fmt(x), fmt(y), lab] for (x, y), lab in zip(arr.positions(), arr.labels)]
    run.write_csv("array.csv", ["x", "y", "label"], rows)
    print(f"{arr.kind}: {len(arr)} sensors (closed form {expected})")
    return EXIT_OK


def cmd_analyze(run: Run) -> int:
    arr = _array_from_cfg(run.cfg)
    rep = coarray_report(arr, _get(run.cfg, "p", int, arr.p), threads=run.threads)
    run.write_json("coarray.json", rep)
    frag = rep["fragility"]["exact"] if rep["fragility"] else "n/a"
    print(f"{arr.kind}: support {rep['support_size']}, dof {rep['dof']}, "
          f"hole_free {rep['hole_free']}, fragility {frag}")
    return EXIT_OK


def cmd_uspace(run: Run) -> int:
    arr = _array_from_cfg(run.cfg)
    diff = difference_coarray(arr)
    phys = {tuple(arr.generator_matrix @ np.array(u, float)): w for u, w in diff.weights.items()}
    us = to_u_space(arr.generator_matrix, phys)
    plan = _plan_from_cfg(run.cfg, arr)
    holes = plan_holes(plan, us.points)
    run.write_json("plan.json", plan.to_dict() | {"holes": [list(h) for h in holes],
                                                  "l_R": us.l_R, "l_square": us.l_sq})
    if plan.method == "II":
        p = plan.params
        for role, J in selection_matrices(p["l_R"], p["l_p"], plan.ordering).items():
            run.write_csv(f"selection_{role}.csv", ["row", "col", "value"],
                          [[r, c, 1] for r, c in enumerate(J.columns)])
    print(f"plan {plan.method}: {plan.n_subarrays} subarrays x {plan.n_elements} elements; "
          f"hexagon radius {us.l_R}, square half-width {us.l_sq}")
    if holes:
        print(f"error: plan needs missing coarray point {holes[0]} ({len(holes)} total)",
              file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _sources_from_cfg(cfg):
    out = []
    for item in _as_list(cfg.get("source")):
        try:
            th, ph = (float(s) for s in item.split(","))
        except ValueError as exc:
            raise ConfigError(f"source must be theta_deg,phi_deg: {item!r}") from exc
        out.append(Source(math.radians(th), math.radians(ph)))
    return out or None


def cmd_simulate(run: Run) -> int:
    cfg = run.cfg
    arr = _array_from_cfg(cfg)
    plan = _plan_from_cfg(cfg, arr)
    snaps = [int(s) for s in _as_list(cfg.get("snapshots"))] or [200]
    coupling = None
    if _flag(cfg.get("coupling", "on")):
        coupling = Coupling(_get(cfg, "c_max", float, 0.2), _get(cfg, "radius_multiple", float, 3.0))
    sources = _sources_from_cfg(cfg)
    K = _get(cfg, "K", int, 6)
    snr = _get(cfg, "snr_db", float, 0.0)
    trials = _get(cfg, "trials", int, 10)
    grid = MusicGrid(_get(cfg, "grid_step", float, 1.0))
    res = monte_carlo(arr, plan, K, snr, snaps, trials, run.seed, coupling, sources, grid,
                      _flag(cfg.get("refine", "on")), run.threads)
    scenario = {"array": arr.kind, "p": arr.p, "sensors": len(arr), "K": K if not sources else len(sources),
                "snr_db": snr, "snapshots": list(res.snapshots), "trials": trials,
                "coupling": None if coupling is None else
                {"c_max": coupling.c_max, "radius_multiple": coupling.radius_multiple},
                "plan": {"method": plan.method, **plan.params}}
    body = res.to_dict()
    run.write_json("simulate.json", {"scenario": scenario, "rmse": body["rmse"],
                                     "per_trial_truth": body["per_trial_truth"],
                                     "per_trial_estimates": body["per_trial_estimates"]})
    for L in res.snapshots:
        print(f"L={L}: rmse {fmt(res.rmse[L])} rad")
    return EXIT_OK


def cmd_pattern(run: Run) -> int:
    cfg = run.cfg
    arr = _array_from_cfg(cfg)
    tx, rx = arr.mimo_split()
    step = _get(cfg, "step", float, 0.25)
    pat = two_way_pattern(tx, rx, step, _get(cfg, "az_step", float, step),
                          arr.generator_matrix, arr.pitch)
    csv_step = _get(cfg, "csv_az_step", float, 5.0)
    rows = []
    for c in pat.cuts:
        if abs(c.azimuth_deg / csv_step - round(c.azimuth_deg / csv_step)) > 1e-9:
            continue
        for e, v in zip(c.elevation_deg, c.db):
            rows.append([fmt(c.azimuth_deg), fmt(e), fmt(max(v, -300.0))])
    run.write_csv("pattern.csv", ["theta", "phi", "value_db"], rows)
    s_all, s0 = sls(pat), sls(pat.cuts[0])
    w, w_az = worst_hpbw(pat)
    metrics = {"sls_db": None if s_all is NO_SIDELOBE else s_all,
               "sls_principal_cut_db": None if s0 is NO_SIDELOBE else s0,
               "hpbw_worst_deg": w, "hpbw_worst_azimuth_deg": w_az,
               "hpbw_principal_cut_deg": hpbw(pat.cuts[0]),
               "n_tx": len(tx), "n_rx": len(rx), "kind": arr.kind}
    if arr.note:
        metrics["note"] = arr.note
    run.write_json("pattern.json", metrics)
    print(f"{arr.kind}: SLS {metrics['sls_db']} dB (principal cut {metrics['sls_principal_cut_db']}), "
          f"worst HPBW {fmt(w)} deg")
    return EXIT_OK


def verify_suite() -> list[tuple[str, bool, str]]:
    """Oracle checks: coprimality sweep, count identities, hole-free coverage."""
    from .designs import a2_cross, spinner_array, t_array, z2_cross
    results = []
    for ring in (rings.GAUSSIAN, rings.EISENSTEIN):
        pts = [(a, b) for a in range(-5, 6) for b in range(-5, 6) if (a, b) != (0, 0)]
        bad = 0
        for m, n in itertools.product(pts, pts):
            c1, c2 = rings.coprimality_conditions(ring, m, n)
            if not (c1 == c2 == rings.coprime_oracle(ring, m, n)):
                bad += 1
        results.append((f"coprimality sweep {ring.name}", bad == 0, f"{len(pts) ** 2} pairs, {bad} mismatches"))
    qt = build("q_tuple", "gaussian", generators=["-1-2i", "-1+2i", "-1+4i"])
    results.append(("q_tuple count", len(qt) == 169, f"{len(qt)} sensors"))
    fam = {rings.GAUSSIAN: (t_array, z2_cross), rings.EISENSTEIN: (spinner_array, a2_cross)}
    for ring, ps in ((rings.GAUSSIAN, (5, 13, 17)), (rings.EISENSTEIN, (7, 13))):
        for p in ps:
            h = hscrt(ring, p)
            dh = difference_coarray(h)
            base = restricted_support(dh, p)
            for arr in (h,) + tuple(f(p) for f in fam[ring]):
                exp = expected_count(arr.kind, p)
                results.append((f"{arr.kind} p={p} count", len(arr) == exp, f"{len(arr)} vs {exp}"))
                d = difference_coarray(arr)
                ok, missing = hole_free_check(d, p)
                same = restricted_support(d, p) == base
                results.append((f"{arr.kind} p={p} hole-free", ok and same,
                                f"{len(missing)} holes, support {'matches' if same else 'differs'}"))
    return results


def cmd_verify(run: Run) -> int:
    results = verify_suite()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    failed = [r[0] for r in results if not r[1]]
    run.write_json("verify.json", {"checks": [{"name": n, "pass": ok, "detail": d}
                                              for n, ok, d in results],
                                   "failed": failed})
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"design": cmd_design, "analyze": cmd_analyze, "uspace": cmd_uspace,
            "simulate": cmd_simulate, "pattern": cmd_pattern, "verify": cmd_verify}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crtarray", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("overrides", nargs="*", metavar="key=value")
    ap.add_argument("--config", type=Path)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--version", action="version", version=__version__)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_intermixed_args(argv)
    try:
        cfg = parse_config(args.config.read_text()) if args.config else {}
        for k, v in parse_config("\n".join(args.overrides)).items():
            cfg[k] = v
        seed = args.seed if args.seed is not None else _get(cfg, "seed", int, 0)
        cfg.pop("seed", None)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        run = Run(args.command, cfg, seed, args.out, args.threads)
        return COMMANDS[args.command](run)
    except (ConfigError, InvalidDesignError, InvalidPlanError, InvalidScenarioError,
            HoleError, FileNotFoundError, rings.UnsupportedRingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
