"""Command-line front end: scan orchestration and bit-stable CSV/JSON output.

Every data file is CSV with a header row and shortest round-trip float
formatting, paired with a JSON metadata sidecar carrying the fully resolved
parameter set.  Reruns with identical configuration produce byte-identical
CSV; wall times live only in the sidecars.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import ModelConsistencyError, ModelParams
from .purity import (BracketingError as PurityBracketingError, critical_chi_q,
                     power_law_fit, purity_scan)
from .semiclassical import (BracketingError as ClassicalBracketingError,
                            ClassicalPoint, IntegrationError, find_fixed_points,
                            integrate_trajectory, theta_min_analysis,
                            twin_critical_points, twin_energy_reduced)
from .spectral import SolverError, spectrum

_NUMERICAL_ERRORS = (PurityBracketingError, ClassicalBracketingError,
                     IntegrationError, SolverError, ModelConsistencyError,
                     ValueError)


class UsageError(Exception):
    pass


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def write_metadata(path: Path, payload: dict):
    payload = dict(payload)
    payload["triwell_version"] = __version__
    path.write_text(json.dumps(payload, indent=2, sort_keys=True,
                               default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _params_dict(params: ModelParams) -> dict:
    d = {"omega": params.omega, "kappa": params.kappa, "lam": params.lam,
         "n_particles": params.n_particles, "omega_eff": params.omega_eff}
    if params.omega != 0.0 and params.n_particles >= 1:
        d["chi"] = params.chi
        d["mu"] = params.mu
    return d


def resolve_params(args, n_particles: int) -> ModelParams:
    raw = args.kappa is not None or args.lam is not None
    reduced = args.chi is not None or args.mu is not None
    if raw and reduced:
        raise UsageError("raw (--kappa/--lam) and reduced (--chi/--mu) "
                         "parameters are mutually exclusive")
    if raw:
        return ModelParams(args.omega, args.kappa or 0.0, args.lam or 0.0,
                           n_particles)
    return ModelParams.from_reduced(args.omega, args.chi or 0.0,
                                    args.mu or 0.0, n_particles)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _single_n(args) -> int:
    if len(args.n) != 1:
        raise UsageError("this command takes exactly one --n value")
    return args.n[0]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_spectrum(args) -> int:
    n = _single_n(args)
    params = resolve_params(args, n)
    t0 = time.perf_counter()
    result = spectrum(params, args.k)
    out = _outdir(args)
    rows = [(i, float(result.eigenvalues[i]), float(result.residuals[i]))
            for i in range(args.k)]
    write_csv(out / "spectrum.csv", ["index", "energy", "residual"], rows)
    write_metadata(out / "spectrum.meta.json", {
        "command": "spectrum",
        "params": _params_dict(params),
        "k": args.k,
        "max_residual": float(np.max(result.residuals)),
        "wall_time_s": time.perf_counter() - t0,
    })
    return 0


def cmd_purity_scan(args) -> int:
    if args.chi_steps < 1 or args.chi_max <= args.chi_min:
        raise UsageError("need chi_min < chi_max and at least one step")
    grid = np.linspace(args.chi_min, args.chi_max, args.chi_steps)
    out = _outdir(args)
    t0 = time.perf_counter()
    for n in args.n:
        scan = purity_scan(args.omega, args.mu or 0.0, n, grid,
                           workers=args.workers)
        rows = list(zip(scan.chi_grid, scan.purity, scan.derivative))
        write_csv(out / f"purity_N{n}.csv", ["chi", "purity", "dP_dchi"], rows)
        write_metadata(out / f"purity_N{n}.meta.json", {
            "command": "purity-scan",
            "params": {"omega": args.omega, "mu": args.mu or 0.0,
                       "n_particles": n},
            "chi_grid": {"min": args.chi_min, "max": args.chi_max,
                         "steps": args.chi_steps},
            "workers": args.workers,
            "wall_time_s": time.perf_counter() - t0,
        })
    return 0


def _scaling_task(task):
    omega, mu, n, window, tol = task
    return n, critical_chi_q(omega, mu, n, window, tol=tol)


def cmd_scaling(args) -> int:
    if len(args.n) < 2:
        raise UsageError("scaling requires at least two --n values")
    mu = args.mu or 0.0
    window = (args.window_min, args.window_max)
    tasks = [(args.omega, mu, n, window, args.tol) for n in args.n]
    t0 = time.perf_counter()
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = dict(pool.map(_scaling_task, tasks))
    else:
        results = dict(map(_scaling_task, tasks))
    ns = sorted(results)
    chi_cq = [results[n] for n in ns]
    fit = power_law_fit(ns, chi_cq, args.chi_c) if len(ns) >= 3 else None
    out = _outdir(args)
    write_csv(out / "scaling.csv", ["n", "chi_cq"],
              list(zip(ns, chi_cq)))
    payload = {
        "command": "scaling",
        "params": {"omega": args.omega, "mu": mu, "chi_c": args.chi_c},
        "n_values": ns,
        "window": list(window),
        "tolerance": args.tol,
        "workers": args.workers,
        "wall_time_s": time.perf_counter() - t0,
    }
    if fit is not None:
        payload["fit"] = {
            "exponent": fit.exponent,
            "exponent_stderr": fit.exponent_stderr,
            "ln_prefactor": fit.ln_prefactor,
            "ln_prefactor_stderr": fit.ln_prefactor_stderr,
            "residuals": fit.residuals,
        }
    write_metadata(out / "scaling.meta.json", payload)
    return 0


def cmd_fields(args) -> int:
    from .distributions import (count_local_maxima, husimi_population,
                                phase_distribution, phase_marginal_variance)
    from .spectral import ground_state

    n = _single_n(args)
    params = resolve_params(args, n)
    t0 = time.perf_counter()
    _, state = ground_state(params)
    i_grid = np.linspace(0.0, float(n), args.pop_grid)
    husimi = husimi_population(state, i_grid, i_grid)
    phi_grid = 2.0 * np.pi * np.arange(args.phase_grid) / args.phase_grid
    phases = phase_distribution(state, phi_grid, phi_grid)
    out = _outdir(args)
    rows = [(i_grid[a], i_grid[b], husimi.values[a, b])
            for a in range(args.pop_grid) for b in range(args.pop_grid)
            if husimi.mask[a, b]]
    write_csv(out / "husimi.csv", ["i1", "i2", "q"], rows)
    rows = [(phi_grid[a], phi_grid[b], phases.values[a, b])
            for a in range(args.phase_grid) for b in range(args.phase_grid)]
    write_csv(out / "phase.csv", ["phi1", "phi2", "density"], rows)
    write_metadata(out / "fields.meta.json", {
        "command": "fields",
        "params": _params_dict(params),
        "pop_grid": args.pop_grid,
        "phase_grid": args.phase_grid,
        "husimi_maxima_rel02": count_local_maxima(husimi, 0.2),
        "phase_circular_variance": phase_marginal_variance(phases),
        "wall_time_s": time.perf_counter() - t0,
    })
    return 0


def cmd_fixed_points(args) -> int:
    n = _single_n(args)
    params = resolve_params(args, n)
    t0 = time.perf_counter()
    records = find_fixed_points(params, replicate=args.replicate)
    out = _outdir(args)
    rows = []
    for rec in records:
        rows.append((rec.label, rec.sector, rec.point.w1.real,
                     rec.point.w1.imag, rec.point.w2.real, rec.point.w2.imag,
                     rec.point.theta, rec.point.i_z, rec.energy_per_particle,
                     rec.stability, rec.gradient_norm))
    write_csv(out / "fixed_points.csv",
              ["label", "sector", "w1_re", "w1_im", "w2_re", "w2_im",
               "theta", "i_z", "energy_per_particle", "stability",
               "gradient_norm"], rows)
    meta = {
        "command": "fixed-points",
        "params": _params_dict(params),
        "wall_time_s": time.perf_counter() - t0,
    }
    if args.chi_scan is not None:
        lo, hi, steps = args.chi_scan
        scan_rows = []
        for chi in np.linspace(lo, hi, int(steps)):
            kappa = chi * args.omega / (n - 1)
            branch = {"1+": np.nan, "2+": np.nan, "3+": np.nan, "4+": np.nan}
            scan_params = ModelParams.from_reduced(args.omega, chi,
                                                   args.mu or 0.0, n)
            for rec in find_fixed_points(scan_params):
                if rec.label in branch:
                    branch[rec.label] = rec.energy_per_particle
            gap = branch["1+"] - branch["4+"]
            scan_rows.append((chi, kappa, branch["1+"], branch["2+"],
                              branch["3+"], branch["4+"], gap))
        write_csv(out / "branch_energies.csv",
                  ["chi", "kappa", "h_1p", "h_2p", "h_3p", "h_4p",
                   "gap_1p_4p"], scan_rows)
        meta["chi_scan"] = {"min": lo, "max": hi, "steps": int(steps)}
    write_metadata(out / "fixed_points.meta.json", meta)
    return 0


def cmd_trajectory(args) -> int:
    n = _single_n(args)
    params = resolve_params(args, n)
    inits = args.init or [(1.9106332362490186, 0.0)]
    out = _outdir(args)
    t0 = time.perf_counter()
    drifts = []
    for idx, (theta, phi) in enumerate(inits):
        start = ClassicalPoint.from_twin_angles(theta, phi)
        traj = integrate_trajectory(start, params, args.t_max, args.dt)
        i1, i2, phi1, phi2 = traj.canonical_arrays()
        rows = list(zip(traj.times, i1, i2, phi1, phi2, traj.i_z(),
                        traj.energies))
        write_csv(out / f"trajectory_{idx:03d}.csv",
                  ["t", "i1", "i2", "phi1", "phi2", "i_z", "energy"], rows)
        drifts.append(traj.relative_energy_drift)
    write_metadata(out / "trajectory.meta.json", {
        "command": "trajectory",
        "params": _params_dict(params),
        "initial_conditions": [list(ic) for ic in inits],
        "t_max": args.t_max,
        "dt": args.dt,
        "max_relative_energy_drift": max(drifts),
        "wall_time_s": time.perf_counter() - t0,
    })
    return 0


def cmd_theta_min(args) -> int:
    if args.chi_steps < 2 or args.chi_max <= args.chi_min:
        raise UsageError("need chi_min < chi_max and at least two steps")
    mu = args.mu or 0.0
    grid = np.linspace(args.chi_min, args.chi_max, args.chi_steps)
    t0 = time.perf_counter()
    rows = theta_min_analysis(grid, mu=mu, omega=args.omega)
    out = _outdir(args)
    n_ref = args.n[0] if args.n else 30
    table = [(r.chi, r.chi * args.omega / (n_ref - 1), r.theta_min, r.h_min,
              r.dh_dchi, r.d2h_dchi2, r.h1_at_min, r.first_order_residual,
              r.degenerate) for r in rows]
    write_csv(out / "theta_min.csv",
              ["chi", "kappa", "theta_min", "h_min_per_particle", "dh_dchi",
               "d2h_dchi2", "h1_at_min", "first_order_residual",
               "degenerate"], table)
    write_metadata(out / "theta_min.meta.json", {
        "command": "theta-min",
        "params": {"omega": args.omega, "mu": mu, "n_reference": n_ref},
        "chi_grid": {"min": args.chi_min, "max": args.chi_max,
                     "steps": args.chi_steps},
        "wall_time_s": time.perf_counter() - t0,
    })
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _parse_init(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected THETA,PHI")
    return float(parts[0]), float(parts[1])


def _add_common(sub):
    sub.add_argument("--n", type=int, nargs="+", default=[30],
                     help="total particle number(s)")
    sub.add_argument("--omega", type=float, default=-1.0,
                     help="tunneling rate (default -1)")
    sub.add_argument("--chi", type=float, default=None,
                     help="reduced self-collision parameter")
    sub.add_argument("--mu", type=float, default=None,
                     help="reduced cross-collision parameter")
    sub.add_argument("--kappa", type=float, default=None,
                     help="raw self-collision coupling")
    sub.add_argument("--lam", type=float, default=None,
                     help="raw cross-collision coupling")
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--workers", type=int, default=1,
                     help="worker-pool size for scans")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for randomized utilities")
    sub.add_argument("--config", default=None,
                     help="key=value file overriding defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triwell",
        description="Triple-well condensate simulation engine")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("spectrum", help="low-lying eigenvalues")
    p.add_argument("--k", type=int, default=4, help="number of eigenpairs")
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = subs.add_parser("purity-scan", help="ground-state purity vs chi")
    p.add_argument("--chi-min", type=float, default=0.0)
    p.add_argument("--chi-max", type=float, default=3.0)
    p.add_argument("--chi-steps", type=int, default=61)
    _add_common(p)
    p.set_defaults(func=cmd_purity_scan)

    p = subs.add_parser("scaling", help="chi_c^q(N) and power-law fit")
    p.add_argument("--window-min", type=float, default=2.0)
    p.add_argument("--window-max", type=float, default=2.6)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--chi-c", type=float, default=2.0,
                   help="semiclassical critical value used in the fit")
    _add_common(p)
    p.set_defaults(func=cmd_scaling)

    p = subs.add_parser("fields", help="Husimi and phase distributions")
    p.add_argument("--pop-grid", type=int, default=101)
    p.add_argument("--phase-grid", type=int, default=256)
    _add_common(p)
    p.set_defaults(func=cmd_fields)

    p = subs.add_parser("fixed-points", help="classical equilibria table")
    p.add_argument("--replicate", action="store_true",
                   help="emit the equivalent twin sectors too")
    p.add_argument("--chi-scan", type=float, nargs=3, default=None,
                   metavar=("LO", "HI", "STEPS"),
                   help="also scan branch energies over chi")
    _add_common(p)
    p.set_defaults(func=cmd_fixed_points)

    p = subs.add_parser("trajectory", help="semiclassical trajectories")
    p.add_argument("--init", type=_parse_init, action="append", default=None,
                   metavar="THETA,PHI",
                   help="twin-sector initial condition (repeatable)")
    p.add_argument("--t-max", type=float, default=100.0)
    p.add_argument("--dt", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(func=cmd_trajectory)

    p = subs.add_parser("theta-min", help="twin-manifold minimum analysis")
    p.add_argument("--chi-min", type=float, default=0.0)
    p.add_argument("--chi-max", type=float, default=4.0)
    p.add_argument("--chi-steps", type=int, default=81)
    _add_common(p)
    p.set_defaults(func=cmd_theta_min)

    parser._command_parsers = [subs.choices[name] for name in subs.choices]
    return parser


def _apply_config(argv, parser):
    """Load key=value defaults from --config before full parsing."""
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    if "--config" in argv:
        idx = argv.index("--config")
        if idx + 1 >= len(argv):
            parser.error("--config requires a file path")
        path = Path(argv[idx + 1])
        if not path.exists():
            parser.error(f"config file not found: {path}")
        overrides = {}
        for line in path.read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                parser.error(f"malformed config line: {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            overrides[key.replace("-", "_")] = _coerce(key, value)
        parser.set_defaults(**overrides)
        # subparsers re-apply their own defaults, so push overrides there too
        for sub in getattr(parser, "_command_parsers", []):
            sub.set_defaults(**{k: v for k, v in overrides.items()
                                if any(a.dest == k for a in sub._actions)})
    return argv


def _coerce(key: str, value: str):
    parts = value.replace(",", " ").split()
    if key == "n":
        return [int(p) for p in parts]
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def main(argv=None) -> int:
    parser = build_parser()
    argv = _apply_config(argv, parser)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
