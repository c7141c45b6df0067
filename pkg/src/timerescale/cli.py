"""
Command-line front end.

    timerescale validate|simulate|sweep|work [options]

Exit status: 0 on success, 1 on a numerical or I/O failure, 2 on a usage or
configuration error. Options may also come from a ``key = value`` file given
with ``--config``; flags on the command line take precedence.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .propagate import DEFAULT_STEPS, TimeGrid, evolve, evolve_trajectory, propagator_distance
from .protocol import (AEDrive, AEParams, RescaledDrive, adiabatic_populations, ae_detuning,
                       ae_rabi, tr_detuning, tr_rabi)
from .rescale import validate_map
from .robustness import DETUNING, RABI, SweepError, SweepSpec, error_grid, pi_pulse_fidelity, sweep
from .workstats import EQUALITY_TOL, compare_protocols, endpoint_hamiltonians, work_distribution

log = logging.getLogger("timerescale")

COMMANDS = ("validate", "simulate", "sweep", "work")
DEFAULT_A = {
    "validate": [2.0],
    "simulate": [2.0, 10.0],
    "sweep": [1.0, 2.0, 10.0],
    "work": [2.0, 10.0],
}
DEFAULT_BETAS = [0.1, 1.0, 10.0]
IDENTITY_TOL = 1e-12
PROPAGATOR_TOL = 1e-6


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> list:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    return values


def _range(text: str):
    parts = text.split(":")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise argparse.ArgumentTypeError(f"expected LO:HI:N, got {text!r}")
    if len(parts) != 3 or n < 1 or (n > 1 and not hi > lo):
        raise argparse.ArgumentTypeError(f"invalid range {text!r}")
    return lo, hi, n


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value file with default options")
    common.add_argument("--omega0", type=float, default=2.0, help="peak Rabi frequency")
    common.add_argument("--beta-chirp", type=float, default=math.sqrt(2.0), help="chirp constant")
    common.add_argument("--t0", type=float, default=1.0, help="characteristic time (t_f = 8 t0)")
    common.add_argument("--a", type=_float_list, default=None,
                        help="comma-separated contraction parameters")
    common.add_argument("--steps", type=_positive_int, default=DEFAULT_STEPS,
                        help="integration steps per protocol window")
    common.add_argument("--eps-range", type=_range, default=None, metavar="LO:HI:N")
    common.add_argument("--delta-range", type=_range, default=None, metavar="LO:HI:N")
    common.add_argument("--beta-thermal", type=_float_list, default=None,
                        help="comma-separated inverse temperatures")
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--stride", type=_positive_int, default=1,
                        help="write every N-th trajectory node (simulate)")
    common.add_argument("--workers", type=int, default=1, help="threads for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="timerescale",
        description="Time-rescaled shortcuts to adiabatic population inversion.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "validate": "check rescaling properties and propagator equality",
        "simulate": "write population trajectories",
        "sweep": "fidelity versus systematic control errors",
        "work": "two-point-measurement work statistics of reference and rescaled protocols",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def read_config(path: Path) -> list:
    """Translate a ``key = value`` file into command-line tokens."""
    tokens = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        tokens += ["--" + key.replace("_", "-"), value]
    return tokens


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            file_tokens = read_config(args.config)
        except (OSError, ConfigError) as exc:
            parser.error(str(exc))
        # file options first so that explicit flags override them
        args = parser.parse_args([args.command] + file_tokens + list(argv[1:]))

    try:
        args.params = AEParams(args.omega0, args.beta_chirp, args.t0)
    except ValueError as exc:
        parser.error(str(exc))
    if args.a is None:
        args.a = list(DEFAULT_A[args.command])
    if not args.a:
        parser.error("--a needs at least one contraction parameter")
    if any(not (a > 0 and math.isfinite(a)) for a in args.a):
        parser.error("contraction parameters must be positive")
    if args.beta_thermal is None:
        args.beta_thermal = list(DEFAULT_BETAS)
    if not args.beta_thermal or any(not (b >= 0 and math.isfinite(b)) for b in args.beta_thermal):
        parser.error("--beta-thermal needs non-negative finite values")
    for name in ("eps_range", "delta_range"):
        rng = getattr(args, name)
        if rng is not None and rng[0] <= -1:
            parser.error(f"--{name.replace('_', '-')}: error fractions must be > -1")
    return args


# ---------------------------------------------------------------------------
# output helpers

def _num(x) -> str:
    return format(float(x), ".17g")


def _tag(a: float) -> str:
    return format(a, "g")


def provenance(args, **extra) -> dict:
    p = args.params
    out = {
        "command": args.command,
        "version": __version__,
        "omega0": p.omega0,
        "beta_chirp": p.beta_chirp,
        "t0": p.t0,
        "t_f": p.t_f,
        "a": list(args.a),
        "steps": args.steps,
    }
    out.update(extra)
    return out


def write_csv(path: Path, header: list, rows, prov: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key, value in prov.items():
            fh.write(f"# {key}={_prov_value(value)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _prov_value(value) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(_prov_value(v) for v in value)
    if isinstance(value, float):
        return _num(value)
    return str(value)


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _drive_for(params: AEParams, a: float):
    return AEDrive(params) if a == 1.0 else RescaledDrive(params, a)


# ---------------------------------------------------------------------------
# commands

def _validate_one(params: AEParams, a: float, steps: int) -> dict:
    rmap = params.rescale_map(a)
    report = validate_map(rmap)
    checks = report.to_dict()["checks"]

    tau = np.linspace(0.0, rmap.duration, 4001)
    t = rmap.f(tau)
    fp = rmap.f_prime(tau)
    rabi_res = np.max(np.abs(tr_rabi(tau, params, rmap) - fp * ae_rabi(t, params))) / params.omega0
    det_res = (np.max(np.abs(tr_detuning(tau, params, rmap) - fp * ae_detuning(t, params)))
               / params.chirp_amplitude)
    checks.append({"name": "composition_rabi", "passed": bool(rabi_res <= IDENTITY_TOL),
                   "residual": float(rabi_res), "required": True, "note": ""})
    checks.append({"name": "composition_detuning", "passed": bool(det_res <= IDENTITY_TOL),
                   "residual": float(det_res), "required": True, "note": ""})

    ref, fast = AEDrive(params), RescaledDrive(params, a)
    boundary = 0.0
    for t_ref, t_fast in ((0.0, 0.0), (params.t_f, rmap.duration)):
        s_ref, s_fast = ref(t_ref), fast(t_fast)
        boundary = max(boundary,
                       abs(s_ref.rabi - s_fast.rabi) / params.omega0,
                       abs(s_ref.detuning - s_fast.detuning) / params.chirp_amplitude)
    checks.append({"name": "boundary_matching", "passed": bool(boundary <= IDENTITY_TOL),
                   "residual": float(boundary), "required": True, "note": ""})

    u_ref = evolve(ref, TimeGrid.for_drive(ref, steps))
    u_fast = evolve(fast, TimeGrid.for_drive(fast, steps))
    dist = propagator_distance(u_ref, u_fast)
    checks.append({"name": "propagator_equality", "passed": bool(dist <= PROPAGATOR_TOL),
                   "residual": dist, "required": True, "note": f"tol {PROPAGATOR_TOL:g}"})

    ok = all(c["passed"] for c in checks if c["required"])
    return {"a": a, "ok": ok, "checks": checks, "warnings": report.warnings}


def cmd_validate(args) -> int:
    results = [_validate_one(args.params, a, args.steps) for a in args.a]
    for res in results:
        print(f"a = {_tag(res['a'])}: {'PASS' if res['ok'] else 'FAIL'}")
        for c in res["checks"]:
            flag = "ok  " if c["passed"] else ("FAIL" if c["required"] else "info")
            print(f"  [{flag}] {c['name']:<22} residual = {c['residual']:.3e} {c['note']}".rstrip())
        for w in res["warnings"]:
            print(f"  warning: {w}")
    ok = all(r["ok"] for r in results)
    payload = {"provenance": provenance(args), "ok": ok, "results": results}
    if args.format == "csv":
        rows = [(_tag(r["a"]), c["name"], c["passed"], c["required"], float(c["residual"]))
                for r in results for c in r["checks"]]
        write_csv(args.out / "validate.csv", ["a", "check", "passed", "required", "residual"],
                  rows, provenance(args))
    else:
        write_json(args.out / "validate.json", payload)
    return 0 if ok else 1


def cmd_simulate(args) -> int:
    a_values = list(dict.fromkeys([1.0] + list(args.a)))
    for a in a_values:
        drive = _drive_for(args.params, a)
        traj = evolve_trajectory(drive, TimeGrid.for_drive(drive, args.steps))
        idx = np.arange(0, len(traj), args.stride)
        if idx[-1] != len(traj) - 1:
            idx = np.append(idx, len(traj) - 1)
        times = traj.times[idx]
        pops = traj.populations[idx]
        s = drive(times)
        columns = {"time": times, "P1": pops[:, 0], "P2": pops[:, 1],
                   "rabi": s.rabi, "detuning": s.detuning}
        if a == 1.0:
            p1_ad, p2_ad = adiabatic_populations(times, args.params)
            columns.update(P1_ad=p1_ad, P2_ad=p2_ad)
        prov = provenance(args, a=a, window=[0.0, drive.t_end], stride=args.stride)
        stem = args.out / f"trajectory_a{_tag(a)}"
        if args.format == "json":
            write_json(stem.with_suffix(".json"), {
                "provenance": prov, **{k: np.asarray(v).tolist() for k, v in columns.items()}})
        else:
            write_csv(stem.with_suffix(".csv"), list(columns), zip(*columns.values()), prov)
        final = pops[-1]
        log.info("a=%s: final P2 = %.6f over [0, %g]", _tag(a), final[1], drive.t_end)
        print(f"a = {_tag(a)}: window [0, {drive.t_end:g}], final P1 = {final[0]:.6f}, "
              f"P2 = {final[1]:.6f}, max rabi = {np.max(s.rabi):.6g}")
    return 0


def _sweep_kinds(args):
    kinds = []
    if args.eps_range is not None or args.delta_range is None:
        kinds.append((RABI, args.eps_range or (-0.2, 0.2, 41)))
    if args.delta_range is not None or args.eps_range is None:
        kinds.append((DETUNING, args.delta_range or (-0.2, 0.2, 41)))
    return kinds


def cmd_sweep(args) -> int:
    status = 0
    for kind, (lo, hi, n) in _sweep_kinds(args):
        spec = SweepSpec(kind, error_grid(lo, hi, n), args.a, args.params, args.steps)
        try:
            result = sweep(spec, workers=args.workers)
        except SweepError as exc:
            print(f"{kind}: {exc}", file=sys.stderr)
            status = 1
            continue
        header = ["a", "error_kind", "error_value", "fidelity"]
        rows = [[a, kind, v, f] for a, v, f in result.rows]
        if kind == RABI:
            header.append("pi_pulse_fidelity")
            for row in rows:
                row.append(pi_pulse_fidelity(row[2]))
        prov = provenance(args, error_kind=kind, error_range=[lo, hi, n])
        stem = args.out / f"sweep_{kind.split('_')[0]}"
        if args.format == "json":
            write_json(stem.with_suffix(".json"),
                       {"provenance": prov, "columns": header, "rows": rows})
        else:
            write_csv(stem.with_suffix(".csv"), header, rows, prov)
        print(f"{kind}: {len(rows)} points, min F = {result.min_fidelity():.6f}, "
              f"spread over a = {result.spread_over_a():.2e}")
    return status


def cmd_work(args) -> int:
    report = compare_protocols(args.params, args.a, args.beta_thermal, args.steps, EQUALITY_TOL)
    prov = provenance(args, beta_thermal=list(args.beta_thermal), tolerance=EQUALITY_TOL)
    for row in report.rows:
        print(f"a = {_tag(row.a)}, beta = {row.beta_thermal:g}: <W> gap = {row.mean_gap:.3e}, "
              f"dW gap = {row.fluct_gap:.3e} [{'ok' if row.passed else 'FAIL'}]")

    if args.format == "csv":
        fields = ["a", "beta_thermal", "mean_ref", "mean_tr", "fluct_ref", "fluct_tr",
                  "mean_gap", "fluct_gap", "propagator_distance", "passed"]
        rows = [[row.to_dict()[k] for k in fields] for row in report.rows]
        write_csv(args.out / "work_report.csv", fields, rows, prov)
    else:
        write_json(args.out / "work_report.json", {"provenance": prov, **report.to_dict()})

    atoms = []
    ref = AEDrive(args.params)
    drives = [("reference", 1.0, ref)] + [("rescaled", a, RescaledDrive(args.params, a)) for a in args.a]
    for label, a, drive in drives:
        u = evolve(drive, TimeGrid.for_drive(drive, args.steps))
        h_i, h_f = endpoint_hamiltonians(drive)
        for beta in args.beta_thermal:
            dist = work_distribution(u, h_i, h_f, beta)
            for (n, m), w, p in dist.atoms():
                atoms.append([label, a, beta, n, m, w, p])
    write_csv(args.out / "work_atoms.csv",
              ["protocol", "a", "beta_thermal", "n", "m", "work", "probability"], atoms, prov)
    print("equality theorems hold" if report.passed else "equality theorems FAILED")
    return 0 if report.passed else 1


HANDLERS = {"validate": cmd_validate, "simulate": cmd_simulate, "sweep": cmd_sweep, "work": cmd_work}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return HANDLERS[args.command](args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
