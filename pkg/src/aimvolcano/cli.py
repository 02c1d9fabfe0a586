"""Command-line front end.

    aimvolcano solve  "coshsech(a=3,b=1)" --k 12
    aimvolcano sweep  "coshsech(a=20,b=0)" --param b --from 0 --to 10 --steps 21
    aimvolcano split  --a 1 --b 1
    aimvolcano oracle "modified(a=1,b=1,c=0.5)"
    aimvolcano units  --de 81.51 --x0 10

JSON goes to stdout unless ``--csv``/``--tsv`` is given.  Exit codes: 0 ok,
2 usage, 3 solver failure, 4 oracle not applicable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .aim import SolverError
from .fd_oracle import FdGrid, OracleInapplicableError, cross_validate
from .potentials import PotentialSpec, SpecSyntaxError
from .series import SeriesError
from .spectrum import (DEFAULT_PAIR_THRESHOLD, default_jobs, solve_spectrum,
                       splitting_curve, sweep)
from .units import ELECTRON_MASS, UnitContext, classify_band, transition_wavelength

SCHEMA_VERSION = 1

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_ORACLE = 0, 2, 3, 4

log = logging.getLogger("aimvolcano")

SWEEP_COLUMNS = ["param", "value", "spec", "status", "n_bound", "bound_states", "pair_gaps",
                 "e_above", "e_inside", "wavelength_um", "band"]
STATE_COLUMNS = ["spec", "energy", "kind", "converged", "pair"]
SPLIT_COLUMNS = ["c", "delta_e", "e_low", "e_high", "note"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output


def manifest(args: argparse.Namespace, config: dict, spec: Optional[str]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "argv": list(args.argv),
        "config": config,
        "spec": spec,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "output": str(args.output) if args.output else "-",
    }


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt_cell(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(args: argparse.Namespace, payload: dict, rows: list[dict], columns: list[str]) -> None:
    """Write JSON (payload) or a delimited table (rows) with the manifest attached."""
    fmt = "csv" if args.csv else "tsv" if args.tsv else "json"
    buf = io.StringIO()
    if fmt == "json":
        json.dump(payload, buf, indent=2, default=_json_default)
        buf.write("\n")
    else:
        buf.write("# manifest: " + json.dumps(payload["manifest"], default=_json_default) + "\n")
        w = csv.writer(buf, delimiter="," if fmt == "csv" else "\t", lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt_cell(r.get(c)) for c in columns])
    text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialize {type(o).__name__}")


# ---------------------------------------------------------------------------
# argument handling


def _spec_from(args) -> PotentialSpec:
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        family = cfg.pop("family", None) or cfg.pop("potential", None)
        if family is None:
            raise UsageError("config file needs a 'family' key")
        keys = ",".join(f"{k}={cfg[k]}" for k in ("a", "b", "c") if k in cfg)
        text = f"{family}({keys})"
    elif args.spec:
        text = args.spec
    else:
        raise UsageError("a potential spec (or --config) is required")
    try:
        return PotentialSpec.parse(text)
    except SpecSyntaxError as exc:
        raise UsageError(str(exc)) from None


def _solver_kwargs(args) -> dict:
    if args.k < 2:
        raise UsageError("--k must be >= 2")
    kw = {
        "k_max": args.k,
        "tol_converge": args.tol_converge,
        "tol_imag": args.tol_imag,
        "precision_mode": args.precision,
        "extended_dps": args.dps,
    }
    if args.jet_order is not None:
        kw["jet_order"] = args.jet_order
    if args.window is not None:
        kw["energy_window"] = tuple(args.window)
    return kw


def _add_solver_flags(p: argparse.ArgumentParser, k_default: int = 12) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--k", type=int, default=k_default, help="AIM iterations (>= 2)")
    g.add_argument("--u0", default="valley",
                   help="expansion point in u = sinh x: 'valley' (0), 'max' or a number")
    g.add_argument("--jet-order", type=int, default=None)
    g.add_argument("--tol-converge", type=float, default=1e-6)
    g.add_argument("--tol-imag", type=float, default=1e-4)
    g.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"), default=None)
    g.add_argument("--precision", choices=["double", "extended"], default="double")
    g.add_argument("--dps", type=int, default=60, help="decimal digits in extended mode")
    g.add_argument("--pair-threshold", type=float, default=DEFAULT_PAIR_THRESHOLD)


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--csv", action="store_true")
    g.add_argument("--tsv", action="store_true")
    p.add_argument("-o", "--output", type=Path, default=None)


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    spec = _spec_from(args)
    kw = _solver_kwargs(args)
    report = solve_spectrum(spec, u0=args.u0, threshold=args.pair_threshold, **kw)
    payload = {"manifest": manifest(args, report.config, str(spec)), **report.to_dict()}
    emit(args, payload, report.state_rows(), STATE_COLUMNS)
    if not report.bound_states and not report.below_min_states:
        for d in report.diagnostics:
            log.error(d)
        return EXIT_SOLVER
    return EXIT_OK


def _grid_values(args) -> list[float]:
    if args.values:
        return [float(v) for v in args.values.split(",") if v.strip()]
    if args.start is None or args.stop is None:
        raise UsageError("give --from/--to/--steps or --values")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    return [float(v) for v in np.linspace(args.start, args.stop, args.steps)]


def cmd_sweep(args) -> int:
    spec = _spec_from(args)
    kw = _solver_kwargs(args)
    values = _grid_values(args)
    units = UnitContext(args.x0, args.mass) if args.wavelength else None
    try:
        rows = sweep(spec, args.param, values, u0=args.u0, threshold=args.pair_threshold,
                     units=units, jobs=args.jobs, **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    config = {**kw, "u0": args.u0, "param": args.param, "values": values,
              "pair_threshold": args.pair_threshold,
              "units": units.to_dict() if units else None}
    payload = {"manifest": manifest(args, config, str(spec)),
               "rows": [r.to_dict() for r in rows]}
    flat = [{**r.to_dict(), "n_bound": len(r.bound_states)} for r in rows]
    emit(args, payload, flat, SWEEP_COLUMNS)
    return EXIT_OK if any(r.status == "ok" for r in rows) else EXIT_SOLVER


def _c_grid(args) -> list[float]:
    if args.c_grid is not None:
        vals = [float(v) for v in args.c_grid.split(",") if v.strip()]
    else:
        vals = [0.0] + [float(v) for v in np.geomspace(1e-4, 0.5, args.c_num)]
    if not vals:
        raise UsageError("empty c grid")
    if any(v < 0 for v in vals):
        raise UsageError("c values must be >= 0")
    return vals


def cmd_split(args) -> int:
    kw = _solver_kwargs(args)
    k_max = kw.pop("k_max")
    cs = _c_grid(args)
    rows = splitting_curve(args.a, args.b, cs, target=args.target, u0=args.u0,
                           threshold=args.pair_threshold, k_max=k_max, **kw)
    config = {**kw, "k_max": k_max, "a": args.a, "b": args.b, "c_values": cs,
              "target": args.target, "u0": args.u0}
    payload = {"manifest": manifest(args, config, f"modified(a={args.a},b={args.b},c=*)"),
               "rows": [r.to_dict() for r in rows]}
    emit(args, payload, [r.to_dict() for r in rows], SPLIT_COLUMNS)
    return EXIT_OK if any(r.delta_e is not None for r in rows) else EXIT_SOLVER


def cmd_oracle(args) -> int:
    spec = _spec_from(args)
    kw = _solver_kwargs(args)
    try:
        grid = FdGrid(args.L, args.N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        report = cross_validate(spec, grid, m=args.m, stability_tol=args.stability_tol,
                                u0=args.u0, threshold=args.pair_threshold, **kw)
    except OracleInapplicableError as exc:
        log.error("oracle not applicable: %s", exc)
        return EXIT_ORACLE
    if report.mode == "advisory":
        print("*** ADVISORY MODE: potential unbounded below; FD comparison is indicative only ***",
              file=sys.stderr)
    print(report.table(), file=sys.stderr)
    config = {**kw, "u0": args.u0, "L": args.L, "N": args.N, "m": args.m,
              "stability_tol": args.stability_tol}
    payload = {"manifest": manifest(args, config, str(spec)), **report.to_dict()}
    emit(args, payload, [r.to_dict() for r in report.rows],
         ["aim", "fd", "abs_dev", "rel_dev", "wall_shift", "grid_shift", "trusted"])
    return EXIT_OK


def cmd_units(args) -> int:
    ctx = UnitContext(args.x0, args.mass)
    try:
        lam = transition_wavelength(args.de, ctx)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    band = classify_band(lam)
    payload = {"manifest": manifest(args, ctx.to_dict(), None), "delta_e": args.de,
               "delta_e_ev": ctx.to_ev(args.de), "wavelength_um": lam, "band": band,
               "units": ctx.to_dict()}
    emit(args, payload, [{"delta_e": args.de, "wavelength_um": lam, "band": band}],
         ["delta_e", "wavelength_um", "band"])
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aimvolcano", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="spectrum at one parameter point")
    s.add_argument("spec", nargs="?", help="e.g. 'coshsech(a=3,b=1)'")
    s.add_argument("--config", help="JSON file with family/a/b/c keys")
    _add_solver_flags(s)
    _add_output_flags(s)
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="spectra over a parameter range")
    w.add_argument("spec", nargs="?")
    w.add_argument("--config")
    w.add_argument("--param", choices=["a", "b", "c"], required=True)
    w.add_argument("--from", dest="start", type=float)
    w.add_argument("--to", dest="stop", type=float)
    w.add_argument("--steps", type=int, default=11)
    w.add_argument("--values", help="comma-separated values instead of a range")
    w.add_argument("--wavelength", action="store_true",
                   help="add the above-barrier/in-well transition wavelength")
    w.add_argument("--x0", type=float, default=10.0, help="length scale in Angstrom")
    w.add_argument("--mass", type=float, default=ELECTRON_MASS, help="particle mass in kg")
    w.add_argument("--jobs", type=int, default=default_jobs())
    _add_solver_flags(w)
    _add_output_flags(w)
    w.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("split", help="pair splitting versus c for the damped potential")
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--c-grid", help="comma-separated c values (default: 0 plus logspace 1e-4..0.5)")
    sp.add_argument("--c-num", type=int, default=20)
    sp.add_argument("--target", type=float, default=-0.25,
                    help="energy near which the pair is picked up")
    _add_solver_flags(sp)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_split)

    o = sub.add_parser("oracle", help="compare against finite differences")
    o.add_argument("spec", nargs="?")
    o.add_argument("--config")
    o.add_argument("--L", type=float, default=12.0, help="box half-width")
    o.add_argument("--N", type=int, default=4000, help="interior grid points")
    o.add_argument("--m", type=int, default=12, help="FD eigenvalues to compute")
    o.add_argument("--stability-tol", type=float, default=1e-4)
    _add_solver_flags(o)
    _add_output_flags(o)
    o.set_defaults(func=cmd_oracle)

    u = sub.add_parser("units", help="energy difference to wavelength")
    u.add_argument("--de", type=float, required=True, help="dimensionless energy difference")
    u.add_argument("--x0", type=float, default=10.0)
    u.add_argument("--mass", type=float, default=ELECTRON_MASS)
    _add_output_flags(u)
    u.set_defaults(func=cmd_units)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (SolverError, SeriesError) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except OracleInapplicableError as exc:
        log.error("oracle not applicable: %s", exc)
        return EXIT_ORACLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
