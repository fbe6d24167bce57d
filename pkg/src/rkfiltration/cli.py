"""Command-line front end for Redlich-Kwong thermodynamics and filtration fields.

Exit codes: 0 success, 2 input or domain error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import isentrope as isen
from .config import ConfigError, load_config
from .eos import DomainError, GasModel, GasParams
from .filtration import ConfigurationError, solve_field
from .numerics import NumericsError
from .phase import DEFAULT_T_MIN, trace_curve
from .writers import fmt, write_csv, write_slice_csv, write_vtk

EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(ValueError):
    pass


def _gas(args) -> GasModel:
    return GasModel(GasParams(n=args.n, a=args.a, b=args.b, R=args.R))


def _out(args):
    return sys.stdout if args.out in (None, "-") else args.out


def cmd_state(args) -> int:
    gas = _gas(args)
    s = gas.state_physical(args.v, args.T) if args.physical else gas.state(args.v, args.T)
    for name in s._fields:
        print(f"{name} = {fmt(getattr(s, name))}")
    return 0


def cmd_spinodal(args) -> int:
    gas = _gas(args)
    if not 1.0 < args.vmin < args.vmax:
        raise InputError("need 1 < vmin < vmax")
    v = np.geomspace(args.vmin - 1.0, args.vmax - 1.0, args.points) + 1.0
    # v = 2 is included whenever it lies in range, so closed-form checks can hit it.
    if args.vmin <= 2.0 <= args.vmax:
        v = np.unique(np.append(v, 2.0))
    T = gas.spinodal_T(v)
    p = gas.pressure(v, T)
    write_csv(_out(args), ["v", "T", "p"], zip(v, T, p))
    return 0


def cmd_coexistence(args) -> int:
    gas = _gas(args)
    curve = trace_curve(gas, T_min=args.tmin, T_max=args.tmax, steps=args.steps)
    write_csv(_out(args), ["T", "p_sat", "v_liquid", "v_gas"], curve.points)
    return 0


def cmd_isentrope(args) -> int:
    gas = _gas(args)
    medium = isen.MediumParams(args.k, args.mu)
    iso = isen.build(args.sigma0, medium, v_max=args.vmax, knots=args.knots, gas=gas)
    write_csv(_out(args), ["v", "T", "p", "Q"], zip(iso.v_grid, iso.T_tab, iso.p_tab, iso.Q_tab))
    msg = f"sigma0 = {fmt(args.sigma0)}; invertible = {str(iso.invertible).lower()}"
    print(msg, file=sys.stderr if _out(args) is sys.stdout else sys.stdout)
    return 0


def cmd_hcurve(args) -> int:
    gas = _gas(args)
    v = np.geomspace(args.vmin, args.vmax, args.points)
    write_csv(_out(args), ["v", "H"], isen.h_curve(v, gas))
    s = isen.sigma_star(gas)
    print(f"sigma_star = {fmt(s)}", file=sys.stderr if _out(args) is sys.stdout else sys.stdout)
    return 0


def cmd_filtration(args) -> int:
    cfg = load_config(args.config)
    gas = GasModel(cfg.gas)
    iso = isen.build(cfg.sigma0, cfg.medium, v_max=cfg.v_max, knots=cfg.knots, gas=gas)
    if not iso.invertible and cfg.branch != "continuity":
        raise InputError(
            f"sigma0 = {cfg.sigma0} lies below the invertibility threshold sigma* ~ -0.5: "
            "Q(v) is not monotone and the field is multivalued; raise sigma0 or set "
            "flow.branch = \"continuity\""
        )
    field = solve_field(
        cfg.source_system(),
        cfg.domain,
        iso,
        mode=cfg.mode,
        r_excl=cfg.exclusion_radius,
        branch=cfg.branch,
        harmonic_tol=cfg.harmonic_tol,
    )
    outdir = Path(args.out or cfg.output.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    if cfg.output.vtk:
        write_vtk(outdir / "field.vtk", field, title=f"rkfiltration {cfg.name}")
    if cfg.output.csv_slice:
        write_slice_csv(outdir / "slice.csv", field, cfg.output.slice_axis, cfg.output.slice_value)
    summary = f"scenario: {cfg.name}\nmode: {cfg.mode.value}\nsources: {len(cfg.sources)}\n" + field.summary()
    (outdir / "summary.txt").write_text(summary + "\n")
    print(summary)
    return 0


def _positive_int(text):
    n = int(text)
    if n < 2:
        raise argparse.ArgumentTypeError("must be >= 2")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rkfiltration", description=__doc__.splitlines()[0])
    gas = argparse.ArgumentParser(add_help=False)
    gas.add_argument("--n", type=float, default=3.0, help="degrees of freedom")
    gas.add_argument("--a", type=float, default=1.0, help="attraction constant (physical)")
    gas.add_argument("--b", type=float, default=1.0, help="covolume (physical)")
    gas.add_argument("--R", type=float, default=1.0, help="gas constant (physical)")
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", "-o", default=None, help="output CSV path (default stdout)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", parents=[gas], help="state point at reduced (v, T)")
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--physical", action="store_true", help="print values in physical units")
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("spinodal", parents=[gas, out], help="spinodal temperature vs volume")
    p.add_argument("--vmin", type=float, default=1.01)
    p.add_argument("--vmax", type=float, default=100.0)
    p.add_argument("--points", type=_positive_int, default=200)
    p.set_defaults(func=cmd_spinodal)

    p = sub.add_parser("coexistence", parents=[gas, out], help="binodal T, p_sat, v_liquid, v_gas")
    p.add_argument("--tmin", type=float, default=DEFAULT_T_MIN)
    p.add_argument("--tmax", type=float, default=None, help="default: critical temperature")
    p.add_argument("--steps", type=_positive_int, default=200)
    p.set_defaults(func=cmd_coexistence)

    p = sub.add_parser("isentrope", parents=[gas, out], help="tabulated v, T, p, Q at fixed entropy")
    p.add_argument("--sigma0", type=float, required=True)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--vmax", type=float, default=isen.DEFAULT_V_MAX)
    p.add_argument("--knots", type=_positive_int, default=isen.DEFAULT_KNOTS)
    p.set_defaults(func=cmd_isentrope)

    p = sub.add_parser("hcurve", parents=[gas, out], help="H(v) and the invertibility threshold")
    p.add_argument("--vmin", type=float, default=1.05)
    p.add_argument("--vmax", type=float, default=1e5)
    p.add_argument("--points", type=_positive_int, default=100)
    p.set_defaults(func=cmd_hcurve)

    p = sub.add_parser("filtration", help="3-D phase field for a scenario file")
    p.add_argument("config", help="scenario TOML path or bundled name (four_sources, five_sources, one_source)")
    p.add_argument("--out", "-o", default=None, help="output directory (default from config)")
    p.set_defaults(func=cmd_filtration)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ConfigError, ConfigurationError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
