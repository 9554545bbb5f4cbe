"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numeric failure, 4 I/O failure.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import DEFAULT_DT, XState, analytic_density, analytic_xstate, evolve
from .errors import NumericFailure
from .qcorrelations import (
    concurrence_analytic,
    concurrence_numeric,
    concurrence_xstate,
    discord,
    discord_single_variable,
)
from .spinmodel import OMEGA0_DEFAULT, SimParams, hadamard_transform
from .sweeps import (
    SweepSpec,
    critical_temperature,
    quantity_function,
    run_sweep,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

FIGURE_RATES = (0.0, 0.1, 0.5, 1.0, 2.0)
FIGURE_BETA = 1.5
FIGURE_T_MAX = 8.0
FIGURE_TIME_POINTS = 801
FIGURE_T_RANGE_MK = (5.0, 100.0)
FIGURE_TEMP_POINTS = 96


class UsageError(ValueError):
    pass


def fmt(x):
    """Shortest round-trip float text (at most 17 significant digits)."""
    return repr(float(x))


def fmt17(x):
    return format(float(x), ".17g")


def fmt17c(z):
    z = complex(z)
    return f"{format(z.real, '.17g')}{format(z.imag, '+.17g')}j"


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _check_writable_parent(path):
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise OSError(f"output directory {parent} does not exist")
    if not os.access(parent, os.W_OK):
        raise OSError(f"output directory {parent} is not writable")


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- evolve / point evaluations --------------------------------------------


def _xstate_of(rho, method):
    x = hadamard_transform(rho)
    return XState.from_matrix(x, tol=1e-12 if method == "analytic" else 1e-8)


def _state_rows(rho, x):
    rows = [(f"rho{i + 1}{j + 1}", rho[i, j]) for i in range(4) for j in range(4)]
    rows += [("a", x.a), ("b", x.b), ("c", x.c), ("d", x.d), ("alpha", x.alpha)]
    return rows


def cmd_evolve(args):
    p = SimParams(args.beta, args.g, args.t)
    if args.output:
        _check_writable_parent(args.output)
    rho = evolve(p, args.method, args.dt)
    x = _xstate_of(rho, args.method)
    rows = _state_rows(rho, x)
    lines = [f"# rho(t) method={args.method} beta={fmt(p.beta)} g={fmt(p.g)} t={fmt(p.t)}"]
    for i in range(4):
        lines.append("  ".join(fmt17c(rho[i, j]) for j in range(4)))
    lines.append(
        f"# X state: a={fmt17(x.a)} b={fmt17(x.b)} c={fmt17(x.c)} d={fmt17(x.d)} "
        f"alpha={fmt17c(x.alpha)}"
    )
    if args.method == "numeric":
        diff = float(np.max(np.abs(rho - analytic_density(p))))
        lines.append(f"# max |numeric - analytic| = {diff:.3e}")
    print("\n".join(lines))
    if args.output:
        if args.format == "json":
            payload = {
                "params": {"beta": p.beta, "g": p.g, "t": p.t, "method": args.method, "dt": args.dt},
                "rho": {"real": rho.real.tolist(), "imag": rho.imag.tolist()},
                "xstate": {"a": x.a, "b": x.b, "c": x.c, "d": x.d,
                           "alpha": [x.alpha.real, x.alpha.imag]},
            }
            _write_text(args.output, json.dumps(payload, indent=2) + "\n")
        else:
            text = "quantity,real,imag\n" + "".join(
                f"{name},{fmt(complex(v).real)},{fmt(complex(v).imag)}\n" for name, v in rows
            )
            _write_text(args.output, text)
    return EXIT_OK


def cmd_concurrence(args):
    p = SimParams(args.beta, args.g, args.t)
    if args.method == "analytic":
        res = concurrence_analytic(p)
        value, lambdas = res.value, res.lambdas
    elif args.method == "numeric":
        res = concurrence_numeric(hadamard_transform(evolve(p, "analytic")))
        value, lambdas = res.value, res.lambdas
    else:
        value, lambdas = concurrence_xstate(analytic_xstate(p)), None
    print(f"concurrence = {fmt17(value)}")
    if lambdas is not None:
        print("lambdas = " + ", ".join(fmt17(v) for v in lambdas))
    return EXIT_OK


def cmd_discord(args):
    p = SimParams(args.beta, args.g, args.t)
    if args.method == "single":
        res = discord_single_variable(analytic_xstate(p))
    else:
        res = discord(hadamard_transform(analytic_density(p)))
    print(f"discord = {fmt17(res.value)} bits")
    print(f"classical correlation = {fmt17(res.classical_correlation)} bits")
    print(f"mutual information = {fmt17(res.mutual_information)} bits")
    print(f"optimal theta = {fmt17(res.optimal_theta)}, optimal phi = {fmt17(res.optimal_phi)}")
    return EXIT_OK


# -- sweeps ----------------------------------------------------------------


def sweep_csv(result, with_t_star, scale=1.0):
    """CSV text for a sweep; ``scale`` multiplies the abscissa column."""
    header = "abscissa,value,t_star\n" if with_t_star else "abscissa,value\n"
    rows = []
    for abscissa, value, t_star in result.records:
        cells = [fmt(abscissa * scale), fmt(value)]
        if with_t_star:
            cells.append(fmt(t_star))
        rows.append(",".join(cells) + "\n")
    return header + "".join(rows)


def sweep_json(result, with_t_star, scale=1.0):
    records = []
    for abscissa, value, t_star in result.records:
        rec = {"abscissa": abscissa * scale, "value": value}
        if with_t_star:
            rec["t_star"] = t_star
        records.append(rec)
    return json.dumps(records, indent=1) + "\n"


def meta_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def fanout_path(path, g, multiple):
    path = Path(path)
    if not multiple:
        return path
    return path.with_name(f"{path.stem}_g{g:g}{path.suffix}")


def _sweep_specs(args):
    if args.abscissa == "time":
        start = 0.0 if args.start is None else args.start
        stop = args.t_max if args.t_max is not None else args.stop
        if stop is None:
            raise UsageError("time sweeps need --t-max (or --stop)")
        points = 801 if args.points is None else args.points
        scale = 1.0
    else:
        if args.start is None or args.stop is None:
            raise UsageError("temperature sweeps need --start and --stop")
        scale = 1e-3 if args.millikelvin else 1.0
        start, stop = args.start * scale, args.stop * scale
        points = 96 if args.points is None else args.points
    specs = [
        SweepSpec(
            quantity=args.quantity,
            abscissa=args.abscissa,
            g=g,
            start=start,
            stop=stop,
            points=points,
            beta=args.beta,
            omega0=args.omega0,
        )
        for g in args.g
    ]
    return specs, scale


def cmd_sweep(args):
    try:
        specs, scale = _sweep_specs(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    output = args.output or f"sweep_{args.quantity}_{args.abscissa}.{args.format}"
    targets = [fanout_path(output, s.g, len(specs) > 1) for s in specs]
    for target in targets:
        _check_writable_parent(target)

    with_t_star = args.abscissa == "temperature"
    unit = "dimensionless" if args.abscissa == "time" else ("mK" if args.millikelvin else "K")
    payloads = []
    for spec, target in zip(specs, targets):
        result = run_sweep(spec)
        emit = sweep_json if args.format == "json" else sweep_csv
        meta = dict(result.meta)
        meta["abscissa_unit"] = unit
        meta["format"] = args.format
        payloads.append((target, emit(result, with_t_star, 1.0 / scale), meta))
    for target, text, meta in payloads:
        _write_text(target, text)
        _write_text(meta_path(target), json.dumps(meta, indent=2, sort_keys=True) + "\n")
        print(f"wrote {target}")
    return EXIT_OK


def cmd_critical_temp(args):
    scale = 1e-3 if args.millikelvin else 1.0
    lo = 5e-3 if args.start is None else args.start * scale
    hi = 100e-3 if args.stop is None else args.stop * scale
    for g in args.g:
        T = critical_temperature(g, args.omega0, (lo, hi))
        print(f"g={fmt(g)}: T_c = {T:.8g} K ({T * 1e3:.4f} mK)")
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_all

    results = run_all(quick=args.quick, perturb=args.perturb)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} checks FAILED: " + ", ".join(r.name for r in failed))
        return EXIT_VERIFY
    print(f"all {len(results)} checks passed")
    return EXIT_OK


# -- figures ---------------------------------------------------------------


def _column_name(prefix, g):
    return f"{prefix}_g{g:g}"


def figure_tables():
    """Data for the four figure presets as ``{name: (header, rows, meta)}``."""
    ts = np.linspace(0.0, FIGURE_T_MAX, FIGURE_TIME_POINTS)
    tables = {}
    for name, quantity in (("fig1", "concurrence"), ("fig3", "discord")):
        f = quantity_function(quantity)
        cols = [f(FIGURE_BETA, g, ts) for g in FIGURE_RATES]
        header = ["t"] + [_column_name(quantity, g) for g in FIGURE_RATES]
        rows = [[t] + [c[i] for c in cols] for i, t in enumerate(ts)]
        meta = {"quantity": quantity, "abscissa": "time", "beta": FIGURE_BETA, "g": list(FIGURE_RATES)}
        tables[name] = (header, rows, meta)

    lo, hi = FIGURE_T_RANGE_MK
    for name, quantity in (("fig2", "concurrence"), ("fig4", "discord")):
        values, stars = [], []
        temps = None
        for g in FIGURE_RATES:
            spec = SweepSpec(quantity, "temperature", g, lo * 1e-3, hi * 1e-3, FIGURE_TEMP_POINTS,
                             omega0=OMEGA0_DEFAULT)
            res = run_sweep(spec)
            temps = res.abscissas * 1e3
            values.append(res.values)
            stars.append(np.array([r[2] for r in res.records]))
        header = (["T_mK"] + [_column_name(f"max_{quantity}", g) for g in FIGURE_RATES]
                  + [_column_name("t_star", g) for g in FIGURE_RATES])
        rows = [[T] + [v[i] for v in values] + [s[i] for s in stars] for i, T in enumerate(temps)]
        meta = {"quantity": quantity, "abscissa": "temperature", "unit": "mK",
                "omega0": OMEGA0_DEFAULT, "g": list(FIGURE_RATES)}
        tables[name] = (header, rows, meta)
    return tables


_TITLES = {
    "fig1": ("Concurrence vs time, beta = 1.5", "t (units of 1/D)", "concurrence"),
    "fig2": ("Maximum concurrence over time vs temperature", "T (mK)", "max concurrence"),
    "fig3": ("Quantum discord vs time, beta = 1.5", "t (units of 1/D)", "discord (bits)"),
    "fig4": ("Maximum discord over time vs temperature", "T (mK)", "max discord (bits)"),
}


def gnuplot_script(name, n_series):
    title, xlabel, ylabel = _TITLES[name]
    return (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        f"set title '{title}'\n"
        f"set xlabel '{xlabel}'\n"
        f"set ylabel '{ylabel}'\n"
        "set terminal pngcairo size 800,600\n"
        f"set output '{name}.png'\n"
        f"plot for [i=2:{n_series + 1}] '{name}.csv' using 1:i with lines\n"
    )


def cmd_figures(args):
    outdir = Path(args.output or ".")
    if not outdir.is_dir():
        raise OSError(f"output directory {outdir} does not exist")
    _check_writable_parent(outdir / "fig1.csv")
    tables = figure_tables()
    for name, (header, rows, meta) in tables.items():
        text = ",".join(header) + "\n" + "".join(",".join(fmt(v) for v in row) + "\n" for row in rows)
        _write_text(outdir / f"{name}.csv", text)
        _write_text(outdir / f"{name}.plt", gnuplot_script(name, len(FIGURE_RATES)))
        meta = dict(meta, code_version=__version__)
        _write_text(outdir / f"{name}.meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
        print(f"wrote {outdir / name}.csv")
    return EXIT_OK


# -- argument parsing ------------------------------------------------------


def _add_point_flags(p, methods, default):
    p.add_argument("--beta", type=float, required=True, help="dimensionless inverse temperature")
    p.add_argument("--g", type=float, required=True, help="dimensionless dephasing rate")
    p.add_argument("--t", type=float, required=True, help="dimensionless time")
    p.add_argument("--method", choices=methods, default=default)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dipolar-qcorr",
        description="Entanglement and quantum discord of a dipolar spin pair under dephasing.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="print rho(t) and its X-state parameters")
    _add_point_flags(p, ("analytic", "numeric"), "analytic")
    p.add_argument("--dt", type=float, default=DEFAULT_DT, help="RK4 step for --method numeric")
    p.add_argument("--output")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("concurrence", help="concurrence at one (beta, g, t)")
    _add_point_flags(p, ("analytic", "numeric", "xstate"), "analytic")
    p.set_defaults(func=cmd_concurrence)

    p = sub.add_parser("discord", help="quantum discord at one (beta, g, t)")
    _add_point_flags(p, ("single", "full"), "single")
    p.set_defaults(func=cmd_discord)

    p = sub.add_parser("sweep", help="quantity vs time, or max-over-time vs temperature")
    p.add_argument("--quantity", choices=("concurrence", "discord"), required=True)
    p.add_argument("--abscissa", choices=("time", "temperature"), required=True)
    p.add_argument("--beta", type=float, default=FIGURE_BETA, help="time sweeps only (default 1.5)")
    p.add_argument("--g", type=_float_list, default=[0.0], help="rate or comma-separated rates")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--millikelvin", action="store_true", help="--start/--stop and output in mK")
    p.add_argument("--omega0", type=float, default=OMEGA0_DEFAULT, help="Larmor frequency, rad/s")
    p.add_argument("--output")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("critical-temp", help="temperature above which entanglement never appears")
    p.add_argument("--g", type=_float_list, default=[0.0])
    p.add_argument("--omega0", type=float, default=OMEGA0_DEFAULT)
    p.add_argument("--start", type=float, help="bracket low end (default 5 mK)")
    p.add_argument("--stop", type=float, help="bracket high end (default 100 mK)")
    p.add_argument("--millikelvin", action="store_true")
    p.set_defaults(func=cmd_critical_temp)

    p = sub.add_parser("verify", help="run the cross-validation battery")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("figures", help="write fig1..fig4 CSV data and gnuplot scripts")
    p.add_argument("--output", help="existing output directory (default: current directory)")
    p.set_defaults(func=cmd_figures)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
