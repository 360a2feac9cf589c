"""Command-line interface: ``mllp {simulate,density,levy,moments,laplace,verify}``.

Tables are written as CSV (17 significant digits, so floats round-trip) or as
JSON arrays of row objects.  Exit status: 0 success, 1 failed check or (with
``--strict``) a series failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__, analytics, process, verify
from .errors import ConfigError, DomainError, IntegrationFailure, TermCapExceeded
from .process import ProcessParams, TemperedParams, TimeGrid
from .randvar import RandomSource

SEED_ENV = "MLLP_SEED"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# table I/O

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_table(header, rows, fh, fmt="csv"):
    if fmt == "json":
        objs = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in zip(header, row)}
                for row in rows]
        json.dump(objs, fh, indent=1)
        fh.write("\n")
        return
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def read_table(path):
    """Read a CSV written by this tool: ``(header, rows)`` with numeric cells as floats."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for rec in reader:
            row = []
            for cell in rec:
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(cell)
            rows.append(row)
    return header, rows


def _open_out(path):
    if path in (None, "-"):
        return io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", newline="", write_through=True)
    return open(path, "w", encoding="utf-8", newline="")


def _emit(args, header, rows, extra=None):
    fh = _open_out(args.out)
    try:
        write_table(header, rows, fh, args.format)
    finally:
        if args.out not in (None, "-"):
            fh.close()
        else:
            fh.detach()
    _write_manifest(args, extra)


def _write_manifest(args, extra=None):
    if args.out in (None, "-"):
        return
    flags = {k: v for k, v in vars(args).items() if k not in ("func", "seed_source")}
    manifest = {"version": __version__, "command": args.command, "flags": flags,
                "seed": getattr(args, "seed", None), "seed_source": getattr(args, "seed_source", None)}
    if extra:
        manifest.update(extra)
    with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# argument handling

def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _add_process_flags(p, tempered_switch=True):
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--mu", type=float, help="tempering parameter")
    if tempered_switch:
        p.add_argument("--tempered", action="store_true", help="use the tempered process (needs --mu)")


def _add_output_flags(p):
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_range_flags(p, name):
    p.add_argument(f"--{name}", type=_float_list, help="comma-separated points")
    p.add_argument(f"--{name}-min", type=float)
    p.add_argument(f"--{name}-max", type=float)
    p.add_argument("--n", type=_positive_int, default=100, help="number of range points")
    p.add_argument("--log", action="store_true", help="geometric instead of linear spacing")


def _points(args, name, positive=True):
    listed = getattr(args, name)
    lo, hi = getattr(args, f"{name}_min"), getattr(args, f"{name}_max")
    if listed is not None:
        if lo is not None or hi is not None:
            raise UsageError(f"--{name} conflicts with --{name}-min/--{name}-max")
        pts = np.asarray(listed, dtype=float)
    else:
        if lo is None or hi is None:
            raise UsageError(f"give --{name} or both --{name}-min and --{name}-max")
        if not hi >= lo:
            raise UsageError(f"--{name}-max must not be below --{name}-min")
        if args.log:
            if lo <= 0:
                raise UsageError(f"--log needs --{name}-min > 0")
            pts = np.geomspace(lo, hi, args.n)
        else:
            pts = np.linspace(lo, hi, args.n)
    if pts.size == 0 or not np.all(np.isfinite(pts)):
        raise UsageError(f"--{name}: need finite points")
    if positive and np.any(pts <= 0):
        raise UsageError(f"--{name}: points must be positive")
    if not positive and np.any(pts < 0):
        raise UsageError(f"--{name}: points must be nonnegative")
    return pts


def _params(args, tempered=None):
    base = ProcessParams(args.alpha, args.lam, args.beta)
    if tempered is None:
        tempered = getattr(args, "tempered", False)
    if tempered:
        if args.mu is None:
            raise UsageError("--tempered needs --mu")
        return TemperedParams(base, args.mu)
    if args.mu is not None:
        raise UsageError("--mu needs --tempered")
    return base


def _check_t(t):
    if not (t > 0 and math.isfinite(t)):
        raise UsageError(f"--t must be positive, got {t}")


def _resolve_seed(args):
    if args.seed is not None:
        args.seed_source = "flag"
    elif os.environ.get(SEED_ENV):
        try:
            args.seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} is not an integer: {os.environ[SEED_ENV]!r}") from None
        args.seed_source = f"env:{SEED_ENV}"
    else:
        args.seed = 0
        args.seed_source = "default"
    if not 0 <= args.seed < 2 ** 64:
        raise UsageError("seed must be an unsigned 64-bit integer")


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(args):
    _resolve_seed(args)
    tempered = args.mu is not None
    params = _params(args, tempered)
    if not 0 < params.alpha < 1:
        raise UsageError("simulation needs --alpha strictly between 0 and 1")
    grid = TimeGrid(args.horizon, args.steps)
    src = RandomSource(args.seed)
    sim = process.simulate_tempered_mllp_path if tempered else process.simulate_mllp_path
    path = sim(src, params, grid, n_paths=args.paths)
    times = grid.times
    if args.paths == 1:
        header = ["t", "value"]
        rows = [(float(t), float(v)) for t, v in zip(times, path.values[0])]
    else:
        header = ["path", "t", "value"]
        rows = [(i, float(t), float(v)) for i in range(args.paths) for t, v in zip(times, path.values[i])]
    _emit(args, header, rows, {"grid": {"horizon": grid.horizon, "n_steps": grid.n_steps},
                               "process": "tempered" if tempered else "mllp"})
    return EXIT_OK


def _series_rows(xs, fn):
    rows, failures = [], 0
    for x in xs:
        try:
            v = fn(float(x))
        except (TermCapExceeded, IntegrationFailure):
            v = math.nan
            failures += 1
        rows.append((float(x), float(v)))
    return rows, failures


def _finish_series(args, header, rows, failures):
    _emit(args, header, rows)
    if failures:
        print(f"warning: {failures} point(s) beyond series range written as nan", file=sys.stderr)
        if args.strict:
            return EXIT_FAIL
    return EXIT_OK


def cmd_density(args):
    params = _params(args)
    _check_t(args.t)
    xs = _points(args, "x")
    if isinstance(params, TemperedParams):
        def fn(x):
            return analytics.tempered_density(x, args.t, params).value
    else:
        def fn(x):
            return analytics.mllp_density(x, args.t, params).value
    rows, failures = _series_rows(xs, fn)
    return _finish_series(args, ["x", "f"], rows, failures)


def cmd_levy(args):
    params = _params(args)
    xs = _points(args, "x")
    if isinstance(params, TemperedParams):
        def fn(x):
            return analytics.tempered_levy_density(x, params)
    else:
        def fn(x):
            return analytics.mllp_levy_density(x, params)
    rows, failures = _series_rows(xs, fn)
    return _finish_series(args, ["x", "nu"], rows, failures)


def cmd_moments(args):
    params = _params(args)
    _check_t(args.t)
    if isinstance(params, TemperedParams):
        if args.q is not None:
            raise UsageError("--q does not apply with --tempered (mean and variance are reported)")
        mean, var = analytics.tempered_moments(args.t, params)
        _emit(args, ["statistic", "value"], [("mean", mean), ("variance", var)])
        return EXIT_OK
    if args.q is None:
        raise UsageError("--q is required")
    rows = [(q, analytics.fractional_moment(q, args.t, params)) for q in args.q]
    _emit(args, ["q", "moment"], rows)
    return EXIT_OK


def cmd_laplace(args):
    params = _params(args)
    _check_t(args.t)
    us = _points(args, "u", positive=False)
    fn = analytics.tempered_laplace if isinstance(params, TemperedParams) else analytics.mllp_laplace
    vals = np.atleast_1d(fn(us, args.t, params))
    _emit(args, ["u", "lt"], list(zip(us.tolist(), vals.tolist())))
    return EXIT_OK


def cmd_verify(args):
    _resolve_seed(args)
    path = args.config or verify.default_config_path()
    cfg = verify.load_config(path)
    reports = verify.run_suite(args.seed, path)
    lines = "".join(r.to_json() + "\n" for r in reports)
    table = verify.summary_table(reports, cfg["level"])
    if args.out in (None, "-"):
        sys.stdout.write(lines)
        print(table, file=sys.stderr)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(lines)
        print(table)
        _write_manifest(args, {"config": os.path.abspath(path)})
    return EXIT_OK if verify.suite_ok(reports) else EXIT_FAIL


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="mllp", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample paths (CSV t,value or path,t,value)")
    _add_process_flags(p, tempered_switch=False)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--steps", type=_positive_int, default=1000)
    p.add_argument("--paths", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, help=f"default: ${SEED_ENV}, else 0")
    _add_output_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("density", help="marginal density (CSV x,f)")
    _add_process_flags(p)
    p.add_argument("--t", type=float, default=1.0)
    _add_range_flags(p, "x")
    p.add_argument("--strict", action="store_true", help="exit 1 if any point fails")
    _add_output_flags(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("levy", help="Levy density (CSV x,nu)")
    _add_process_flags(p)
    _add_range_flags(p, "x")
    p.add_argument("--strict", action="store_true", help="exit 1 if any point fails")
    _add_output_flags(p)
    p.set_defaults(func=cmd_levy)

    p = sub.add_parser("moments", help="fractional moments (CSV q,moment) or tempered mean/variance")
    _add_process_flags(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--q", type=_float_list, help="comma-separated orders in (0, alpha)")
    _add_output_flags(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("laplace", help="Laplace transform (CSV u,lt)")
    _add_process_flags(p)
    p.add_argument("--t", type=float, default=1.0)
    _add_range_flags(p, "u")
    _add_output_flags(p)
    p.set_defaults(func=cmd_laplace)

    p = sub.add_parser("verify", help="run the verification suite (JSON lines)")
    p.add_argument("--config", help="TOML suite config (default: the packaged suite)")
    p.add_argument("--seed", type=int, help=f"default: ${SEED_ENV}, else 0")
    p.add_argument("--out", help="JSON-lines report file (default: standard output)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError, ConfigError) as exc:
        print(f"mllp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"mllp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
