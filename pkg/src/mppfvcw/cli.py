"""Command-line driver: run, converge, compare, list."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction

from .core import SCHEMES, CellField, SchemeConfig, cell_average
from .harness import (CATALOG, format_table, get_case, initial_field, rows_to_csv,
                      run_case, run_convergence, write_field, write_gnuplot)

log = logging.getLogger("mppfvcw")

COMPARE_SCHEMES = ("fvcw", "weno-js", "weno-z", "fvc")


def number(text: str) -> float:
    """Float that also accepts fractions such as 1/12."""
    return float(Fraction(text.strip()))


def on_off(text: str) -> bool:
    t = text.strip().lower()
    if t in ("on", "true", "1", "yes"):
        return True
    if t in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def grid_list(text: str) -> tuple:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid list {text!r}") from None


def _common(p: argparse.ArgumentParser, grids=False):
    p.add_argument("--case", required=False, help="case id or exN prefix")
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--limiter", type=on_off, metavar="{on,off}")
    p.add_argument("--cfl", type=number)
    p.add_argument("--tfinal", type=number)
    p.add_argument("--dt-policy", dest="dt_policy", choices=("cfl", "accuracy"))
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="key=value file; command-line flags win")
    if grids:
        p.add_argument("--grids", type=grid_list, help="comma separated N values")
    else:
        p.add_argument("--nx", type=int)
        p.add_argument("--ny", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mppfvcw", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    ap.commands = {
        "run": sub.add_parser("run", help="advance one case and dump the field"),
        "converge": sub.add_parser("converge", help="error/order table as CSV"),
        "compare": sub.add_parser("compare", help="all schemes from one initial field"),
        "list": sub.add_parser("list", help="show the case catalog"),
    }
    _common(ap.commands["run"])
    _common(ap.commands["converge"], grids=True)
    _common(ap.commands["compare"])
    return ap


def read_config(path) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for k, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{k}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def merge_config(args, parser: argparse.ArgumentParser):
    """Fill unset arguments from --config, converting with each option's type."""
    if not getattr(args, "config", None):
        return args
    actions = {a.dest: a for a in parser.commands[args.command]._actions}
    try:
        entries = read_config(args.config)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))
    for key, raw in entries.items():
        if key not in actions or key in ("config", "help"):
            parser.error(f"unknown config key {key!r}")
        if getattr(args, key) is not None:
            continue
        act = actions[key]
        value = act.type(raw) if act.type else raw
        if act.choices and value not in act.choices:
            parser.error(f"config {key}={raw!r} not in {list(act.choices)}")
        setattr(args, key, value)
    return args


def scheme_config(args, case) -> SchemeConfig:
    return SchemeConfig(
        scheme=args.scheme or "fvcw",
        limiter=True if args.limiter is None else args.limiter,
        cfl=args.cfl,
        dt_policy=args.dt_policy or case.dt_policy)


def _outdir(args):
    out = args.out or "out"
    os.makedirs(out, exist_ok=True)
    return out


def _report(res, config):
    st = res.stats
    print(f"case {res.case_id}  scheme {config.scheme}  limiter {'on' if config.limiter else 'off'}"
          f"  N {res.n}  t {res.t_final:g}  steps {st.steps}")
    print(f"min {st.min!r}  max {st.max!r}  limited cells {st.limited_cells}")
    if res.errors is not None:
        print(f"L1 {res.errors[0]:.6e}  Linf {res.errors[1]:.6e}")
    for w in st.warnings:
        print(f"warning: {w}")


def cmd_list(args):
    for c in CATALOG:
        print(f"{c.case_id:24s} {c.dim}D  grids {','.join(map(str, c.grids)):24s} {c.description}")
    return 0


def cmd_run(args):
    case = get_case(args.case)
    config = scheme_config(args, case)
    nx = args.nx or case.grids[-1]
    res = run_case(case, config, nx, args.ny, args.tfinal)
    _report(res, config)
    out = _outdir(args)
    stem = f"{case.short}_{config.scheme}_{'lim' if config.limiter else 'nolim'}_{nx}"
    path = os.path.join(out, stem + ".dat")
    write_field(path, res.final)
    write_gnuplot(os.path.join(out, stem + ".gp"), [path], case.dim, f"{case.case_id} t={res.t_final:g}")
    print(f"wrote {path}")
    return 0


def cmd_converge(args):
    case = get_case(args.case)
    config = scheme_config(args, case)
    rows = run_convergence(case, config, args.grids, args.tfinal)
    text = rows_to_csv(rows)
    print(format_table(rows), file=sys.stderr)
    if args.out:
        path = os.path.join(_outdir(args), f"{case.short}_{config.scheme}_convergence.csv")
        with open(path, "w") as fh:
            fh.write(text)
        print(f"wrote {path}", file=sys.stderr)
    sys.stdout.write(text)
    return 0


def cmd_compare(args):
    case = get_case(args.case)
    nx = args.nx or case.grids[-1]
    field0 = initial_field(case, nx, args.ny)
    out = _outdir(args)
    paths = []
    for scheme in COMPARE_SCHEMES:
        args.scheme = scheme
        config = scheme_config(args, case)
        res = run_case(case, config, nx, args.ny, args.tfinal, initial=field0)
        _report(res, config)
        path = os.path.join(out, f"{case.short}_{scheme}_{nx}.dat")
        write_field(path, res.final)
        paths.append(path)
    if case.exact is not None and case.dim == 1:
        fine = case.grid(10 * nx)
        t = res.t_final
        exact = CellField(cell_average(lambda x: case.exact(t, x), fine), fine)
        path = os.path.join(out, f"{case.short}_exact_{10 * nx}.dat")
        write_field(path, exact)
        paths.append(path)
    write_gnuplot(os.path.join(out, f"{case.short}_compare.gp"), paths, case.dim, case.case_id)
    return 0


COMMANDS = {"run": cmd_run, "converge": cmd_converge, "compare": cmd_compare, "list": cmd_list}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args = merge_config(args, parser)
    if args.command != "list" and not args.case:
        parser.error("--case is required")
    try:
        return COMMANDS[args.command](args)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
