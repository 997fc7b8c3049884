"""Command-line front door.

Subcommands:
    analyze    analyze a user-supplied (f, g) pair
    construct  build f from (g, rho, z, K) and analyze the result
    verify     run a seeded campaign of generated pairs through all checks
    tables     print the encoded rule tables

Exit codes: 0 all checks passed, 1 expression parse error, 2 validation
error (a standing assumption failed), 3 at least one check failed,
64 usage/config error.  MONOTONE_RATIO_THREADS caps verify parallelism.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

from .construct import (GeneratorConfig, QuadratureError, StaircaseError,
                        StaircaseSpec, construct_f, make_staircase_rho,
                        random_pair)
from .expr import DomainFault, ExprFn, ParseError, parse
from .intervals import Interval
from .ratio import ValidationError, make_pair, sample_table
from .rules import RULE_ROWS, Tolerances, check_pair

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_CHECKS_FAILED = 3
EXIT_USAGE = 64


def _emit_json(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(pair, path: str) -> None:
    table = sample_table(pair, pair.grid_n)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "f", "g", "r", "rho", "rho_tilde"])
        for i, x in enumerate(table.xs):
            writer.writerow([repr(x), repr(table.f_values[i]), repr(table.g_values[i]),
                             repr(table.r[i]), repr(table.rho[i]),
                             repr(table.rho_tilde[i])])


def _window_from(args) -> Interval | None:
    lo, hi = args.window
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        print(f"error: window must be finite with lo < hi, got ({lo}, {hi})",
              file=sys.stderr)
        return None
    return Interval(lo, hi)


def _tolerances_from(args) -> Tolerances:
    return Tolerances(tol_zero=args.tol_zero)


def _analyze_pair(pair, args) -> int:
    try:
        report = check_pair(pair, _tolerances_from(args))
        if args.csv:
            _emit_csv(pair, args.csv)
    except DomainFault as err:
        # f left its domain inside the window; g alone was validated
        print(f"error: assumption violated: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    _emit_json(report.to_dict(), args.out)
    return EXIT_OK if report.all_ok else EXIT_CHECKS_FAILED


def cmd_analyze(args) -> int:
    window = _window_from(args)
    if window is None or args.grid_n < 64:
        if window is not None:
            print("error: --grid-n must be at least 64", file=sys.stderr)
        return EXIT_USAGE
    try:
        f = ExprFn(parse(args.f), label=args.f)
        g = ExprFn(parse(args.g), label=args.g)
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    try:
        pair = make_pair(f, g, window, args.grid_n)
    except (ValidationError, DomainFault) as err:
        print(f"error: assumption violated: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    return _analyze_pair(pair, args)


def cmd_construct(args) -> int:
    window = _window_from(args)
    if window is None or args.grid_n < 64:
        if window is not None:
            print("error: --grid-n must be at least 64", file=sys.stderr)
        return EXIT_USAGE
    if (args.staircase is None) == (args.rho is None):
        print("error: give exactly one of --staircase or --rho", file=sys.stderr)
        return EXIT_USAGE
    try:
        g = ExprFn(parse(args.g), label=args.g)
        if args.staircase:
            with open(args.staircase) as handle:
                spec = StaircaseSpec.from_json_dict(json.load(handle))
            rho = make_staircase_rho(spec)
        else:
            rho = ExprFn(parse(args.rho), label=args.rho)
    except (ParseError, StaircaseError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    k = args.K if args.K is not None else rho(args.z)[0]
    try:
        f = construct_f(g, rho, args.z, k, window, args.quad_tol)
        pair = make_pair(f, g, window, args.grid_n)
    except (ValidationError, DomainFault, QuadratureError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    return _analyze_pair(pair, args)


def _verify_case(case_seed: int, grid_n: int, tol_zero: float,
                 quad_tol: float) -> dict:
    config = GeneratorConfig(grid_n=grid_n, quad_tol=quad_tol)
    pair, _, _ = random_pair(case_seed, config)
    report = check_pair(pair, Tolerances(tol_zero=tol_zero))
    return {
        "seed": case_seed,
        "prop1": report.prop1_ok,
        "prop2": report.prop2_ok,
        "uniqueness": report.uniqueness_ok,
        "sign_identity": report.sign_identity_ok,
    }


def cmd_verify(args) -> int:
    if args.cases < 1:
        print("error: --cases must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    if args.grid_n < 64:
        print("error: --grid-n must be at least 64", file=sys.stderr)
        return EXIT_USAGE
    seeds = [args.seed + i for i in range(args.cases)]
    threads = int(os.environ.get("MONOTONE_RATIO_THREADS", "1") or "1")
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                _verify_case, seeds,
                [args.grid_n] * len(seeds), [args.tol_zero] * len(seeds),
                [args.quad_tol] * len(seeds)))
    else:
        results = [_verify_case(s, args.grid_n, args.tol_zero, args.quad_tol)
                   for s in seeds]
    # results arrive in seed order either way, so output is deterministic
    checks = ("prop1", "prop2", "uniqueness", "sign_identity")
    summary = {
        "seed": args.seed,
        "cases": args.cases,
        "grid_n": args.grid_n,
        "tol_zero": args.tol_zero,
        "quad_tol": args.quad_tol,
        "checks": {
            name: {
                "pass": sum(1 for r in results if r[name]),
                "fail": sum(1 for r in results if not r[name]),
            }
            for name in checks
        },
        "failing_seeds": sorted({r["seed"] for r in results
                                 if not all(r[name] for name in checks)}),
    }
    _emit_json(summary, args.out)
    return EXIT_OK if not summary["failing_seeds"] else EXIT_CHECKS_FAILED


def _tables_payload() -> dict:
    return {
        "table1": [{"rho": row.rho_dir.value, "sign_gg": row.sign_gg,
                    "r": row.r_family.value} for row in RULE_ROWS],
        "table2": [{"rho": row.rho_dir.value, "sign_gg": row.sign_gg,
                    "r": row.r_family.value, "switch": "flat [c, d]"}
                   for row in RULE_ROWS],
        "table3": [{"rho": row.rho_dir.value, "sign_gg": row.sign_gg,
                    "rho_tilde": row.rho_tilde_dir.value} for row in RULE_ROWS],
    }


def cmd_tables(args) -> int:
    if args.json:
        _emit_json(_tables_payload(), args.out)
        return EXIT_OK
    sgg = {1: "> 0", -1: "< 0"}
    print("Table 1: monotonicity rules (switch at a single point c)")
    print("  rho    gg'    r")
    for row in RULE_ROWS:
        print(f"  {row.rho_dir.value:<6} {sgg[row.sign_gg]:<6} {row.r_family.value}")
    print()
    print("Table 2: improved rules (switch on a flat [c, d])")
    print("  rho    gg'    r")
    for row in RULE_ROWS:
        print(f"  {row.rho_dir.value:<6} {sgg[row.sign_gg]:<6} {row.r_family.value}")
    print()
    print("Table 3: direction of rho-tilde")
    print("  rho    gg'    rho_tilde")
    for row in RULE_ROWS:
        print(f"  {row.rho_dir.value:<6} {sgg[row.sign_gg]:<6} {row.rho_tilde_dir.value}")
    if args.out:
        _emit_json(_tables_payload(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monoratio",
        description="Monotonicity-pattern analysis of ratios f/g via the "
                    "derivative ratio f'/g'.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, window=True):
        if window:
            p.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"),
                           required=True, help="finite analysis window")
        p.add_argument("--grid-n", type=int, default=2048, dest="grid_n",
                       help="analysis grid size (default 2048)")
        p.add_argument("--tol-zero", type=float, default=1e-7, dest="tol_zero",
                       help="relative zero tolerance (default 1e-7)")
        p.add_argument("--out", help="write the JSON report here instead of stdout")

    p_analyze = sub.add_parser("analyze", help="analyze a ratio f/g")
    p_analyze.add_argument("--f", required=True, help="numerator expression")
    p_analyze.add_argument("--g", required=True, help="denominator expression")
    add_common(p_analyze)
    p_analyze.add_argument("--csv", help="dump x,f,g,r,rho,rho_tilde samples here")
    p_analyze.set_defaults(handler=cmd_analyze)

    p_con = sub.add_parser("construct",
                           help="build f from (g, rho, z, K) and analyze f/g")
    p_con.add_argument("--g", required=True, help="denominator expression")
    p_con.add_argument("--rho", help="derivative-ratio expression")
    p_con.add_argument("--staircase", help="staircase rho spec (JSON file)")
    p_con.add_argument("--z", type=float, required=True,
                       help="anchor point inside the chosen constancy interval")
    p_con.add_argument("--K", type=float, default=None,
                       help="ratio value at z (default: rho(z))")
    p_con.add_argument("--quad-tol", type=float, default=1e-10, dest="quad_tol",
                       help="quadrature tolerance (default 1e-10)")
    add_common(p_con)
    p_con.add_argument("--csv", help="dump x,f,g,r,rho,rho_tilde samples here")
    p_con.set_defaults(handler=cmd_construct)

    p_verify = sub.add_parser("verify",
                              help="run seeded generated pairs through all checks")
    p_verify.add_argument("--seed", type=int, default=0, help="base seed")
    p_verify.add_argument("--cases", type=int, default=100,
                          help="number of generated pairs")
    p_verify.add_argument("--quad-tol", type=float, default=1e-10, dest="quad_tol")
    add_common(p_verify, window=False)
    p_verify.set_defaults(handler=cmd_verify)

    p_tables = sub.add_parser("tables", help="print the encoded rule tables")
    p_tables.add_argument("--json", action="store_true",
                          help="emit JSON instead of text")
    p_tables.add_argument("--out", help="also write the JSON tables here")
    p_tables.set_defaults(handler=cmd_tables)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.handler(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
