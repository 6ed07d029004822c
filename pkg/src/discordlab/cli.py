"""``discordlab`` command line interface.

Subcommands::

    discordlab compute --c1 0.1 --c2 0 --c3 -0.75 [--method numeric] [--json]
    discordlab classify --c1 0 --c2 -0.75 --c3 0.1 [--json]
    discordlab scan --all-families --points 200 --pairs 10000 --seed 42 [--json]
    discordlab find-violation --region example3 --budget 1000 --seed 7 [--json]
    discordlab figure --id 2 --c2 -0.75 --samples 101 --out f2.csv

Exit codes: 0 success, 1 bad flags, 2 unphysical state, 3 scan found a
violation, 4 no violation within budget, 5 output path not writable.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

from . import __version__
from .measures import closed_form_report, discord_bd_closed, geo_discord_bd_closed, numeric_report
from .ordering import (
    DEFAULT_EPS,
    FAMILIES,
    classify_families,
    confirm_with_oracle,
    curve_data,
    find_violation,
    region_sampler,
    scan_family,
)
from .qstate import BELL_VERTICES, BellDiagonal, InvalidStateError, eigenprobs, is_physical

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNPHYSICAL = 2
EXIT_VIOLATION = 3
EXIT_NONE_FOUND = 4
EXIT_UNWRITABLE = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def num(x: float) -> float:
    """Round to 12 significant digits for output."""
    return float(f"{float(x):.12g}")


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _family_index(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 1 <= value <= len(FAMILIES):
        raise argparse.ArgumentTypeError(f"family must be in 1..{len(FAMILIES)}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _state(args) -> BellDiagonal:
    try:
        return BellDiagonal(args.c1, args.c2, args.c3)
    except ValueError as err:
        raise InvalidStateError(f"unphysical state: {err}")


def _coeffs(c: BellDiagonal) -> list:
    return [num(x) for x in c]


def _report_dict(report) -> dict:
    out = {
        "method": report.method,
        "mutual_info": num(report.mutual_info),
        "classical_corr": num(report.classical_corr),
        "discord": num(report.discord),
        "geo_discord": num(report.geo_discord),
    }
    if report.optimizer_axis is not None:
        out["optimizer_axis"] = [num(x) for x in report.optimizer_axis.n]
    if report.geo_axis is not None:
        out["geo_axis"] = [num(x) for x in report.geo_axis.n]
    return out


def _verdict_dict(v) -> dict:
    return {
        "status": v.status.value,
        "violates_paper": v.violates_paper,
        "d_discord": num(v.d_discord),
        "d_geo": num(v.d_geo),
    }


def _witness_dict(w) -> dict:
    out = {
        "c": _coeffs(w.c),
        "c_prime": _coeffs(w.c_prime),
        "discord": [num(discord_bd_closed(w.c)), num(discord_bd_closed(w.c_prime))],
        "geo_discord": [num(geo_discord_bd_closed(w.c)), num(geo_discord_bd_closed(w.c_prime))],
        "verdict": _verdict_dict(w.verdict),
    }
    if w.oracle_verdict is not None:
        out["oracle_verdict"] = _verdict_dict(w.oracle_verdict)
    return out


def _scan_dict(r) -> dict:
    return {
        "family": r.family,
        "pairing": r.pairing,
        "pairs_tested": r.pairs_tested,
        "consistent": r.consistent,
        "violated": r.violated,
        "degenerate": r.degenerate,
        "seed": r.seed,
        "eps": r.eps,
        "witnesses": [_witness_dict(w) for w in r.witnesses],
    }


# -- commands -----------------------------------------------------------------


def cmd_compute(args):
    c = _state(args)
    if not is_physical(c):
        raise InvalidStateError(f"unphysical state {tuple(c)}: eigenvalues {eigenprobs(c).tolist()}")
    report = closed_form_report(c) if args.method == "closed" else numeric_report(c)
    results = _report_dict(report)
    lines = [f"{k}: {fmt(v)}" for k, v in results.items() if isinstance(v, float)]
    lines.insert(0, f"method: {report.method}")
    for key in ("optimizer_axis", "geo_axis"):
        if key in results:
            lines.append(f"{key}: " + " ".join(fmt(x) for x in results[key]))
    return {"c": _coeffs(c), "method": args.method}, results, lines, EXIT_OK


def cmd_classify(args):
    c = _state(args)
    families = sorted(classify_families(c))
    results = {
        "families": families,
        "physical": is_physical(c),
        "eigenprobs": [num(x) for x in eigenprobs(c)],
    }
    lines = [
        "families: " + (", ".join(map(str, families)) if families else "none"),
        f"physical: {str(results['physical']).lower()}",
        "eigenprobs: " + " ".join(fmt(x) for x in results["eigenprobs"]),
    ]
    return {"c": _coeffs(c)}, results, lines, EXIT_OK


def cmd_scan(args):
    ids = [f.index for f in FAMILIES] if args.all_families else [args.family]
    reports = [
        scan_family(
            i,
            n_points=args.points,
            n_pairs=args.pairs,
            eps=args.eps,
            seed=args.seed,
            pairing=args.pairing,
            oracle=args.oracle,
        )
        for i in ids
    ]
    total_violated = sum(r.violated for r in reports)
    results = {"scans": [_scan_dict(r) for r in reports], "total_violated": total_violated}
    lines = [
        f"family {r.family:2d}: pairs={r.pairs_tested} consistent={r.consistent} "
        f"violated={r.violated} degenerate={r.degenerate}"
        for r in reports
    ]
    lines.append(f"total violated: {total_violated}")
    for r in reports:
        if r.witnesses:
            w = r.witnesses[0]
            lines.append(
                f"family {r.family} witness: c={list(_coeffs(w.c))} c'={list(_coeffs(w.c_prime))} "
                f"dD={fmt(w.verdict.d_discord)} dG={fmt(w.verdict.d_geo)}"
            )
    inputs = {
        "families": ids,
        "points": args.points,
        "pairs": args.pairs,
        "eps": args.eps,
        "seed": args.seed,
        "pairing": args.pairing,
        "oracle": args.oracle,
    }
    return inputs, results, lines, EXIT_VIOLATION if total_violated else EXIT_OK


def cmd_find_violation(args):
    region = " ".join(args.region)
    try:
        sampler = region_sampler(region)
    except ValueError as err:
        raise UsageError(str(err))
    witness = find_violation(sampler, args.budget, args.eps, args.seed, include_ties=args.include_ties)
    inputs = {
        "region": region,
        "budget": args.budget,
        "eps": args.eps,
        "seed": args.seed,
        "include_ties": args.include_ties,
        "oracle": args.oracle,
    }
    if witness is None:
        return inputs, {"witness": None}, ["no violation found"], EXIT_NONE_FOUND
    if args.oracle:
        witness = confirm_with_oracle(witness, args.eps)
    wd = _witness_dict(witness)
    lines = [
        f"c  = {wd['c']}  D = {fmt(wd['discord'][0])}  D_G = {fmt(wd['geo_discord'][0])}",
        f"c' = {wd['c_prime']}  D = {fmt(wd['discord'][1])}  D_G = {fmt(wd['geo_discord'][1])}",
        f"verdict: {witness.verdict.status.value}",
    ]
    if witness.oracle_verdict is not None:
        lines.append(f"oracle verdict: {witness.oracle_verdict.status.value}")
    return inputs, {"witness": wd}, lines, EXIT_OK


def _figure1_rows():
    rows = [("tetrahedron", label, *v) for label, v in BELL_VERTICES.items()]
    for fam in FAMILIES:
        rows += [(f"family{fam.index}", f"v{k}", *map(float, v)) for k, v in enumerate(fam.vertices)]
    return ["region", "vertex", "c1", "c2", "c3"], rows


def cmd_figure(args):
    if args.id == 1:
        header, rows = _figure1_rows()
        body = [[r[0], r[1]] + [fmt(x) for x in r[2:]] for r in rows]
    else:
        kind = f"fig{args.id}"
        if args.id == 2 and args.c2 is None:
            raise UsageError("figure 2 needs --c2 in [-1, -0.5]")
        try:
            table = curve_data(kind, args.samples, c2=args.c2)
        except ValueError as err:
            raise UsageError(str(err))
        header = ["param", "discord", "geo_discord"]
        body = [[fmt(x) for x in row] for row in table]
    try:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(body)
    except OSError as err:
        return {"id": args.id, "out": args.out}, {"error": str(err)}, [f"cannot write {args.out}: {err}"], EXIT_UNWRITABLE
    inputs = {"id": args.id, "c2": args.c2, "samples": args.samples, "out": args.out}
    return inputs, {"rows": len(body), "columns": header}, [f"wrote {len(body)} rows to {args.out}"], EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="discordlab", description="Quantum discord of Bell-diagonal two-qubit states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def coeff_flags(p):
        for name in ("c1", "c2", "c3"):
            p.add_argument(f"--{name}", type=float, required=True)
        p.add_argument("--json", action="store_true", help="emit one JSON object")

    p = sub.add_parser("compute", help="mutual information, classical correlation, discord, geometric discord")
    coeff_flags(p)
    p.add_argument("--method", choices=("closed", "numeric"), default="closed")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("classify", help="which of the twelve families contain the state")
    coeff_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("scan", help="seeded ordering scan inside families")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--family", type=_family_index)
    which.add_argument("--all-families", action="store_true")
    p.add_argument("--points", type=_positive_int, default=200)
    p.add_argument("--pairs", type=_positive_int, default=10_000)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairing", choices=("free", "slice"), default="free")
    p.add_argument("--oracle", action="store_true", help="re-check witnesses with the numeric optimizer")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("find-violation", help="search a region for an ordering violation")
    p.add_argument("--region", nargs="+", required=True, help="tetrahedron | families A,B | example3 | example4")
    p.add_argument("--budget", type=_positive_int, default=1000)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--include-ties", action="store_true", help="also accept pairs tied in exactly one measure")
    p.add_argument("--oracle", action="store_true", help="re-check the witness with the numeric optimizer")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_find_violation)

    p = sub.add_parser("figure", help="write figure data as CSV")
    p.add_argument("--id", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--c2", type=float)
    p.add_argument("--samples", type=int, default=101)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "eps", 0.0) < 0:
        parser.error("--eps must be non-negative")
    start = time.perf_counter()
    try:
        inputs, results, lines, code = args.func(args)
    except InvalidStateError as err:
        print(f"discordlab: unphysical: {err}", file=sys.stderr)
        return EXIT_UNPHYSICAL
    except UsageError as err:
        print(f"discordlab: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    elapsed = int(round((time.perf_counter() - start) * 1000))
    if args.json:
        record = {
            "schema_version": SCHEMA_VERSION,
            "command": args.command,
            "inputs": inputs,
            "results": results,
            "wall_time_ms": elapsed,
        }
        print(json.dumps(record))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
