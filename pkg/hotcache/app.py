#!/usr/bin/env python3
"""
hotcache - hierarchical hotplug coded caching
Builds and verifies HHPDA pairs from t-designs and runs delivery sessions on real bytes
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from . import designs, hhpda, sim
from .errors import (
    ConsistencyError,
    CorruptionError,
    HotcacheError,
    InfeasibleError,
    ParameterError,
    ParseError,
    ProtocolViolation,
    UndecodableError,
)
from .export import export_ledger, write_sweep
from .hhpda import HhpdaPair, Strategy
from .ledger import run_sweep_cached
from .schema import dump_json
from .verdict import Verdict

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# Raised when an array or a session does not behave; everything else is bad input.
FAILURE_ERRORS = (InfeasibleError, ConsistencyError, ProtocolViolation, UndecodableError, CorruptionError)

EXAMPLE_PAIR = "example"


def configure_logging(verbosity: int) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def parse_ints(text: str, what: str) -> List[int]:
    """Parse a comma list such as "1,2,3"."""
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ParameterError(f"{what} must be a comma list of integers, got {text!r}") from None
    if not values:
        raise ParameterError(f"{what} is empty")
    return values


def resolve_pair(source: str) -> HhpdaPair:
    """Load a pair file, or the bundled example pair for "example"."""
    if source == EXAMPLE_PAIR:
        return hhpda.example_pair()
    return hhpda.load_pair(source)


def emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def format_verdict(title: str, verdict: Verdict) -> str:
    """
    Render a verdict for the terminal.

    Args:
        title: What was checked
        verdict: Outcome of the check

    Returns:
        One status line followed by indented violations, warnings, notes and parameters
    """
    lines = [f"{'✓' if verdict.ok else '✗'} {title}"]
    lines.extend(f"  {violation}" for violation in verdict.violations)
    lines.extend(f"  warning: {warning}" for warning in verdict.warnings)
    lines.extend(f"  note: {note}" for note in verdict.notes)
    lines.extend(f"  {key}: {value}" for key, value in verdict.params.items())
    return "\n".join(lines) + "\n"


def render_verdict(title: str, verdict: Verdict, fmt: str, out: Optional[str] = None) -> int:
    if fmt == "json":
        emit(dump_json(verdict.to_dict()), out)
    else:
        emit(format_verdict(title, verdict), out)
    return EXIT_OK if verdict.ok else EXIT_FAILED


def format_grid(rows: Sequence[Sequence[object]], names: Optional[Sequence[object]] = None) -> str:
    lines = []
    for index, row in enumerate(rows):
        name = names[index] if names is not None else index + 1
        cells = " ".join(f"{'.' if cell is None else cell:>3}" for cell in row)
        lines.append(f"  {name:>4} | {cells}")
    return "\n".join(lines) + "\n"


# design


def cmd_design_verify(args: argparse.Namespace) -> int:
    d = designs.load_design(args.design)
    verdict = designs.verify_design(d, forbid_repeats=args.forbid_repeats)
    if verdict.ok:
        verdict.params.update({f"lambda_{s}": designs.lambda_s(d, s) for s in range(d.t + 1)})
    return render_verdict(f"{d.label()} design ({args.design})", verdict, args.format, args.output)


def cmd_design_complete(args: argparse.Namespace) -> int:
    d = designs.complete_design(args.v, args.k, args.t)
    emit(dump_json(designs.design_to_dict(d)), args.output)
    if args.output:
        print(f"Wrote complete {d.label()} design with {d.b} blocks to {args.output}")
    return EXIT_OK


def cmd_design_catalog(args: argparse.Namespace) -> int:
    if args.format == "json":
        entries = []
        for design_id in designs.catalog_ids():
            entry = {"id": design_id, "note": designs.CATALOG_NOTES[design_id]}
            entry.update(designs.design_to_dict(designs.load_design(design_id)))
            entries.append(entry)
        emit(json.dumps(entries, indent=2) + "\n", args.output)
        return EXIT_OK
    lines = []
    for design_id in designs.catalog_ids():
        d = designs.load_design(design_id)
        lines.append(f"{design_id}: {d.label()}, {d.b} blocks ({designs.CATALOG_NOTES[design_id]})")
        if args.blocks:
            lines.append("  " + " ".join(designs.format_block(block) for block in d.blocks))
    emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


# hhpda


def cmd_hhpda_build(args: argparse.Namespace) -> int:
    d = designs.load_design(args.design)
    pair = hhpda.build_from_design(d, args.k2, parse_ints(args.a, "--a"), design_id=str(args.design))
    emit(hhpda.pair_json(pair), args.output)
    if args.output:
        print(f"Built HHPDA {pair.header()} -> {args.output}")
    return EXIT_OK


def cmd_hhpda_verify(args: argparse.Namespace) -> int:
    pair = resolve_pair(args.pair_file or args.pair)
    if args.tau:
        return _verify_single_tau(pair, args)
    verdict = hhpda.verify_hhpda(pair, sample=args.sample, seed=args.seed)
    return render_verdict(f"HHPDA {pair.header()}", verdict, args.format, args.output)


def _verify_single_tau(pair: HhpdaPair, args: argparse.Namespace) -> int:
    users = hhpda.normalize_tau(pair, hhpda.parse_users(args.tau))
    if args.zeta:
        zeta = parse_ints(args.zeta, "--zeta")
    else:
        zeta = hhpda.find_zeta(pair, users, args.strategy)
    verdict = hhpda.check_zeta(pair, zeta, users)
    verdict.params.update(
        {"tau": ",".join(hhpda.format_user(u) for u in users), "zeta": ",".join(str(f) for f in zeta)}
    )
    if args.format == "json" or not verdict.ok:
        return render_verdict(f"projection on {verdict.params['tau']}", verdict, args.format, args.output)
    text = format_verdict(f"projection on {verdict.params['tau']} star-matches B", verdict)
    text += "  projection (Q row | cells):\n"
    text += format_grid(hhpda.fill_qbar(pair, zeta, users), names=zeta)
    emit(text, args.output)
    return EXIT_OK


def cmd_hhpda_params(args: argparse.Namespace) -> int:
    notes: List[str] = []
    if args.design:
        if args.k2 is None or args.a is None:
            raise ParameterError("--design needs --k2 and --a")
        d = designs.load_design(args.design)
        a = parse_ints(args.a, "--a")
        record = hhpda.construction_params(d, args.k2, a)
        notes.append("closed-form parameters equal the counts on the built arrays")
        printed = Fraction(d.lambda_ - designs.lambda_s(d, args.k2), record.Fprime)
        if printed != record.M2_over_N:
            notes.append(
                f"M2/N is Z2/F'={record.M2_over_N} from the arrays; "
                f"(lambda - lambda_K2)/F' would give {printed}"
            )
    elif args.pair:
        record = hhpda.measured_params(resolve_pair(args.pair))
    else:
        raise ParameterError("give --design (with --k2 and --a) or --pair")
    values: Dict[str, object] = dict(record.as_dict())
    if args.format == "json":
        values["notes"] = notes
        emit(dump_json(values), args.output)
        return EXIT_OK
    lines = [f"{key}: {value}" for key, value in values.items()]
    lines.extend(f"note: {note}" for note in notes)
    emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


# sim


def format_report(report: sim.SessionReport) -> str:
    lines = [
        f"{'✓' if report.ok else '✗'} session "
        + ",".join(hhpda.format_user(u) for u in report.tau)
        + f" demands {','.join(str(n) for n in report.demands)}",
        f"  strategy: {report.strategy} (seed {report.seed})",
        f"  zeta: {','.join(str(f) for f in report.zeta)}",
        f"  R1: {report.R1_measured} (theory {report.R1_theory})",
        f"  R2: {report.R2_measured} (theory {report.R2_theory})",
    ]
    for m in report.mirrors:
        if m.phase_a or m.phase_b:
            lines.append(
                f"  mirror {m.k1}: {m.phase_a} forwarded + {m.phase_b} local = "
                f"{report.r2_per_mirror[m.k1]}"
            )
    for user, ok in report.decode_ok.items():
        reason = f" ({report.failures[user]})" if user in report.failures else ""
        lines.append(f"  {'✓' if ok else '✗'} user {hhpda.format_user(user)}{reason}")
    lines.append(f"  bytes: server {report.bytes_server}, mirrors {report.bytes_mirrors}")
    return "\n".join(lines) + "\n"


def cmd_sim_run(args: argparse.Namespace) -> int:
    pair = resolve_pair(args.pair)
    users = hhpda.parse_users(args.active)
    if args.demands:
        demands = parse_ints(args.demands, "--demands")
    else:
        demands = [(i % args.files) + 1 for i in range(len(users))]
    lib = sim.make_library(args.files, pair.Fprime, args.packet_bytes, args.seed)
    report = sim.run_session(pair, lib, users, demands, args.strategy, args.seed)
    if args.format == "json":
        emit(dump_json(report.to_dict()), args.output)
    else:
        emit(format_report(report), args.output)
    return EXIT_OK if report.ok else EXIT_FAILED


def format_sweep(reports: Sequence[sim.SessionReport], stats: Optional[Dict[str, int]]) -> str:
    decoded = sum(1 for r in reports if all(r.decode_ok.values()))
    matched = sum(1 for r in reports if r.loads_match)
    lines = [
        f"{'✓' if decoded == matched == len(reports) else '✗'} {len(reports)} sessions",
        f"  fully decoded: {decoded}/{len(reports)}",
        f"  loads equal the union formula: {matched}/{len(reports)}",
    ]
    if reports:
        r1 = sorted({r.R1_measured for r in reports})
        r2 = [r.R2_measured for r in reports]
        lines.append(f"  R1 values: {', '.join(str(x) for x in r1)}")
        lines.append(
            f"  R2: min {min(r2)}, max {max(r2)}, mean {sum(r2, Fraction(0)) / len(r2)}"
        )
    if stats is not None:
        lines.append(f"  ledger cache hits: {stats['cache_hits']}, misses: {stats['cache_misses']}")
    return "\n".join(lines) + "\n"


def cmd_sim_sweep(args: argparse.Namespace) -> int:
    pair = resolve_pair(args.pair)
    taus = "all" if args.sample is None else args.sample
    fixed = parse_ints(args.demands, "--demands") if args.demands else None
    if fixed is not None and args.policy != "fixed":
        raise ParameterError("--demands needs --policy fixed")
    stats = None
    if args.db:
        reports, stats = run_sweep_cached(
            pair,
            args.files,
            args.packet_bytes,
            args.db,
            taus=taus,
            policy=args.policy,
            strategy=args.strategy,
            seed=args.seed,
            per_tau=args.per_tau,
            fixed_demands=fixed,
        )
    else:
        lib = sim.make_library(args.files, pair.Fprime, args.packet_bytes, args.seed)
        reports = sim.sweep(
            pair,
            lib,
            taus=taus,
            policy=args.policy,
            strategy=args.strategy,
            seed=args.seed,
            per_tau=args.per_tau,
            fixed_demands=fixed,
        )

    if args.format == "csv":
        if args.output:
            with open(args.output, 'w', newline='', encoding='utf-8') as handle:
                write_sweep(reports, handle)
        else:
            write_sweep(reports, sys.stdout)
    elif args.format == "json":
        emit(json.dumps([r.to_dict() for r in reports], indent=2) + "\n", args.output)
    else:
        emit(format_sweep(reports, stats), args.output)
    if stats is not None and args.format != "human":
        print(
            "Ledger cache hits: {hits}, misses: {misses}".format(
                hits=stats["cache_hits"],
                misses=stats["cache_misses"],
            ),
            file=sys.stderr,
        )
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAILED


def cmd_sim_export(args: argparse.Namespace) -> int:
    if not Path(args.db).is_file():
        raise ParseError("ledger database not found", path=args.db)
    count = export_ledger(args.db, args.out)
    print(f"Exported {count} sessions to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '-v', '--verbose',
        action='count',
        default=0,
        help='Log progress to stderr (-v info, -vv debug)',
    )

    def formats(sub: argparse.ArgumentParser, choices: Sequence[str], default: str = "human") -> None:
        sub.add_argument(
            '--format',
            choices=list(choices),
            default=default,
            help=f'Output format (default: {default})',
        )
        sub.add_argument('-o', '--output', help='Write output to this file instead of stdout')

    def strategy(sub: argparse.ArgumentParser) -> None:
        sub.add_argument(
            '--strategy',
            choices=[s.value for s in Strategy],
            default=Strategy.PREFER_MIRROR_STAR.value,
            help='Row selection strategy (default: prefer-mirror-star)',
        )

    parser = argparse.ArgumentParser(
        prog="hotcache",
        description="Build, verify and simulate hierarchical hotplug coded caching schemes.",
    )
    groups = parser.add_subparsers(dest="group", required=True)

    design = groups.add_parser("design", help="t-design utilities").add_subparsers(dest="command", required=True)
    p = design.add_parser("verify", parents=[common], help="Verify a design file or catalog id")
    p.add_argument('design', help='Catalog id or design JSON file')
    p.add_argument('--forbid-repeats', action='store_true', help='Treat repeated blocks as violations')
    formats(p, ["human", "json"])
    p.set_defaults(handler=cmd_design_verify)

    p = design.add_parser("complete", parents=[common], help="Write the complete design of all k-subsets")
    p.add_argument('--v', type=int, required=True, help='Number of points')
    p.add_argument('--k', type=int, required=True, help='Block size')
    p.add_argument('--t', type=int, required=True, help='Strength t')
    p.add_argument('-o', '--output', help='Design JSON path (default: stdout)')
    p.set_defaults(handler=cmd_design_complete)

    p = design.add_parser("catalog", parents=[common], help="List bundled designs")
    p.add_argument('--blocks', action='store_true', help='Also print every block')
    formats(p, ["human", "json"])
    p.set_defaults(handler=cmd_design_catalog)

    arrays = groups.add_parser("hhpda", help="HHPDA pairs").add_subparsers(dest="command", required=True)
    p = arrays.add_parser("build", parents=[common], help="Build a pair from a t-design")
    p.add_argument('--design', required=True, help='Catalog id or design JSON file')
    p.add_argument('--k2', type=int, required=True, help='Users per mirror')
    p.add_argument('--a', required=True, help='Multiplicities a_1..a_{t-1}, comma separated')
    p.add_argument('-o', '--output', help='Pair JSON path (default: stdout)')
    p.set_defaults(handler=cmd_hhpda_build)

    p = arrays.add_parser("verify", parents=[common], help="Verify every HHPDA condition")
    p.add_argument('pair_file', nargs='?', help='Pair JSON file, or "example" for the bundled pair')
    p.add_argument('--pair', default=EXAMPLE_PAIR, help='Pair JSON file (default: bundled example)')
    scan = p.add_mutually_exclusive_group()
    scan.add_argument('--exhaustive', action='store_true', help='Scan every active set (default)')
    scan.add_argument('--sample', type=int, help='Scan this many random active sets')
    p.add_argument('--seed', type=int, default=0, help='Sampling seed (default: 0)')
    p.add_argument('--tau', help='Check one active set, e.g. "(1,1),(2,2),(3,1)"')
    p.add_argument('--zeta', help='Rows to check with --tau, comma separated (default: search)')
    strategy(p)
    formats(p, ["human", "json"])
    p.set_defaults(handler=cmd_hhpda_verify)

    p = arrays.add_parser("params", parents=[common], help="Report pair parameters")
    p.add_argument('--design', help='Catalog id or design JSON file')
    p.add_argument('--k2', type=int, help='Users per mirror')
    p.add_argument('--a', help='Multiplicities a_1..a_{t-1}, comma separated')
    p.add_argument('--pair', help='Pair JSON file, or "example"')
    formats(p, ["human", "json"])
    p.set_defaults(handler=cmd_hhpda_params)

    simulate = groups.add_parser("sim", help="Delivery sessions").add_subparsers(dest="command", required=True)

    def library(sub: argparse.ArgumentParser) -> None:
        sub.add_argument('--pair', default=EXAMPLE_PAIR, help='Pair JSON file (default: bundled example)')
        sub.add_argument('--files', type=int, default=4, help='Library size N (default: 4)')
        sub.add_argument('--packet-bytes', type=int, default=64, help='Bytes per packet (default: 64)')
        sub.add_argument('--seed', type=int, default=0, help='Library and demand seed (default: 0)')
        strategy(sub)

    p = simulate.add_parser("run", parents=[common], help="Run one delivery session")
    library(p)
    p.add_argument('--active', required=True, help='Active users, e.g. "(1,1),(2,2),(3,1)"')
    p.add_argument('--demands', help='Demanded file per active user, comma separated')
    formats(p, ["human", "json"])
    p.set_defaults(handler=cmd_sim_run)

    p = simulate.add_parser("sweep", parents=[common], help="Run sessions over many active sets")
    library(p)
    p.add_argument('--exhaustive', action='store_true', help='Every active set (default)')
    p.add_argument('--sample', type=int, help='Only this many random active sets')
    p.add_argument('--per-tau', type=int, default=1, help='Demand vectors per active set (default: 1)')
    p.add_argument('--policy', choices=["random", "fixed"], default="random", help='Demand policy (default: random)')
    p.add_argument('--demands', help='Demand vector for --policy fixed (default: all ones)')
    p.add_argument('--db', help='SQLite ledger; stored sessions are reused')
    formats(p, ["human", "csv", "json"])
    p.set_defaults(handler=cmd_sim_sweep)

    p = simulate.add_parser("export", parents=[common], help="Export a sweep ledger to CSV")
    p.add_argument('--db', required=True, help='SQLite ledger path')
    p.add_argument('--out', default='sweep.csv', help='Output CSV path (default: sweep.csv)')
    p.set_defaults(handler=cmd_sim_export)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    configure_logging(args.verbose)
    logger.debug("dispatching %s %s", args.group, args.command)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except FAILURE_ERRORS as exc:
        print(f"✗ {exc}", file=sys.stderr)
        return EXIT_FAILED
    except HotcacheError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    raise SystemExit(main())
