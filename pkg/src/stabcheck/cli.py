"""Command line entry point: ``stabcheck analyze <config>``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import report as report_io
from .checker import Outcome, Verdict, analyze
from .config import ConfigError, RunConfig, load_config
from .cubical import CapacityError
from .interval import DomainError
from .sigma import InvalidSystem

EXIT_NO_OBSTRUCTION = 0
EXIT_ERROR = 1
EXIT_ABORTED = 2
EXIT_NOT_STABILIZABLE = 3

log = logging.getLogger("stabcheck")


def exit_code(rep) -> int:
    if rep.verdict is Verdict.NOT_STABILIZABLE:
        return EXIT_NOT_STABILIZABLE
    if rep.aborted:
        return EXIT_ABORTED
    return EXIT_NO_OBSTRUCTION


def summary(rep) -> str:
    lines = [f"{rep.system['name']}: {rep.verdict.value}"]
    for c in rep.conditions:
        flag = " (stabilized)" if c.stabilized else ""
        lines.append(f"  {c.condition.value:15s} {c.outcome.value}{flag}")
    for level in rep.levels:
        if "homology" in level:
            betti = level["homology"]["betti"]
            row = " ".join(f"{k}={v}" for k, v in sorted(betti.items(), key=lambda kv: int(kv[0][1:])))
            lines.append(f"  r={level['resolution']:<4d} cubes={level['top_cubes']:<8d} {row}")
        else:
            lines.append(f"  r={level['resolution']:<4d} skipped: {level.get('error')}")
    if rep.verdict is Verdict.NO_OBSTRUCTION_FOUND:
        lines.append("  note: " + rep.caveats[0])
    return "\n".join(lines)


def run(config: RunConfig, *, json_only: bool = False, out=None) -> int:
    """Analyze, write the report (and CSV unless json_only) and return the exit code."""
    out = out or sys.stdout
    rep = analyze(config.system, config.params, config.probe_loops())
    text = report_io.serialize(rep)
    dest = config.output
    dest.report.parent.mkdir(parents=True, exist_ok=True)
    dest.report.write_text(text)
    if json_only:
        out.write(text)
    else:
        dest.betti_csv.parent.mkdir(parents=True, exist_ok=True)
        dest.betti_csv.write_text(report_io.betti_csv(rep))
        if dest.verbosity > 0:
            out.write(summary(rep) + "\n")
            out.write(f"  report: {dest.report}\n  betti table: {dest.betti_csv}\n")
    violated = [c.condition.value for c in rep.conditions if c.outcome is Outcome.VIOLATED]
    log.info("violated: %s", ", ".join(violated) or "none")
    return exit_code(rep)


def _resolutions(text: str):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list like 8,16")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stabcheck",
                                     description="Topological obstructions to feedback stabilization.")
    sub = parser.add_subparsers(dest="command", required=True)
    an = sub.add_parser("analyze", help="run all three checks on a config file")
    an.add_argument("config")
    an.add_argument("--resolution-override", type=_resolutions, metavar="R1,R2")
    an.add_argument("--json-only", action="store_true", help="print the JSON report only, no CSV")
    an.add_argument("--seed", type=int)
    an.add_argument("--max-cells", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        config = config.with_overrides(resolutions=args.resolution_override, seed=args.seed,
                                       max_cells=args.max_cells)
        level = {0: logging.WARNING, 1: logging.WARNING, 2: logging.INFO}.get(
            config.output.verbosity, logging.DEBUG)
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
        return run(config, json_only=args.json_only)
    except (ConfigError, InvalidSystem, DomainError, CapacityError, OSError) as exc:
        print(f"stabcheck: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
