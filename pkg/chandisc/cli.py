"""Command line frontend.

Every subcommand builds one or more tables (lists of flat rows) and writes them
to standard output as CSV or JSON. Diagnostics and logs go to standard error.

Exit codes: 0 success, 1 a verification check found a violation, 2 bad input,
3 a dimension budget was exceeded, 4 an unexpected internal error.
"""

import argparse
from collections.abc import Callable
import csv
from dataclasses import dataclass
import json
import logging
import math
import sys
from typing import Any

import numpy as np

from chandisc.chandiv.divergence import regularized_estimate
from chandisc.chandiv.optimizer import OptimizerConfig
from chandisc.discrim.exponents import exponent_report
from chandisc.discrim.stein import StrategyClass, stein_sequence
from chandisc.errors import ChandiscError, DomainError, ResourceError
from chandisc.interchange import load_channel, load_state, witness_hash
from chandisc.statediv.kinds import KIND_NAMES, make_divergence
from chandisc.verify.glt import counterexample_glt, minimal_glt_violation
from chandisc.verify.suite import SuiteOptions, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_INTERNAL = 4

GLT_REPORTED_DIMS = (4, 64)
LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)

Row = dict[str, Any]
Tables = dict[str, list[Row]]


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    # None keeps each verification check's own tolerance
    tol: float | None = None
    restarts: int = 32
    workers: int = 1
    n_max: int = 1
    alpha: float | None = None
    epsilon: float | None = None
    rate: float | None = None
    out_format: str = "csv"

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a non-negative 64-bit integer, got {self.seed}")
        if self.tol is not None and not self.tol >= 0.0:
            raise DomainError(f"tolerance must be non-negative, got {self.tol}")
        if self.restarts < 1 or self.workers < 1 or self.n_max < 1:
            raise DomainError("--restarts, --workers and --nmax must be positive")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        return cls(
            seed=args.seed,
            tol=args.tol,
            restarts=args.restarts,
            workers=args.workers,
            n_max=getattr(args, "nmax", 1),
            alpha=getattr(args, "alpha", None),
            epsilon=getattr(args, "epsilon", None),
            rate=getattr(args, "rate", None),
            out_format=args.out,
        )

    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(restarts=self.restarts, seed=self.seed, workers=self.workers)


def cmd_divergence(args: argparse.Namespace, config: RunConfig) -> tuple[Tables, int]:
    rho, sigma = load_state(args.rho), load_state(args.sigma)
    kind = make_divergence(args.kind, config.alpha, config.epsilon)
    result = kind.evaluate(rho, sigma)
    row = {
        "kind": kind.label,
        "value": result.value,
        "support_ok": result.support_ok,
        "alpha": config.alpha,
        "epsilon": config.epsilon,
    }
    return {"divergence": [row]}, EXIT_OK


def cmd_chandiv(args: argparse.Namespace, config: RunConfig) -> tuple[Tables, int]:
    n, m = load_channel(args.n), load_channel(args.m)
    if args.stein:
        if config.epsilon is None:
            raise DomainError("--stein needs --epsilon")
        points = stein_sequence(n, m, config.epsilon, config.n_max, StrategyClass(args.stein), config.optimizer())
        rows = [
            {"strategy": args.stein, "copies": p.copies, "rate": p.rate, "witness": witness_hash(p.witness)}
            for p in points
        ]
        return {"stein": rows}, EXIT_OK

    kind = make_divergence(args.kind, config.alpha, config.epsilon)
    points = regularized_estimate(n, m, kind, config.n_max, config.optimizer())
    rows = [
        {"kind": kind.label, "copies": p.copies, "value": p.value, "witness": witness_hash(p.witness)}
        for p in points
    ]
    return {"chandiv": rows}, EXIT_OK


def cmd_exponents(args: argparse.Namespace, config: RunConfig) -> tuple[Tables, int]:
    n, m = load_channel(args.n), load_channel(args.m)
    report = exponent_report(n, m, config.rate, config.optimizer(), copies=config.n_max)

    def row(exponent, curve, copies, point, witness=None):
        return {
            "exponent": exponent,
            "curve": curve,
            "copies": copies,
            "rate": report.rate,
            "value": point.value,
            "alpha": point.alpha,
            "witness": witness_hash(witness) if witness is not None else None,
        }

    rows = [
        row("strong_converse", "sandwiched", 1, report.strong_converse, report.strong_converse_witness),
        row("error", "petz", 1, report.error, report.error_witness),
    ]
    if report.regularized_strong_converse is not None:
        rows.append(row("strong_converse", "sandwiched", report.copies, report.regularized_strong_converse))
    if report.regularized_error is not None:
        rows.append(row("error", "petz", report.copies, report.regularized_error))
    curves = [
        {"curve": curve, "alpha": alpha, "value": value}
        for curve, points in (("sandwiched", report.sandwiched_curve), ("petz", report.petz_curve))
        for alpha, value in points
    ]
    return {"exponents": rows, "curves": curves}, EXIT_OK


def _glt_rows() -> list[Row]:
    dims = (*GLT_REPORTED_DIMS, minimal_glt_violation())
    return [
        {"d": r.d, "lhs": r.lhs, "rhs": r.rhs, "violated": r.violated, "minimal": r.d == dims[-1]}
        for r in map(counterexample_glt, dims)
    ]


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> tuple[Tables, int]:
    options = SuiteOptions(
        trials=args.trials,
        seed=config.seed,
        workers=config.workers,
        tolerance=config.tol,
        restarts=config.restarts,
    )
    reports = run_suite(args.suite, options)
    tables: Tables = {"checks": []}
    for report in reports:
        row = report.to_json()
        row["passed"] = report.passed
        if config.out_format == "csv":
            # witnesses can hold whole matrices; CSV carries the summary only
            del row["witness"]
        tables["checks"].append(row)
    if args.suite in ("glt", "all"):
        tables["glt"] = _glt_rows()
    failed = [r.name for r in reports if not r.passed]
    if failed:
        logger.warning("violations found by %s", ", ".join(failed))
        return tables, EXIT_VIOLATION
    return tables, EXIT_OK


def format_cell(value: Any) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    match value:
        case None:
            return ""
        case bool():
            return "true" if value else "false"
        case int():
            return str(value)
        case float() if math.isfinite(value):
            return f"{value:.11e}"
        case float():
            return str(value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_json_value(v) for v in value]
    return value


def emit(tables: Tables, out_format: str, stream=None) -> None:
    stream = stream or sys.stdout
    if out_format == "json":
        json.dump(_json_value(tables), stream, indent=2, allow_nan=False)
        stream.write("\n")
        return
    for i, (name, rows) in enumerate(tables.items()):
        if i:
            stream.write("\n")
        stream.write(f"# {name}\n")
        if not rows:
            continue
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(rows[0].keys())
        for row in rows:
            writer.writerow(format_cell(v) for v in row.values())


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    common.add_argument("--tol", type=float, default=None, help="tolerance override for verification checks")
    common.add_argument("--workers", type=int, default=1, help="worker threads (default: 1)")
    common.add_argument("--out", choices=("csv", "json"), default="csv", help="output format (default: csv)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logs")
    return common


def _add_kind_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kind", choices=KIND_NAMES, default="umegaki", help="divergence kind (default: umegaki)")
    parser.add_argument("--alpha", type=float, default=None, help="order for petz and sandwiched")
    parser.add_argument("--epsilon", type=float, default=None, help="error threshold for hypothesis testing")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="chandisc", description="Quantum channel discrimination toolkit.")
    commands = parser.add_subparsers(dest="command", required=True)

    divergence = commands.add_parser("divergence", parents=[common], help="divergence between two states")
    divergence.add_argument("rho", help="state file or builtin name (zero, one, plus, mixed)")
    divergence.add_argument("sigma", help="state file or builtin name")
    _add_kind_arguments(divergence)
    divergence.set_defaults(handler=cmd_divergence, restarts=1)

    chandiv = commands.add_parser("chandiv", parents=[common], help="regularized channel divergence estimates")
    chandiv.add_argument("n", help="channel file or builtin name (identity, replacer[:state], depolarizing:p, ...)")
    chandiv.add_argument("m", help="channel file or builtin name")
    _add_kind_arguments(chandiv)
    chandiv.add_argument("--nmax", type=int, default=1, help="largest copy count (default: 1)")
    chandiv.add_argument("--restarts", type=int, default=32, help="random restarts per optimization (default: 32)")
    chandiv.add_argument(
        "--stein",
        choices=[s.value for s in StrategyClass],
        default=None,
        help="emit achievable Stein rates for this strategy class instead",
    )
    chandiv.set_defaults(handler=cmd_chandiv)

    exponents = commands.add_parser("exponents", parents=[common], help="strong converse and error exponents")
    exponents.add_argument("n", help="channel file or builtin name")
    exponents.add_argument("m", help="channel file or builtin name")
    exponents.add_argument("--rate", type=float, required=True, help="rate r > 0")
    exponents.add_argument("--nmax", type=int, default=1, help="also evaluate the regularized curves at this copy count")
    exponents.add_argument("--restarts", type=int, default=32, help="random restarts per optimization (default: 32)")
    exponents.set_defaults(handler=cmd_exponents)

    verify = commands.add_parser("verify", parents=[common], help="run a verification suite")
    verify.add_argument("suite", help="suite name, or 'all'")
    verify.add_argument("--trials", type=int, default=None, help="trials per check (default: each check's own)")
    verify.add_argument("--restarts", type=int, default=8, help="restarts for the order suite (default: 8)")
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=LOG_LEVELS[min(args.verbose, len(LOG_LEVELS) - 1)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler: Callable[[argparse.Namespace, RunConfig], tuple[Tables, int]] = args.handler
    try:
        config = RunConfig.from_args(args)
        logger.info("running %s with %s", args.command, config)
        tables, code = handler(args, config)
    except ResourceError as e:
        print(f"chandisc: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except ChandiscError as e:
        print(f"chandisc: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:
        logger.debug("unexpected failure", exc_info=True)
        print(f"chandisc: internal error: {e!r}", file=sys.stderr)
        return EXIT_INTERNAL
    emit(tables, config.out_format)
    return code


if __name__ == "__main__":
    sys.exit(main())
