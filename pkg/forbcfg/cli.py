"""Command-line entry point: `python -m forbcfg <subcommand> ...`."""

from __future__ import annotations

import sys
from argparse import ArgumentParser, ArgumentTypeError, Namespace
from collections.abc import Callable
from enum import IntEnum
from logging import getLevelNamesMapping, getLogger
from pathlib import Path
from typing import TYPE_CHECKING, Final

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError
from wg_utilities.loggers import add_stream_handler

from forbcfg.choice_engine import ChoiceMode, forb_via_choices, save_choice
from forbcfg.common import Alpha, format_vertices, is_exact, pairs, parse_alpha
from forbcfg.config import get_settings
from forbcfg.exceptions import ForbCfgError
from forbcfg.matrix_core import forb_exact, load_pattern
from forbcfg.recurrence import bounds, build_g, lambda_estimate, sandwich_check
from forbcfg.reports import (
    OutputFormat,
    Report,
    Table,
    cell,
    h2_rows,
    reference_tables,
    write_report,
)
from forbcfg.suites import (
    LAMBDA_2,
    LAMBDA_TOLERANCE,
    SUITE_NAMES,
    SuiteContext,
    results_table,
    run_suite,
)
from forbcfg.tcm_opt import (
    Tcm,
    closed_sets,
    h_argmaxes,
    h_exact,
    load_tcm,
    local_search,
    normalized,
    random_tcm,
    save_tcm,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

LOGGER = getLogger(__name__)

PACKAGE_LOGGER: Final[str] = "forbcfg"


class ExitStatus(IntEnum):
    """Process exit codes."""

    SUCCESS = 0
    VERIFICATION_FAILED = 1
    USAGE_ERROR = 2


class RunConfig(BaseModel):
    """One parsed invocation."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    subcommand: str
    parameters: dict[str, int | float | str | bool | None]
    output_format: OutputFormat
    output: Path | None = None

    @classmethod
    def from_namespace(cls, namespace: Namespace) -> RunConfig:
        """Split the parsed arguments into parameters and output options."""
        ignored = {"subcommand", "format", "output", "log_level", "handler"}
        return cls(
            subcommand=namespace.subcommand,
            parameters={
                key: cell(value) for key, value in vars(namespace).items() if key not in ignored
            },
            output_format=OutputFormat(namespace.format),
            output=namespace.output,
        )


def _alpha(text: str) -> Alpha:
    try:
        return parse_alpha(text)
    except ValueError as err:
        raise ArgumentTypeError(str(err)) from err


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ArgumentTypeError(f"expected a positive integer, got {text}")

    return value


# Handlers


def _forb_exact(args: Namespace, config: RunConfig) -> Report:
    pattern = load_pattern(args.pattern)
    result = forb_exact(args.m, args.r, pattern, budget=args.budget, strict=args.strict)
    tables = [
        Table.from_records(
            "forb",
            [result.model_dump(include={"m", "r", "pattern", "value", "status", "nodes"})],
        ),
    ]
    if args.witness:
        tables.append(
            Table.from_records(
                "witness",
                (
                    {"column": index, "entries": column}
                    for index, column in enumerate(result.witness.columns)
                ),
            ),
        )

    return Report(
        command=config.subcommand,
        parameters=config.parameters,
        tables=tuple(tables),
    )


def _forb_choices(args: Namespace, config: RunConfig) -> Report:
    result = forb_via_choices(
        args.m,
        args.r,
        ChoiceMode(args.mode),
        samples=args.samples,
        seed=args.seed,
        budget=args.budget,
        strict=args.strict,
        prune=args.prune,
    )
    if args.save_choice is not None:
        save_choice(result.choice, args.save_choice)

    summary = {
        "m": result.m,
        "r": result.r,
        "mode": result.mode,
        "value": result.value,
        "status": result.status,
        "evaluated": result.evaluated,
        "good": result.choice.is_good,
        "tcm": str(result.tcm) if result.tcm is not None else None,
    }
    patterns = (
        {
            "triple": format_vertices(triple),
            "selector": selector,
            "kind": result.choice.kind(triple),
        }
        for triple, selector in result.choice.items()
    )
    return Report(
        command=config.subcommand,
        parameters=config.parameters,
        tables=(Table.from_records("forb", [summary]), Table.from_records("choice", patterns)),
    )


def _structure_tables(g: Tcm) -> tuple[Table, Table]:
    """The pair multiplicities of a TCM, keyed "x,y", and its maximal closed sets."""
    multiplicities = Table.from_records(
        "multiplicities",
        [{format_vertices(pair): g.multiplicity(*pair) for pair in pairs(g.m)}],
    )
    partition = Table.from_records(
        "closed_sets",
        ({"set": format_vertices(part), "size": len(part)} for part in closed_sets(g).sets),
        columns=("set", "size"),
    )
    return multiplicities, partition


def _h_exact(args: Namespace, config: RunConfig) -> Report:
    result = h_exact(
        args.m,
        args.alpha,
        budget=args.budget,
        strict=args.strict,
        allow_large=args.allow_large,
    )
    if args.save_tcm is not None:
        save_tcm(result.tcm, args.save_tcm)

    tables = [
        Table.from_records(
            "h_exact",
            [
                {
                    "m": result.m,
                    "alpha": result.alpha,
                    "H": result.value,
                    "value": result.value,
                    "h": normalized(result.value, result.m, result.alpha),
                    "status": result.status,
                    "nodes": result.nodes,
                    "tcm": str(result.tcm),
                },
            ],
        ),
        *_structure_tables(result.tcm),
    ]
    if args.argmaxes:
        tables.append(
            Table.from_records(
                "argmaxes",
                (
                    {"index": index, "tcm": str(g)}
                    for index, g in enumerate(
                        h_argmaxes(
                            args.m,
                            args.alpha,
                            limit=args.argmaxes,
                            allow_large=args.allow_large,
                        ),
                    )
                ),
            ),
        )

    return Report(
        command=config.subcommand,
        parameters=config.parameters,
        tables=tuple(tables),
    )


def _start_tcm(args: Namespace) -> Tcm:
    if args.tcm is not None:
        return load_tcm(args.tcm)

    if args.start == "construction":
        return build_g(args.m).tcm

    if args.start == "lexicographic":
        return Tcm.lexicographic_first(args.m)

    return random_tcm(args.m, np.random.default_rng(args.seed))


def _h_local(args: Namespace, config: RunConfig) -> Report:
    start = _start_tcm(args)
    result = local_search(
        start,
        args.alpha,
        seed=args.seed,
        iters=args.iters,
        restarts=args.restarts,
        chain_depth=args.chain_depth,
    )
    if args.save_tcm is not None:
        save_tcm(result.tcm, args.save_tcm)

    record = {
        "m": start.m,
        "alpha": args.alpha,
        "initial_weight": result.initial_weight,
        "weight": result.weight,
        "value": result.weight,
        "h": normalized(result.weight, start.m, args.alpha),
        "status": "lower_bound",
        "local_optimum": result.local_optimum,
        "restarts": result.restarts,
        "iterations": result.iterations,
        **{f"moves_{kind}": count for kind, count in result.moves.items()},
        "tcm": str(result.tcm),
    }
    return Report(
        command=config.subcommand,
        parameters=config.parameters,
        tables=(Table.from_records("h_local", [record]), *_structure_tables(result.tcm)),
    )


def _h2(args: Namespace, config: RunConfig) -> Report:
    alpha = args.alpha if args.exact else float(args.alpha)
    return Report(
        command=config.subcommand,
        parameters=config.parameters,
        tables=(h2_rows(args.max_m, alpha),),
    )


def _bounds(args: Namespace, config: RunConfig) -> Report:
    report = bounds(args.m, args.r, alpha=args.alpha, slack=args.slack)
    problems = report.inconsistencies()
    for problem in problems:
        LOGGER.error("bounds(%s, %s): %s", args.m, args.r, problem)

    record = report.model_dump()
    return Report(
        command=config.subcommand,
        parameters=config.parameters,
        tables=(Table.from_records("bounds", [record]),),
        passed=not problems,
    )


def _lambda(args: Namespace, config: RunConfig) -> Report:
    estimate = lambda_estimate(args.alpha, args.eps)
    expected = LAMBDA_2 if args.alpha == 2 else None  # noqa: PLR2004
    record = {
        "alpha": estimate.alpha,
        "lambda": estimate.value,
        "terms": estimate.terms,
        "tail_bound": estimate.tail_bound,
        "expected": expected,
        "match": abs(estimate.value - expected) <= max(LAMBDA_TOLERANCE, args.eps)
        if expected is not None
        else None,
    }
    return Report(
        command=config.subcommand,
        parameters=config.parameters,
        tables=(Table.from_records("lambda", [record]),),
        passed=record["match"] is not False,
    )


def _sandwich(args: Namespace, config: RunConfig) -> Report:
    report = sandwich_check(args.m, args.r)
    return Report(
        command=config.subcommand,
        parameters=config.parameters,
        tables=(Table.from_records("sandwich", [report.model_dump()]),),
        passed=report.holds,
    )


def _verify(args: Namespace, config: RunConfig) -> Report:
    results = run_suite(args.suite, SuiteContext(seed=args.seed, samples=args.samples))
    return Report(
        command=config.subcommand,
        parameters=config.parameters,
        tables=(results_table(results),),
        passed=all(result.match for result in results),
    )


def _emit_tables(_: Namespace, config: RunConfig) -> Report:
    report = reference_tables()
    return report.model_copy(update={"parameters": config.parameters})


type Handler = Callable[[Namespace, RunConfig], Report]


def _add_output_options(parser: ArgumentParser, default: OutputFormat) -> None:
    parser.add_argument(
        "--format",
        choices=[fmt.value for fmt in OutputFormat],
        default=default.value,
        help="artifact encoding",
    )
    parser.add_argument("--output", type=Path, default=None, help="write here instead of stdout")
    parser.add_argument(
        "--log-level",
        choices=sorted(getLevelNamesMapping()),
        default=None,
        help="attach a stderr log handler at this level",
    )


def _add_search_options(parser: ArgumentParser) -> None:
    parser.add_argument("--budget", type=_positive, default=None, help="node or choice budget")
    parser.add_argument(
        "--strict",
        action="store_true",
        help="fail instead of reporting a lower bound when the budget runs out",
    )


def build_parser() -> ArgumentParser:
    """Build the argument parser with one subparser per subcommand."""
    parser = ArgumentParser(
        prog="forbcfg",
        description="Forbidden configuration numbers, choices and triangular choice multigraphs.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, handler: Handler, help_text: str, default: OutputFormat) -> ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        sub.set_defaults(handler=handler)
        _add_output_options(sub, default)
        return sub

    sub = add("forb-exact", _forb_exact, "forb(m, r, F) by exhaustive search", OutputFormat.JSON)
    sub.add_argument("--m", type=int, required=True)
    sub.add_argument("--r", type=int, required=True)
    sub.add_argument("--pattern", default="M", help="builtin pattern name or JSON pattern file")
    sub.add_argument("--witness", action="store_true", help="also emit an extremal matrix")
    _add_search_options(sub)

    sub = add(
        "forb-choices",
        _forb_choices,
        "forb(m, r, M) as a maximum over choices",
        OutputFormat.JSON,
    )
    sub.add_argument("--m", type=int, required=True)
    sub.add_argument("--r", type=int, required=True)
    sub.add_argument(
        "--mode",
        choices=[mode.value for mode in ChoiceMode],
        default=ChoiceMode.ALL.value,
    )
    sub.add_argument("--samples", type=_positive, default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--save-choice", type=Path, default=None)
    sub.add_argument(
        "--no-prune",
        dest="prune",
        action="store_false",
        help="search good choices exhaustively",
    )
    _add_search_options(sub)

    sub = add("h-exact", _h_exact, "H(m, α) by exact search", OutputFormat.JSON)
    sub.add_argument("--m", type=int, required=True)
    sub.add_argument("--alpha", type=_alpha, default=2)
    sub.add_argument("--allow-large", action="store_true")
    sub.add_argument("--argmaxes", type=_positive, default=None, help="list up to N extremal TCMs")
    sub.add_argument("--save-tcm", type=Path, default=None)
    _add_search_options(sub)

    sub = add("h-local", _h_local, "lower bound on H(m, α) by local search", OutputFormat.JSON)
    sub.add_argument("--m", type=int, required=True)
    sub.add_argument("--alpha", type=_alpha, default=2)
    sub.add_argument("--seed", type=int, required=True)
    sub.add_argument("--iters", type=_positive, default=10_000)
    sub.add_argument("--restarts", type=int, default=0)
    sub.add_argument("--chain-depth", type=int, default=1)
    sub.add_argument(
        "--start",
        choices=["random", "construction", "lexicographic"],
        default="random",
    )
    sub.add_argument("--tcm", type=Path, default=None, help="start from a TCM file")
    sub.add_argument("--save-tcm", type=Path, default=None)

    sub = add("h2", _h2, "the H₂(m, α) table", OutputFormat.CSV)
    sub.add_argument("--max-m", type=_positive, required=True)
    sub.add_argument("--alpha", type=_alpha, default=2)
    sub.add_argument("--exact", action="store_true", help="rational arithmetic throughout")

    sub = add("bounds", _bounds, "closed-form bounds on forb(m, r, M) and H", OutputFormat.JSON)
    sub.add_argument("--m", type=_positive, required=True)
    sub.add_argument("--r", type=int, required=True)
    sub.add_argument("--alpha", type=_alpha, default=None)
    sub.add_argument("--slack", type=float, default=0.0)

    sub = add("lambda", _lambda, "λ(α) with a certified tail", OutputFormat.JSON)
    sub.add_argument("--alpha", type=_alpha, default=2)
    sub.add_argument("--eps", type=float, default=1e-9)

    sub = add("sandwich", _sandwich, "check H₂ ≤ forb excess ≤ H at (m, r)", OutputFormat.JSON)
    sub.add_argument("--m", type=_positive, required=True)
    sub.add_argument("--r", type=int, required=True)

    sub = add("verify", _verify, "run a verification suite", OutputFormat.TEXT)
    sub.add_argument("--suite", choices=SUITE_NAMES, required=True)
    sub.add_argument("--samples", type=_positive, default=None)
    sub.add_argument("--seed", type=int, default=0)

    add("emit-tables", _emit_tables, "emit the H, upper-bound and H₂ tables", OutputFormat.CSV)

    return parser


def _check_arguments(parser: ArgumentParser, args: Namespace) -> None:
    if args.subcommand == "forb-choices" and args.mode == ChoiceMode.SAMPLE and (
        args.seed is None or args.samples is None
    ):
        parser.error("--mode sample needs both --samples and --seed")

    if args.subcommand == "h2" and args.exact and not is_exact(args.alpha):
        parser.error(f"--exact needs a rational --alpha, got {args.alpha}")


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one subcommand and return the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_arguments(parser, args)

    if args.log_level is not None:
        logger = getLogger(PACKAGE_LOGGER)
        logger.setLevel(args.log_level)
        add_stream_handler(logger, level=getLevelNamesMapping()[args.log_level])

    config = RunConfig.from_namespace(args)
    LOGGER.debug(
        "Running %s with %s (settings %s)",
        config.subcommand,
        config.parameters,
        get_settings(),
    )

    try:
        report = args.handler(args, config)
    except (ForbCfgError, ValidationError, ValueError) as err:
        sys.stderr.write(f"forbcfg {config.subcommand}: {err}\n")
        return ExitStatus.USAGE_ERROR

    write_report(report, config.output_format, config.output)

    if report.passed is False:
        LOGGER.error("%s failed", config.subcommand)
        return ExitStatus.VERIFICATION_FAILED

    return ExitStatus.SUCCESS
