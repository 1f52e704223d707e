# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import settings
from .allsmt import ALGORITHMS, run_script
from .bmc import (BmcConfig, check_concurrent, check_sequential, enumerate_counterexamples, generate_tests,
                  generate_tests_symbolic, reliability)
from .corpus import run_corpus
from .errors import (BoundError, InternalError, LeakcountError, MissingExpectation, SourceSyntaxError,
                     UnsupportedFeature)
from .gcl_parser import load_program
from .logic_smtlib import emit_smt
from .qif_capacity import ROUTES, QifQuery, analyze as analyze_capacity, prepare
from .report_writer import format_bmc, format_capacity, format_labels, format_summary, write_json, write_summary_csv
from .selfcomp import analyze as analyze_labels
from .symexec import MODES

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTERNAL = 2

USAGE_ERRORS = (SourceSyntaxError, BoundError, UnsupportedFeature, MissingExpectation)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Reports usage errors as exit code 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_json(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", nargs="?", const="-", default=None, metavar="PATH",
                   help="write the machine report as JSON (stdout when PATH is omitted)")


def _add_learning(p: argparse.ArgumentParser, default: Optional[bool]) -> None:
    p.add_argument("--learning", action=argparse.BooleanOptionalAction, default=default,
                   help="1-UIP clause learning in the SAT engine (--no-learning: plain chronological DPLL)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="leakcount", description="Quantitative information flow and bounded model checking.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("capacity", help="exact channel capacity of a program")
    p.add_argument("file")
    p.add_argument("--bound", type=int, default=settings.DEFAULT_BOUND, help="loop unwinding bound")
    p.add_argument("--route", choices=ROUTES, default=settings.DEFAULT_ROUTE)
    p.add_argument("--algorithm", "--alg", choices=ALGORITHMS, default=settings.DEFAULT_ALGORITHM)
    p.add_argument("--policy", type=int, default=None, metavar="K", help="stop once 2^K outputs show that at least K bits leak")
    p.add_argument("--outputs", action="store_true", help="list the feasible outputs")
    _add_learning(p, settings.ANALYSIS_LEARNING)
    _add_json(p)

    p = sub.add_parser("label", help="path labels and capacity upper bound by self-composition")
    p.add_argument("file")
    p.add_argument("--bound", type=int, default=settings.DEFAULT_BOUND, help="branch decisions per path")
    p.add_argument("--mode", choices=MODES, default="classical")
    p.add_argument("--workers", type=int, default=settings.DEFAULT_WORKERS)
    p.add_argument("--no-opt", action="store_true", help="solve every DF/IF check")
    _add_learning(p, settings.ANALYSIS_LEARNING)
    _add_json(p)

    p = sub.add_parser("bmc", help="bounded model checking of assertions")
    p.add_argument("file")
    p.add_argument("--bound", type=int, default=settings.DEFAULT_BOUND)
    p.add_argument("--workers", type=int, default=settings.DEFAULT_WORKERS)
    p.add_argument("--batch", type=int, default=settings.DEFAULT_BATCH_SIZE, help="disjuncts per batch")
    p.add_argument("--all", action="store_true", help="one counterexample per violating disjunct")
    p.add_argument("--max-cex", type=int, default=None, help="stop after this many counterexamples")
    p.add_argument("--sequential", action="store_true", help="solve the whole disjunction at once")
    p.add_argument("--classes", action="store_true", help="enumerate error-trace classes by All-SMT")
    p.add_argument("--gen-tests", action="store_true", help="path-covering test inputs")
    p.add_argument("--symbolic", action="store_true", help="with --gen-tests: use solver-free symbolic execution")
    p.add_argument("--reliability", action="store_true", help="probability of running without a failure")
    _add_learning(p, settings.ANALYSIS_LEARNING)
    _add_json(p)

    p = sub.add_parser("allsat", help="run check-allsat on a script, or on the encoding of a program")
    p.add_argument("file")
    p.add_argument("--algorithm", "--alg", choices=ALGORITHMS, default=settings.DEFAULT_ALGORITHM)
    p.add_argument("--bound", type=int, default=settings.DEFAULT_BOUND, help="unwinding bound for .gcl files")
    p.add_argument("--emit", action="store_true", help="print the SMT-LIB encoding of a .gcl file and stop")
    _add_learning(p, None)

    p = sub.add_parser("solve", help="run an SMT-LIB script")
    p.add_argument("file")
    _add_learning(p, settings.SAT_LEARNING)

    p = sub.add_parser("corpus", help="check every program of a directory against its .expect file")
    p.add_argument("directory")
    p.add_argument("--csv", default=None, metavar="PATH", help="write the summary table as CSV")
    p.add_argument("--skip-slow", action="store_true")
    _add_json(p)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=settings.LOG_FORMAT, stream=sys.stderr, force=True)


def _emit(lines: Sequence[str]) -> None:
    for line in lines:
        print(line)


def cmd_capacity(args) -> int:
    q = QifQuery(load_program(args.file), args.bound, args.policy, args.route, args.algorithm,
                 want_outputs=args.outputs or args.json is not None,
                 learning=args.learning)
    report = analyze_capacity(q)
    if args.json is not None:
        write_json(report.to_json(), args.json)
        if args.json == "-":
            return EXIT_OK
    print(format_capacity(report))
    if args.outputs:
        print("outputs: " + " ".join(str(o) for o in report.outputs))
    return EXIT_OK


def cmd_label(args) -> int:
    report = analyze_labels(load_program(args.file), args.bound, args.mode, args.workers, not args.no_opt,
                            args.learning)
    if args.json is not None:
        write_json(report.to_json(), args.json)
        if args.json == "-":
            return EXIT_OK
    _emit(format_labels(report))
    return EXIT_OK


def cmd_bmc(args) -> int:
    program = load_program(args.file)
    cfg = BmcConfig(args.bound, args.workers, args.batch, not args.all, args.max_cex, args.learning)
    if args.gen_tests:
        tests = generate_tests_symbolic(program, cfg) if args.symbolic else generate_tests(program, cfg)
        if args.json is not None:
            write_json({"program": program.name, "tests": tests}, args.json)
            if args.json == "-":
                return EXIT_OK
        _emit(" ".join(f"{k}={v}" for k, v in t.items()) or "(no inputs)" for t in tests)
        print(f"{len(tests)} tests")
        return EXIT_OK
    if args.reliability:
        r = reliability(program, cfg)
        if args.json is not None:
            write_json(r.to_json(), args.json)
            if args.json == "-":
                return EXIT_OK
        print(f"reliability={r.reliability:.6f} (T={r.true_inputs} F={r.false_inputs} G={r.grey_inputs})")
        return EXIT_OK
    if args.classes:
        result = enumerate_counterexamples(program, cfg)
    elif args.sequential:
        result = check_sequential(program, cfg)
    else:
        result = check_concurrent(program, cfg)
    if args.json is not None:
        write_json(result.to_json(), args.json)
        if args.json == "-":
            return EXIT_OK
    _emit(format_bmc(result))
    return EXIT_OK


def cmd_allsat(args) -> int:
    path = Path(args.file)
    if path.suffix == ".gcl":
        _, f = prepare(load_program(path), args.bound, {})
        text = emit_smt(f)
        if args.emit:
            print(text)
            return EXIT_OK
        learning = settings.ANALYSIS_LEARNING if args.learning is None else args.learning
    else:
        text = path.read_text(encoding="utf-8")
        learning = settings.SAT_LEARNING if args.learning is None else args.learning
    _emit(run_script(text, args.algorithm, learning=learning))
    return EXIT_OK


def cmd_solve(args) -> int:
    text = Path(args.file).read_text(encoding="utf-8")
    _emit(run_script(text, learning=args.learning))
    return EXIT_OK


def cmd_corpus(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise UsageError(f"not a directory: {directory}")
    rows = run_corpus(directory, include_slow=not args.skip_slow)
    if args.csv:
        write_summary_csv(args.csv, rows)
    if args.json is not None:
        write_json(rows, args.json)
    if args.json != "-":
        _emit(format_summary(rows))
    return EXIT_OK if all(r["Status"] == "pass" for r in rows) else EXIT_USAGE


COMMANDS = {
    "capacity": cmd_capacity,
    "label": cmd_label,
    "bmc": cmd_bmc,
    "allsat": cmd_allsat,
    "solve": cmd_solve,
    "corpus": cmd_corpus,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command-line entry point.

    Parameters:
    ----------
    :param argv: Optional[List[str]]
        Arguments without the program name; None reads `sys.argv`.

    Return value:
    -------------
    :return: int
        0 when the analysis completed (findings such as "violated" included),
        1 for usage, source or expectation errors and corpus mismatches,
        2 for internal errors.

    Example usage:
    --------------
    >>> main(["capacity", "corpus/sanitize.gcl", "--bound", "1"])
    N=16 capacity=4.000 bits
    0
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    _configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"leakcount: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SourceSyntaxError as exc:
        print(exc.diagnostic(), file=sys.stderr)
        return EXIT_USAGE
    except USAGE_ERRORS as exc:
        print(f"leakcount: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"leakcount: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InternalError as exc:
        logger.exception("internal error")
        print(f"leakcount: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except LeakcountError as exc:
        print(f"leakcount: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        logger.exception("unexpected failure")
        print(f"leakcount: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
