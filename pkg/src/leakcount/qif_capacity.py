# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import enum
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import logic_terms as lt
from . import settings
from .allsmt import ALGORITHMS, enumerate_models
from .errors import BoundError
from .gcl_ast import SourceProgram
from .gcl_unroll import SsaProgram, unroll
from .logic_encode import InstrumentedFormula, encode, instrument
from .sat_solver import Model, Solver

logger = logging.getLogger(__name__)

ROUTES = ("formula", "symcount")


class QifVerdict(enum.Enum):
    EXACT = "exact"
    INSECURE_AT_POLICY = "insecureAtPolicy"


@dataclass
class QifQuery:
    program: SourceProgram
    bound: int = settings.DEFAULT_BOUND
    policy: Optional[int] = None
    route: str = settings.DEFAULT_ROUTE
    algorithm: str = settings.DEFAULT_ALGORITHM
    want_outputs: bool = True
    learning: bool = settings.ANALYSIS_LEARNING

    def validate(self) -> None:
        if self.policy is not None and self.policy < 0:
            raise BoundError(f"policy must be a non-negative number of bits, got {self.policy}")
        if self.route not in ROUTES:
            raise BoundError(f"unknown route '{self.route}', expected one of {ROUTES}")
        if self.algorithm not in ALGORITHMS:
            raise BoundError(f"unknown algorithm '{self.algorithm}', expected one of {ALGORITHMS}")

    @property
    def limit(self) -> Optional[int]:
        return None if self.policy is None else 1 << self.policy


@dataclass
class QifReport:
    program: str
    N: int
    verdict: QifVerdict
    route: str
    bound: int
    policy: Optional[int] = None
    algorithm: Optional[str] = None
    outputs: Optional[List[int]] = None
    timings: Dict[str, float] = field(default_factory=dict)
    checks: int = 0

    @property
    def capacity(self) -> float:
        return math.log2(self.N) if self.N > 0 else 0.0

    def to_json(self) -> dict:
        return {
            "program": self.program,
            "N": self.N,
            "capacity": round(self.capacity, settings.CAPACITY_DECIMALS),
            "verdict": self.verdict.value,
            "route": self.route,
            "algorithm": self.algorithm,
            "bound": self.bound,
            "policy": self.policy,
            "outputs": self.outputs,
            "timings": {k: round(v, 6) for k, v in self.timings.items()},
            "checks": self.checks,
        }


def prepare(p: SourceProgram, bound: int, timings: Dict[str, float]) -> Tuple[SsaProgram, InstrumentedFormula]:
    """Unrolls, encodes and instruments a program, recording the phase times."""
    start = time.perf_counter()
    ssa = unroll(p, bound)
    timings["unroll"] = time.perf_counter() - start
    start = time.perf_counter()
    f = instrument(encode(ssa), ssa.output_final)
    timings["encode"] = time.perf_counter() - start
    return ssa, f


def _input_priority(ssa: SsaProgram, f: InstrumentedFormula) -> List[lt.Term]:
    support = lt.free_vars(f.formula)
    return [v for v in ssa.input_versions.values() if v in support]


def _finish(report: QifReport) -> QifReport:
    if report.N == 0:
        logger.warning("%s: no feasible execution within bound %d, capacity reported as 0", report.program, report.bound)
    logger.info("%s: N=%d capacity=%.3f bits (%s, %s)", report.program, report.N, report.capacity,
                report.route, report.verdict.value)
    return report


def capacity_formula(q: QifQuery) -> QifReport:
    """
    Channel capacity by counting the output-bit projections of the encoded program.

    Parameters:
    ----------
    :param q: QifQuery
        Program, unwinding bound, optional policy k and enumeration algorithm.

    Return value:
    -------------
    :return: QifReport
        N distinct feasible outputs, capacity log2(N) and, when requested, the
        outputs themselves. With a policy, counting stops at 2^k outputs and the
        verdict is `insecureAtPolicy`.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> prog = parse("high int32 H; local int32 L; output int32 O; L = 8; "
    ...              "if (H < 16) O = H + L; else O = L;")
    >>> capacity_formula(QifQuery(prog)).N
    16
    """
    q.validate()
    timings: Dict[str, float] = {}
    ssa, f = prepare(q.program, q.bound, timings)
    start = time.perf_counter()
    result = enumerate_models(
        f.formula,
        f.important,
        (),
        q.algorithm,
        limit=q.limit,
        store=q.want_outputs,
        learning=q.learning,
        priority=_input_priority(ssa, f),
    )
    timings["count"] = time.perf_counter() - start
    outputs = sorted(f.output_value(m.key) for m in result.models) if q.want_outputs else None
    verdict = QifVerdict.INSECURE_AT_POLICY if result.limit_reached else QifVerdict.EXACT
    report = QifReport(q.program.name, result.count, verdict, "formula", q.bound, q.policy, q.algorithm,
                       outputs, timings, result.checks)
    return _finish(report)


def early_pruning(f: InstrumentedFormula, solver: Optional[Solver] = None) -> Dict[str, Tuple[bool, bool]]:
    """
    Feasibility of each important bit in each polarity against the whole formula.

    Returns `{p: (p feasible, ¬p feasible)}`. A bit that can never be 1 (or 0)
    lets the counting search skip that branch without a solver call.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> prog = parse("output int8 O; O = 3;")
    >>> _, f = prepare(prog, 1, {})
    >>> [pos for pos, _ in early_pruning(f).values()]
    [True, True, False, False, False, False, False, False]
    """
    if solver is None:
        solver = Solver()
        solver.assert_term(f.formula)
    out = {}
    for p in f.important_vars:
        polarity = []
        for lit in (p, lt.mk_not(p)):
            solver.push()
            solver.assert_term(lit)
            polarity.append(bool(solver.check()))
            solver.pop()
        out[p.name] = (polarity[0], polarity[1])
    return out


def sym_count(q: QifQuery) -> QifReport:
    """
    Channel capacity by the bit-wise depth-first output search.

    Description:
    ------------
    Output bits are fixed from the least significant one, positive polarity
    first. A branch is explored only when the pruning table allows it and the
    formula conjoined with the fixed bits is satisfiable; each satisfiable
    assignment of all bits is one output. The pruning table is a feasibility
    cache and is never counted.
    """
    q.validate()
    timings: Dict[str, float] = {}
    ssa, f = prepare(q.program, q.bound, timings)
    solver = Solver(q.learning, priority=_input_priority(ssa, f) + f.important_vars)
    solver.assert_term(f.formula)
    checks = 1
    start = time.perf_counter()
    feasible = bool(solver.check())
    root = solver.model() if feasible else None
    prune = early_pruning(f, solver) if feasible else {}
    checks += 2 * len(prune)
    timings["prune"] = time.perf_counter() - start
    important = f.important_vars
    limit = q.limit
    found: List[int] = []
    count = 0
    stopped = False

    def visit(depth: int, witness: Model, bits: Tuple[bool, ...]) -> bool:
        nonlocal count, checks
        if depth == len(important):
            count += 1
            if q.want_outputs:
                found.append(f.output_value(bits))
            return limit is not None and count >= limit
        p = important[depth]
        allowed = prune[p.name]
        for value, ok in ((True, allowed[0]), (False, allowed[1])):
            if not ok:
                continue
            solver.push()
            solver.assert_term(p if value else lt.mk_not(p))
            if bool(witness.value(p)) == value:
                nxt = witness
            else:
                checks += 1
                nxt = solver.model() if solver.check() else None
            stop = nxt is not None and visit(depth + 1, nxt, bits + (value,))
            solver.pop()
            if stop:
                return True
        return False

    start = time.perf_counter()
    if root is not None:
        stopped = visit(0, root, ())
    timings["count"] = time.perf_counter() - start
    verdict = QifVerdict.INSECURE_AT_POLICY if stopped else QifVerdict.EXACT
    report = QifReport(q.program.name, count, verdict, "symcount", q.bound, q.policy, None,
                       sorted(found) if q.want_outputs else None, timings, checks)
    return _finish(report)


def analyze(q: QifQuery) -> QifReport:
    """Runs the route selected by the query."""
    if q.route == "symcount":
        return sym_count(q)
    return capacity_formula(q)
