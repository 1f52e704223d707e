# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import enum
import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from . import logic_terms as lt
from . import settings
from .errors import BoundError
from .gcl_ast import Assert, Assign, Assume, If, SourceProgram, Stmt, While
from .gcl_interp import DEFAULT_FUEL
from .gcl_lower import lower
from .gcl_unroll import version_name
from .sat_solver import Solver

logger = logging.getLogger(__name__)

MODES = ("classical", "deferred")


class Verdict(enum.Enum):
    COMPLETED = "completed"
    ASSUME_VIOLATED = "assumeViolated"
    ASSERT_VIOLATED = "assertViolated"
    BOUND_HIT = "boundHit"


@dataclass(frozen=True)
class PathSummary:
    """
    One explored path.

    `assert_terms` are the violation disjuncts `pc ∧ ¬c` of the assertions
    first reached on the way to this leaf; `failing` is `pc ∧ ¬(c_1 ∧ ... ∧ c_n)`
    over every assertion on the path, or None when the path has none.
    """

    pc: lt.Term
    out: lt.Term
    verdict: Verdict
    assert_terms: Tuple[lt.Term, ...] = ()
    failing: Optional[lt.Term] = None
    depth: int = 0

    def to_json(self) -> dict:
        return {
            "pc": lt.format_term(self.pc),
            "out": lt.format_term(self.out),
            "verdict": self.verdict.value,
            "asserts": [lt.format_term(t) for t in self.assert_terms],
            "depth": self.depth,
        }


@dataclass
class SymState:
    """Pending path: condition, store over input symbols and the statements left to run."""

    pc: lt.Term
    sigma: Dict[str, lt.Term]
    work: Tuple[Stmt, ...]
    depth: int = 0
    conds: Tuple[lt.Term, ...] = ()
    frames: int = 0
    literal: Optional[lt.Term] = None
    fuel: int = DEFAULT_FUEL


def initial_store(p: SourceProgram) -> Dict[str, lt.Term]:
    """Inputs map to their version-0 symbols, locals and the output to 0."""
    sigma = {}
    for d in p.decls:
        if d.kind.is_input:
            sigma[d.name] = lt.bv_var(version_name(d.name, 0), d.width)
        else:
            sigma[d.name] = lt.const(0, d.width)
    return sigma


def input_symbols(p: SourceProgram) -> List[lt.Term]:
    return [lt.bv_var(version_name(d.name, 0), d.width) for d in p.inputs]


class _Explorer:

    def __init__(self, p: SourceProgram, bound: int, mode: str, learning: bool):
        self.p = p
        self.bound = bound
        self.classical = mode == "classical"
        self.solver = Solver(learning, priority=input_symbols(p)) if self.classical else None
        self.pending: List[lt.Term] = []
        self.stack: List[SymState] = []

    def leaf(self, state: SymState, verdict: Verdict) -> PathSummary:
        failing = None
        if state.conds:
            failing = lt.mk_and(state.pc, lt.mk_not(lt.mk_and(*state.conds)))
            if failing is lt.FALSE:
                failing = None
        if verdict is Verdict.COMPLETED and failing is not None:
            verdict = Verdict.ASSERT_VIOLATED
            if self.classical and not self.feasible(state, failing):
                verdict = Verdict.COMPLETED
        summary = PathSummary(
            state.pc,
            state.sigma[self.p.output.name],
            verdict,
            tuple(self.pending),
            failing,
            state.depth,
        )
        self.pending = []
        return summary

    def feasible(self, state: SymState, extra: lt.Term) -> bool:
        self.solver.push()
        self.solver.assert_term(extra)
        ok = bool(self.solver.check())
        self.solver.pop()
        return ok

    def activate(self, state: SymState) -> bool:
        """Brings the solver to the state's path and adds its branch literal; False if infeasible."""
        if state.literal is None:
            return True
        lit = state.literal
        state.literal = None
        state.pc = lt.mk_and(state.pc, lit)
        if state.pc is lt.FALSE:
            return False
        if not self.classical:
            return True
        self.solver.pop(self.solver.depth - state.frames)
        self.solver.push()
        self.solver.assert_term(lit)
        state.frames += 1
        return bool(self.solver.check())

    def branch(self, state: SymState, cond: lt.Term, then: Tuple[Stmt, ...], other: Tuple[Stmt, ...]) -> None:
        depth = state.depth if cond.op in ("true", "false") else state.depth + 1
        children = []
        if cond is not lt.TRUE:
            children.append(SymState(state.pc, dict(state.sigma), other, depth, state.conds, state.frames,
                                     lt.mk_not(cond), state.fuel))
        if cond is not lt.FALSE:
            children.append(SymState(state.pc, dict(state.sigma), then, depth, state.conds, state.frames,
                                     cond, state.fuel))
        # then-branch on top of the stack: explored first
        self.stack.extend(children)

    def run(self, state: SymState) -> Optional[PathSummary]:
        """Executes straight-line statements until a leaf (returned) or a branch point (None)."""
        sigma = state.sigma
        while state.work:
            s, state.work = state.work[0], state.work[1:]
            if isinstance(s, Assign):
                sigma[s.target] = lower(s.value, sigma)
            elif isinstance(s, Assume):
                c = lower(s.cond, sigma)
                pc = lt.mk_and(state.pc, c)
                if pc is lt.FALSE:
                    state.pc = pc
                    return self.leaf(state, Verdict.ASSUME_VIOLATED)
                if self.classical and c is not lt.TRUE:
                    self.solver.pop(self.solver.depth - state.frames)
                    self.solver.push()
                    self.solver.assert_term(c)
                    state.frames += 1
                    state.pc = pc
                    if not self.solver.check():
                        return self.leaf(state, Verdict.ASSUME_VIOLATED)
                state.pc = pc
            elif isinstance(s, Assert):
                c = lower(s.cond, sigma)
                if c is lt.TRUE:
                    continue
                violation = lt.mk_and(state.pc, lt.mk_not(c))
                if violation is not lt.FALSE:
                    self.pending.append(violation)
                state.conds = state.conds + (c,)
            elif isinstance(s, (If, While)):
                c = lower(s.cond, sigma)
                symbolic = c.op not in ("true", "false")
                if isinstance(s, While) and not symbolic:
                    state.fuel -= 1
                if (symbolic and state.depth >= self.bound) or state.fuel < 0:
                    return self.leaf(state, Verdict.BOUND_HIT)
                if isinstance(s, If):
                    self.branch(state, c, s.then + state.work, s.other + state.work)
                else:
                    self.branch(state, c, s.body + (s,) + state.work, state.work)
                return None
            else:
                raise TypeError(f"not a statement: {s!r}")
        return self.leaf(state, Verdict.COMPLETED)


def iter_summaries(p: SourceProgram, bound: int, mode: str = "deferred",
                   stop: Optional[threading.Event] = None,
                   learning: bool = settings.ANALYSIS_LEARNING) -> Iterator[PathSummary]:
    """
    Explores the program depth-first and yields one `PathSummary` per leaf.

    Parameters:
    ----------
    :param p: SourceProgram
        Typed program.
    :param bound: int
        Maximum number of branch decisions on a path. Conditions that fold to a
        constant are not decisions; a path that needs one more decision ends
        with verdict `boundHit`.
    :param mode: str
        "classical" checks the path condition with the SAT engine at every
        branch and assume; "deferred" never solves and keeps every
        syntactically possible path.
    :param stop: Optional[threading.Event]
        Exploration ends once the event is set.
    :param learning: bool
        SAT engine mode of the classical feasibility checks.

    Description:
    ------------
    The then-side of a branch is explored before the else-side. Failed
    assertions do not end a path.

    Possible errors:
    ----------------
    - `BoundError`: bound below 1 or unknown mode.
    """
    if bound < 1:
        raise BoundError(f"symbolic execution bound must be at least 1, got {bound}")
    if mode not in MODES:
        raise BoundError(f"unknown symbolic execution mode '{mode}', expected one of {MODES}")
    explorer = _Explorer(p, bound, mode, learning)
    explorer.stack.append(SymState(lt.TRUE, initial_store(p), p.body))
    leaves = 0
    while explorer.stack:
        if stop is not None and stop.is_set():
            logger.debug("symbolic execution of %s stopped after %d leaves", p.name, leaves)
            return
        state = explorer.stack.pop()
        if not explorer.activate(state):
            continue
        summary = explorer.run(state)
        if summary is not None:
            leaves += 1
            if summary.verdict is Verdict.BOUND_HIT:
                logger.info("path %d of %s cut at %d branch decisions", leaves, p.name, state.depth)
            yield summary
    logger.debug("symbolic execution of %s (%s, bound %d): %d leaves", p.name, mode, bound, leaves)


def execute(p: SourceProgram, bound: int, mode: str = "deferred",
            learning: bool = settings.ANALYSIS_LEARNING) -> List[PathSummary]:
    """
    All path summaries of a bounded symbolic execution.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> prog = parse("high int32 H; local int32 L; output int32 O; L = 8; "
    ...              "if (H < 16) O = H + L; else O = L;")
    >>> [s.verdict.value for s in execute(prog, 1, "classical")]
    ['completed', 'completed']
    """
    return list(iter_summaries(p, bound, mode, learning=learning))


def bmc_formula(summaries: List[PathSummary]) -> List[lt.Term]:
    """Violation disjuncts in exploration order; empty means no assertion can fail within the bound."""
    return [t for s in summaries for t in s.assert_terms]


def summaries_to_json(summaries: List[PathSummary]) -> List[dict]:
    return [s.to_json() for s in summaries]
