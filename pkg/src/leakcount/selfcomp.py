# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import enum
import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import logic_terms as lt
from . import settings
from .allsmt import all_dfs
from .errors import DomainTooLarge
from .gcl_ast import SourceProgram, VarKind
from .gcl_unroll import version_name
from .sat_solver import Solver
from .symexec import PathSummary, Verdict, execute, input_symbols

logger = logging.getLogger(__name__)

COPY_SUFFIX = "!1"


class Label(enum.Enum):
    CLEAN = "clean"
    INDIRECT = "indirect"
    DIRECT = "direct"

    @property
    def rank(self) -> int:
        return _RANK[self]

    def join(self, other: "Label") -> "Label":
        return self if self.rank >= other.rank else other


_RANK = {Label.CLEAN: 0, Label.INDIRECT: 1, Label.DIRECT: 2}


@dataclass
class LabeledPath:
    summary: PathSummary
    label: Label = Label.CLEAN
    in_count: Optional[int] = None
    witness: Optional[Dict[str, int]] = None

    def to_json(self) -> dict:
        data = self.summary.to_json()
        data["label"] = self.label.value
        data["inCount"] = self.in_count
        data["witness"] = self.witness
        return data


@dataclass
class BoundReport:
    n_clean: int
    n_indirect: int
    sum_direct: int

    @property
    def clean_term(self) -> int:
        return 1 if self.n_clean > 0 else 0

    @property
    def total(self) -> int:
        return self.clean_term + self.n_indirect + self.sum_direct

    @property
    def upper_bound_bits(self) -> float:
        return math.log2(self.total) if self.total > 0 else 0.0

    def to_json(self) -> dict:
        return {
            "nClean": self.n_clean,
            "nIndirect": self.n_indirect,
            "sumDirectInputs": self.sum_direct,
            "upperBoundBits": round(self.upper_bound_bits, settings.CAPACITY_DECIMALS),
        }


@dataclass
class LabelStats:
    df_checks: int = 0
    if_checks: int = 0
    skipped_df: int = 0
    skipped_if: int = 0
    count_checks: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def solver_calls(self) -> int:
        return self.df_checks + self.if_checks + self.count_checks

    def to_json(self) -> dict:
        return {
            "dfChecks": self.df_checks,
            "ifChecks": self.if_checks,
            "skippedDf": self.skipped_df,
            "skippedIf": self.skipped_if,
            "countChecks": self.count_checks,
        }


# Self-composition

def copy_renaming(p: SourceProgram) -> Dict[str, lt.Term]:
    """
    Maps each high and nondet input symbol α to its copy α_1; low inputs stay shared.

    Nondet inputs are not observed, so the two runs may draw different values.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> prog = parse("high int8 h; low int8 l; nondet bool c; output int8 O; O = h + l;")
    >>> sorted(v.name for v in copy_renaming(prog).values())
    ['c_0!1', 'h_0!1']
    """
    renaming = {}
    for d in p.decls:
        if d.kind not in (VarKind.HIGH, VarKind.NONDET):
            continue
        name = version_name(d.name, 0)
        renaming[name] = lt.bv_var(name + COPY_SUFFIX, d.width)
    return renaming


def df_violation(s: PathSummary, renaming: Mapping[str, lt.Term]) -> lt.Term:
    """
    Direct-flow check of one path: both copies take the path and disagree on the output.

    Example usage:
    --------------
    >>> h = lt.bv_var("H_0", 8)
    >>> s = PathSummary(lt.mk_bvult(h, lt.const(16, 8)), h, Verdict.COMPLETED)
    >>> sorted(lt.free_var_names(df_violation(s, {"H_0": lt.bv_var("H_0!1", 8)})))
    ['H_0', 'H_0!1']
    """
    return lt.mk_and(
        s.pc,
        lt.substitute(s.pc, renaming),
        lt.mk_not(lt.mk_eq(s.out, lt.substitute(s.out, renaming))),
    )


def if_violation(si: PathSummary, sj: PathSummary, renaming: Mapping[str, lt.Term]) -> lt.Term:
    """Implicit-flow check of a path pair: the copies take different paths and disagree on the output."""
    return lt.mk_and(
        si.pc,
        lt.substitute(sj.pc, renaming),
        lt.mk_not(lt.mk_eq(si.out, lt.substitute(sj.out, renaming))),
    )


def _mentions(t: lt.Term, names) -> bool:
    return bool(lt.free_var_names(t) & names)


def _solve(phi: lt.Term, watch: Sequence[lt.Term], learning: bool) -> Optional[Dict[str, int]]:
    if phi is lt.FALSE:
        return None
    solver = Solver(learning)
    solver.assert_term(phi)
    if not solver.check():
        return None
    model = solver.model()
    return {v.name: int(model.value(v)) for v in watch}


def _flipped_witness(s: PathSummary, renaming: Mapping[str, lt.Term], inputs: Sequence[lt.Term], learning: bool):
    """
    Cheap direct-flow witness for a path whose condition ignores the copied inputs.

    Takes one model of the path condition and flips every renamed input bit; a
    different output is a DF witness found with a single check.
    """
    witness = _solve(s.pc, inputs, learning)
    if witness is None:
        return None
    env = dict(witness)
    flipped = dict(witness)
    for name, copy in renaming.items():
        flipped[name] = ~env.get(name, 0) & ((1 << copy.width) - 1)
    if lt.evaluate(s.out, env) == lt.evaluate(s.out, flipped):
        return None
    result = dict(env)
    for name, copy in renaming.items():
        result[copy.name] = flipped[name]
    return result


def count_inputs(pc: lt.Term, inputs: Sequence[lt.Term], max_bits: Optional[int] = None,
                 stats: Optional[LabelStats] = None, learning: bool = settings.ANALYSIS_LEARNING) -> int:
    """
    Number of input valuations satisfying `pc`.

    Parameters:
    ----------
    :param pc: Term
        Path condition over the input symbols.
    :param inputs: Sequence[Term]
        The full input domain (bit-vector symbols).
    :param max_bits: Optional[int]
        Enumeration cap as log2 of the number of enumerated valuations;
        defaults to `settings.max_input_bits()`.

    Description:
    ------------
    The bits of the inputs that occur in `pc` are counted by #SMT with every
    bit as an important variable; inputs that do not occur multiply the count
    by 2^width.

    Example usage:
    --------------
    >>> a = lt.bv_var("a", 32)
    >>> count_inputs(lt.mk_bvult(a, lt.const(16, 32)), [a])
    16

    Possible errors:
    ----------------
    - `DomainTooLarge`: more than 2^max_bits valuations of the occurring inputs satisfy `pc`.
    """
    cap = settings.max_input_bits() if max_bits is None else max_bits
    support = lt.free_vars(pc)
    multiplier = 1
    constrained = []
    for v in inputs:
        if v in support:
            constrained.append(v)
        else:
            multiplier <<= v.width
    if pc is lt.FALSE:
        return 0
    if not constrained:
        return multiplier
    bits = []
    bindings = []
    for v in constrained:
        for i in range(v.width):
            b = lt.bool_var(f"{v.name}!bit{i}")
            bits.append(b)
            bindings.append(lt.mk_eq(b, lt.mk_eq(lt.mk_extract(i, i, v), lt.const(1, 1))))
    result = all_dfs(lt.mk_and(pc, *bindings), bits, limit=(1 << cap) + 1, store=False, priority=bits,
                     learning=learning)
    if stats is not None:
        with stats.lock:
            stats.count_checks += result.checks
    if result.limit_reached:
        raise DomainTooLarge(f"more than 2^{cap} input valuations satisfy {lt.format_term(pc)[:80]}")
    return result.count * multiplier


def label_paths(summaries: Sequence[PathSummary], p: SourceProgram, workers: int = settings.DEFAULT_WORKERS,
                optimize: bool = True, stats: Optional[LabelStats] = None,
                learning: bool = settings.ANALYSIS_LEARNING) -> List[LabeledPath]:
    """
    Labels every executable path clean, indirect or direct.

    Parameters:
    ----------
    :param summaries: Sequence[PathSummary]
        Paths of one symbolic execution; assume-violated paths are dropped.
    :param p: SourceProgram
        The program, for its high and input declarations.
    :param workers: int
        Threads for the pairwise implicit-flow checks.
    :param optimize: bool
        Skip checks whose answer follows from where the high and nondet inputs occur.
    :param learning: bool
        SAT engine mode for the flow checks and input counts.

    Description:
    ------------
    - Phase 1: a path whose direct-flow check is satisfiable is direct.
    - Phase 2: every pair of paths whose implicit-flow check is satisfiable
      marks its still-clean members indirect.
    - Paths cut by the bound are direct; direct paths get their input count.
    - Without high or nondet symbols in any path everything is clean and nothing is
      solved. A path whose condition has none of them cannot take part in
      an implicit flow, and one whose output has none cannot leak directly.
    """
    stats = stats if stats is not None else LabelStats()
    renaming = copy_renaming(p)
    copied = frozenset(renaming)
    inputs = input_symbols(p)
    watch = inputs + list(renaming.values())
    paths = [LabeledPath(s) for s in summaries if s.verdict is not Verdict.ASSUME_VIOLATED]
    if optimize and not any(_mentions(lp.summary.pc, copied) or _mentions(lp.summary.out, copied) for lp in paths):
        for lp in paths:
            if lp.summary.verdict is Verdict.BOUND_HIT:
                lp.label = Label.DIRECT
        stats.skipped_df += len(paths)
        logger.info("%s: no path mentions a high or nondet input, all paths clean", p.name)
    else:
        for lp in paths:
            s = lp.summary
            if s.verdict is Verdict.BOUND_HIT:
                lp.label = Label.DIRECT
                continue
            in_pc, in_out = _mentions(s.pc, copied), _mentions(s.out, copied)
            if optimize and not in_out:
                stats.skipped_df += 1
                continue
            if optimize and not in_pc:
                witness = _flipped_witness(s, renaming, inputs, learning)
                stats.df_checks += 1
                if witness is not None:
                    lp.label, lp.witness = Label.DIRECT, witness
                    continue
            stats.df_checks += 1
            witness = _solve(df_violation(s, renaming), watch, learning)
            if witness is not None:
                lp.label, lp.witness = Label.DIRECT, witness
        _label_indirect(paths, renaming, copied, watch, workers, optimize, stats, learning)
    for lp in paths:
        if lp.label is Label.DIRECT:
            lp.in_count = count_inputs(lp.summary.pc, inputs, stats=stats, learning=learning)
    return paths


def _label_indirect(paths: List[LabeledPath], renaming, copied, watch, workers: int, optimize: bool,
                    stats: LabelStats, learning: bool) -> None:
    candidates = [lp for lp in paths if lp.summary.verdict is not Verdict.BOUND_HIT]
    pairs: List[Tuple[int, int]] = []
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            a, b = candidates[i], candidates[j]
            if optimize:
                if a.label is not Label.CLEAN and b.label is not Label.CLEAN:
                    stats.skipped_if += 1
                    continue
                if not _mentions(a.summary.pc, copied) or not _mentions(b.summary.pc, copied):
                    stats.skipped_if += 1
                    continue
            pairs.append((i, j))

    def check(pair: Tuple[int, int]):
        i, j = pair
        phi = if_violation(candidates[i].summary, candidates[j].summary, renaming)
        with stats.lock:
            stats.if_checks += 1
        return pair, _solve(phi, watch, learning)

    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(check, pairs))
    else:
        results = [check(pair) for pair in pairs]
    for (i, j), witness in results:
        if witness is None:
            continue
        for lp in (candidates[i], candidates[j]):
            if lp.label is Label.CLEAN:
                lp.label = Label.INDIRECT
                lp.witness = witness


def qilura_bound(labeled: Sequence[LabeledPath]) -> BoundReport:
    """
    Upper bound on channel capacity from path labels.

    Every clean path together contributes one observation, each indirect path
    one, and each direct path the number of inputs that take it.

    Example usage:
    --------------
    >>> qilura_bound([]).upper_bound_bits
    0.0
    """
    n_clean = sum(1 for lp in labeled if lp.label is Label.CLEAN)
    n_indirect = sum(1 for lp in labeled if lp.label is Label.INDIRECT)
    sum_direct = sum(lp.in_count or 0 for lp in labeled if lp.label is Label.DIRECT)
    return BoundReport(n_clean, n_indirect, sum_direct)


@dataclass
class SelfCompReport:
    program: str
    bound: int
    mode: str
    paths: List[LabeledPath]
    report: BoundReport
    stats: LabelStats
    timings: Dict[str, float] = field(default_factory=dict)

    def label_counts(self) -> Dict[str, int]:
        counts = {label.value: 0 for label in Label}
        for lp in self.paths:
            counts[lp.label.value] += 1
        return counts

    def to_json(self) -> dict:
        return {
            "program": self.program,
            "bound": self.bound,
            "mode": self.mode,
            "labels": self.label_counts(),
            "paths": [lp.to_json() for lp in self.paths],
            "bound_report": self.report.to_json(),
            "stats": self.stats.to_json(),
            "timings": {k: round(v, 6) for k, v in self.timings.items()},
        }


def analyze(p: SourceProgram, bound: int, mode: str = "classical", workers: int = settings.DEFAULT_WORKERS,
            optimize: bool = True, learning: bool = settings.ANALYSIS_LEARNING) -> SelfCompReport:
    """
    Symbolic execution, path labelling and the capacity upper bound in one call.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> prog = parse("high int32 H; local int32 L; output int32 O; L = 8; "
    ...              "if (H < 16) O = H + L; else O = L;")
    >>> r = analyze(prog, 1)
    >>> [lp.label.value for lp in r.paths], round(r.report.upper_bound_bits, 3)
    (['direct', 'indirect'], 4.087)
    """
    timings = {}
    start = time.perf_counter()
    summaries = execute(p, bound, mode, learning)
    timings["symexec"] = time.perf_counter() - start
    start = time.perf_counter()
    stats = LabelStats()
    labeled = label_paths(summaries, p, workers, optimize, stats, learning)
    timings["label"] = time.perf_counter() - start
    report = qilura_bound(labeled)
    logger.info("%s: %s, bound %.3f bits", p.name, {lp.label.value for lp in labeled}, report.upper_bound_bits)
    return SelfCompReport(p.name, bound, mode, labeled, report, stats, timings)
