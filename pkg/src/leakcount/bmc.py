# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import dataclasses
import enum
import logging
import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from . import logic_terms as lt
from . import settings
from .allsmt import enumerate_models
from .errors import BoundError, InternalError
from .gcl_ast import Assert, BoolLit, SourceProgram
from .gcl_interp import Execution, interpret
from .gcl_unroll import unroll, version_name
from .logic_abstract import AbstractionMap
from .logic_encode import encode, encode_property
from .sat_solver import Model, Solver
from .selfcomp import count_inputs
from .symexec import Verdict, execute, input_symbols, iter_summaries

logger = logging.getLogger(__name__)


class BmcVerdict(enum.Enum):
    SAFE = "safe-up-to-bound"
    VIOLATED = "violated"


@dataclass
class BmcConfig:
    bound: int = settings.DEFAULT_BOUND
    workers: int = settings.DEFAULT_WORKERS
    batch_size: int = settings.DEFAULT_BATCH_SIZE
    stop_on_first: bool = True
    max_counterexamples: Optional[int] = None
    learning: bool = settings.ANALYSIS_LEARNING

    def validate(self) -> None:
        if self.bound < 1:
            raise BoundError(f"bound must be at least 1, got {self.bound}")
        if self.workers < 1:
            raise BoundError(f"worker count must be at least 1, got {self.workers}")
        if self.batch_size < 1:
            raise BoundError(f"batch size must be at least 1, got {self.batch_size}")
        if self.max_counterexamples is not None and self.max_counterexamples < 1:
            raise BoundError(f"counterexample limit must be at least 1, got {self.max_counterexamples}")


@dataclass
class Counterexample:
    """Input valuation reaching a failing assertion, with the disjunct (or trace class) it satisfies."""

    inputs: Dict[str, int]
    disjunct: Optional[int] = None
    batch: Optional[int] = None
    guards: Optional[Dict[str, bool]] = None

    def to_json(self) -> dict:
        data = {"inputs": dict(self.inputs)}
        if self.disjunct is not None:
            data["disjunct"] = self.disjunct
            data["batch"] = self.batch
        if self.guards is not None:
            data["guards"] = dict(self.guards)
        return data


@dataclass
class BmcResult:
    program: str
    verdict: BmcVerdict
    counterexamples: List[Counterexample] = field(default_factory=list)
    paths: int = 0
    disjuncts: int = 0
    batches: int = 0
    elapsed: float = 0.0
    method: str = "concurrent"

    def to_json(self) -> dict:
        return {
            "program": self.program,
            "verdict": self.verdict.value,
            "method": self.method,
            "counterexamples": [c.to_json() for c in self.counterexamples],
            "stats": {
                "paths": self.paths,
                "disjuncts": self.disjuncts,
                "batches": self.batches,
                "elapsed": round(self.elapsed, 6),
            },
        }


def _inputs_of(p: SourceProgram, model: Model) -> Dict[str, int]:
    return {d.name: int(model.value(lt.bv_var(version_name(d.name, 0), d.width))) for d in p.inputs}


class _Sink:
    """Append-only result store shared by the workers."""

    def __init__(self, limit: Optional[int], stop: threading.Event, stop_on_first: bool):
        self.lock = threading.Lock()
        self.items: List[Counterexample] = []
        self.errors: List[InternalError] = []
        self.batches = 0
        self.limit = limit
        self.stop = stop
        self.stop_on_first = stop_on_first

    def add(self, cex: Counterexample) -> None:
        with self.lock:
            self.items.append(cex)
            full = self.limit is not None and len(self.items) >= self.limit
        if self.stop_on_first or full:
            self.stop.set()

    def fail(self, error: InternalError) -> None:
        with self.lock:
            self.errors.append(error)
        self.stop.set()


def solve_batch(p: SourceProgram, batch_id: int, offset: int, terms: Sequence[lt.Term], sink: _Sink,
                learning: bool = settings.ANALYSIS_LEARNING) -> None:
    """
    Solves the disjunction of one batch.

    Every satisfied disjunct found yields one counterexample and is dropped
    from the disjunction, until the remaining ones are UNSAT or the run is
    stopped. Disjuncts whose models overlap a reported one stay reachable.
    """
    solver = Solver(learning, priority=input_symbols(p))
    open_terms = dict(enumerate(terms))
    with sink.lock:
        sink.batches += 1
    while open_terms and not sink.stop.is_set():
        solver.push()
        solver.assert_term(lt.mk_or(*open_terms.values()))
        model = solver.model() if solver.check() else None
        solver.pop()
        if model is None:
            break
        index = next((k for k, t in open_terms.items() if model.eval(t)), None)
        if index is None:
            raise InternalError("model satisfies none of the open disjuncts", batch_id)
        logger.debug("batch %d: disjunct %d violated", batch_id, offset + index)
        sink.add(Counterexample(_inputs_of(p, model), offset + index, batch_id))
        del open_terms[index]


def _worker(p: SourceProgram, batches: "queue.Queue", sink: _Sink, learning: bool) -> None:
    while True:
        item = batches.get()
        try:
            if item is None:
                return
            batch_id, offset, terms = item
            if sink.stop.is_set():
                continue
            try:
                solve_batch(p, batch_id, offset, terms, sink, learning)
            except InternalError as exc:
                sink.fail(exc)
            except Exception as exc:
                sink.fail(InternalError(f"{type(exc).__name__}: {exc}", batch_id))
        finally:
            batches.task_done()


def check_concurrent(p: SourceProgram, cfg: BmcConfig) -> BmcResult:
    """
    Concurrent bounded model checking.

    Parameters:
    ----------
    :param p: SourceProgram
        Program with assertions.
    :param cfg: BmcConfig
        Bound B, number of workers N, batch size D, early stop and counterexample limit.

    Return value:
    -------------
    :return: BmcResult
        `violated` with the counterexamples found, or `safe-up-to-bound`.

    Description:
    ------------
    The calling thread explores the program symbolically without solving and
    collects the violation disjunct of every assertion reached. Each D
    disjuncts become one batch, handed over a bounded queue to one of N worker
    threads; every worker solves its batch on a private solver. With
    `stop_on_first` the first satisfiable batch stops the exploration and the
    remaining batches are dropped unsolved.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> prog = parse("low int8 x; output int8 O; assert(x < 10);")
    >>> check_concurrent(prog, BmcConfig(workers=2)).verdict.value
    'violated'

    Possible errors:
    ----------------
    - `BoundError`: invalid configuration.
    - `InternalError`: a worker failed; carries the batch id.
    """
    cfg.validate()
    start = time.perf_counter()
    stop = threading.Event()
    sink = _Sink(cfg.max_counterexamples, stop, cfg.stop_on_first)
    batches: "queue.Queue" = queue.Queue(maxsize=cfg.workers)
    threads = [
        threading.Thread(target=_worker, args=(p, batches, sink, cfg.learning), name=f"bmc-worker-{i}", daemon=True)
        for i in range(cfg.workers)
    ]
    for t in threads:
        t.start()
    paths = disjuncts = dispatched = 0
    buffer: List[lt.Term] = []
    try:
        for summary in iter_summaries(p, cfg.bound, "deferred", stop):
            paths += 1
            buffer.extend(summary.assert_terms)
            while len(buffer) >= cfg.batch_size and not stop.is_set():
                batches.put((dispatched, disjuncts, buffer[:cfg.batch_size]))
                disjuncts += cfg.batch_size
                dispatched += 1
                buffer = buffer[cfg.batch_size:]
        if buffer and not stop.is_set():
            batches.put((dispatched, disjuncts, buffer))
            disjuncts += len(buffer)
            dispatched += 1
    finally:
        for _ in threads:
            batches.put(None)
        for t in threads:
            t.join()
    if sink.errors:
        raise sink.errors[0]
    items = sorted(sink.items, key=lambda c: c.disjunct)
    verdict = BmcVerdict.VIOLATED if items else BmcVerdict.SAFE
    result = BmcResult(p.name, verdict, items, paths, disjuncts, sink.batches, time.perf_counter() - start)
    logger.info("%s: %s (%d paths, %d disjuncts, %d batches solved, %d workers)", p.name, verdict.value,
                paths, disjuncts, sink.batches, cfg.workers)
    return result


def check_sequential(p: SourceProgram, cfg: BmcConfig) -> BmcResult:
    """Explores every path first, then solves the whole disjunction on one solver."""
    cfg.validate()
    start = time.perf_counter()
    summaries = execute(p, cfg.bound, "deferred")
    terms = [t for s in summaries for t in s.assert_terms]
    stop = threading.Event()
    sink = _Sink(cfg.max_counterexamples, stop, cfg.stop_on_first)
    if terms:
        solve_batch(p, 0, 0, terms, sink, cfg.learning)
    verdict = BmcVerdict.VIOLATED if sink.items else BmcVerdict.SAFE
    result = BmcResult(p.name, verdict, sink.items, len(summaries), len(terms), sink.batches,
                       time.perf_counter() - start, "sequential")
    logger.info("%s: %s (%d disjuncts, sequential)", p.name, verdict.value, len(terms))
    return result


def replay(p: SourceProgram, cex: Counterexample, bound: Optional[int] = None) -> Execution:
    """Runs a counterexample through the concrete interpreter."""
    return interpret(p, cex.inputs, loop_bound=bound)


# Error-trace enumeration

def enumerate_counterexamples(p: SourceProgram, cfg: BmcConfig, algorithm: str = settings.DEFAULT_ALGORITHM) -> BmcResult:
    """
    One counterexample per error-trace class.

    Description:
    ------------
    Encodes C ∧ ¬P over the unrolled program and runs All-SMT with the
    guards as important variables and the input versions as relevant ones.
    Each projected model is one class of traces reaching a failing assertion;
    the relevant values are its witness inputs.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> prog = parse("low int8 x; output int8 O; if (x < 3) O = 1; else O = 2; assert(O == 1);")
    >>> len(enumerate_counterexamples(prog, BmcConfig()).counterexamples)
    1
    """
    cfg.validate()
    start = time.perf_counter()
    ssa = unroll(p, cfg.bound)
    phi = lt.mk_and(encode(ssa), lt.mk_not(encode_property(ssa)))
    support = lt.free_vars(phi)
    guards = [g for g in ssa.guards if g in support]
    inputs = list(ssa.input_versions.values())
    result = enumerate_models(phi, guards, inputs, algorithm, limit=cfg.max_counterexamples,
                              learning=cfg.learning, priority=inputs, strict=False)
    names = {v.name: name for name, v in ssa.input_versions.items()}
    items = [
        Counterexample({names[k]: int(v) for k, v in m.relevant.items()}, guards=dict(m.important))
        for m in result.models
    ]
    verdict = BmcVerdict.VIOLATED if items else BmcVerdict.SAFE
    logger.info("%s: %d error-trace classes (%d checks)", p.name, len(items), result.checks)
    return BmcResult(p.name, verdict, items, len(items), 0, 0, time.perf_counter() - start, "allsmt")


def with_final_failure(p: SourceProgram) -> SourceProgram:
    """The program followed by an assertion every path reaches and fails."""
    return dataclasses.replace(p, body=p.body + (Assert(BoolLit(False)),))


def generate_tests(p: SourceProgram, cfg: BmcConfig, algorithm: str = settings.DEFAULT_ALGORITHM) -> List[Dict[str, int]]:
    """
    Path-covering test inputs, one per feasible path within the bound.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> prog = parse("low int8 x; output int8 O; if (x < 3) O = 1; else O = 2;")
    >>> len(generate_tests(prog, BmcConfig()))
    2
    """
    result = enumerate_counterexamples(with_final_failure(p), cfg, algorithm)
    return [c.inputs for c in result.counterexamples]


def generate_tests_symbolic(p: SourceProgram, cfg: BmcConfig,
                            algorithm: str = settings.DEFAULT_ALGORITHM) -> List[Dict[str, int]]:
    """
    Path-covering tests from a solver-free symbolic execution.

    Description:
    ------------
    The path conditions of the deferred exploration, infeasible ones
    included, are abstracted to one Boolean per path and their disjunction
    is enumerated with the path variables as important and the inputs as
    relevant variables. Infeasible paths have no model, so every result is
    a feasible path with its witness inputs.
    """
    cfg.validate()
    summaries = [s for s in execute(p, cfg.bound, "deferred") if s.verdict is not Verdict.ASSUME_VIOLATED]
    if not summaries:
        return []
    amap = AbstractionMap(frozenset(d.name for d in p.decls))
    selectors = [amap.abstract_atom(s.pc) for s in summaries]
    phi = lt.mk_and(lt.mk_or(*selectors), *amap.definitions())
    inputs = input_symbols(p)
    result = enumerate_models(phi, list(dict.fromkeys(selectors)), inputs, algorithm,
                              learning=cfg.learning, priority=inputs, strict=False)
    names = {v.name: d.name for v, d in zip(inputs, p.inputs)}
    logger.info("%s: %d of %d explored paths feasible", p.name, result.count, len(summaries))
    return [{names[k]: int(v) for k, v in m.relevant.items()} for m in result.models]


# Reliability

@dataclass
class ReliabilityReport:
    program: str
    true_inputs: int = 0
    false_inputs: int = 0
    grey_inputs: int = 0
    paths: Dict[str, int] = field(default_factory=lambda: {"T": 0, "F": 0, "G": 0})

    @property
    def reliability(self) -> float:
        total = self.true_inputs + self.false_inputs + self.grey_inputs
        return self.true_inputs / total if total else 1.0

    def to_json(self) -> dict:
        return {
            "program": self.program,
            "true": self.true_inputs,
            "false": self.false_inputs,
            "grey": self.grey_inputs,
            "paths": dict(self.paths),
            "reliability": round(self.reliability, 6),
        }


def reliability(p: SourceProgram, cfg: BmcConfig) -> ReliabilityReport:
    """
    Probability that a uniformly chosen input runs without failing an assertion.

    Description:
    ------------
    Paths are explored with solving. A path that ends normally counts its
    inputs as true; on a path with a feasible violation the inputs violating
    an assertion count as false and the others as true; a path cut by the
    bound counts as grey. Inputs are counted with `selfcomp.count_inputs`.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> prog = parse("low int4 x; output int4 O; assert(x < 12);")
    >>> reliability(prog, BmcConfig()).reliability
    0.75
    """
    cfg.validate()
    inputs = input_symbols(p)
    report = ReliabilityReport(p.name)
    for s in execute(p, cfg.bound, "classical", cfg.learning):
        if s.verdict is Verdict.ASSUME_VIOLATED:
            continue
        n = count_inputs(s.pc, inputs, learning=cfg.learning)
        if s.verdict is Verdict.BOUND_HIT:
            report.paths["G"] += 1
            report.grey_inputs += n
        elif s.verdict is Verdict.ASSERT_VIOLATED:
            report.paths["F"] += 1
            bad = count_inputs(s.failing, inputs, learning=cfg.learning)
            report.false_inputs += bad
            report.true_inputs += n - bad
        else:
            report.paths["T"] += 1
            report.true_inputs += n
    logger.info("%s: reliability %.6f", p.name, report.reliability)
    return report
