# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from . import logic_terms as lt
from . import settings
from .errors import StackUnderflow, UnknownVariable, UnsupportedSort
from .logic_smtlib import Command, format_value, parse_smt
from .sat_solver import Model, Solver

logger = logging.getLogger(__name__)

ALGORITHMS = ("bc", "dfs")

VarRef = Union[str, lt.Term]


@dataclass(frozen=True)
class ProjectedModel:
    """One model restricted to the important variables, plus witness values of the relevant ones."""

    important: Dict[str, bool]
    relevant: Dict[str, Union[bool, int]] = field(default_factory=dict)

    @property
    def key(self) -> Tuple[bool, ...]:
        return tuple(self.important.values())

    def format(self, variables: Mapping[str, lt.Term]) -> str:
        lines = ["(model"]
        for name, value in list(self.important.items()) + list(self.relevant.items()):
            v = variables.get(name) or lt.bool_var(name)
            lines.append(f"  (define-fun {lt.format_symbol(name)} () {v.sort} {format_value(v, value)})")
        lines.append(")")
        return "\n".join(lines)


@dataclass
class EnumerationResult:
    algorithm: str
    important: Tuple[str, ...]
    relevant: Tuple[str, ...]
    count: int = 0
    models: List[ProjectedModel] = field(default_factory=list)
    limit_reached: bool = False
    checks: int = 0
    elapsed: float = 0.0

    @property
    def N(self) -> int:
        return self.count

    def keys(self) -> List[Tuple[bool, ...]]:
        return sorted(m.key for m in self.models)

    def _record(self, model: ProjectedModel, store: bool, limit: Optional[int]) -> bool:
        self.count += 1
        if store:
            self.models.append(model)
        if limit is not None and self.count >= limit:
            self.limit_reached = True
            return True
        return False


def _resolve(phi: lt.Term, refs: Iterable[VarRef], what: str, need_bool: bool,
             strict: bool = True) -> List[lt.Term]:
    by_name = {v.name: v for v in lt.free_vars(phi)}
    out = []
    for ref in refs:
        name = ref if isinstance(ref, str) else ref.name
        v = by_name.get(name)
        if v is None and not strict and not isinstance(ref, str):
            v = ref
        if v is None:
            raise UnknownVariable(f"{what} variable '{name}' does not occur in the formula")
        if need_bool and not v.is_bool:
            raise UnsupportedSort(f"important variable '{name}' must be Bool, got {v.sort}")
        out.append(v)
    return out


def _project(m: Model, important: Sequence[lt.Term], relevant: Sequence[lt.Term]) -> ProjectedModel:
    return ProjectedModel(
        {p.name: bool(m.value(p)) for p in important},
        {v.name: m.value(v) for v in relevant},
    )


def all_bc(phi: lt.Term, important: Sequence[VarRef], relevant: Sequence[VarRef] = (),
           limit: Optional[int] = None, store: bool = True, learning: Optional[bool] = None,
           priority: Sequence[lt.Term] = (), strict: bool = True) -> EnumerationResult:
    """
    Enumerates the important-variable projections of `phi` with blocking clauses.

    Parameters:
    ----------
    :param phi: Term
        Bool-sorted formula.
    :param important: Sequence[str | Term]
        Important Boolean variables V_I, in reporting order.
    :param relevant: Sequence[str | Term]
        Variables V_R whose values are reported from the first witness of each projection.
    :param limit: Optional[int]
        Stop as soon as this many projections are found; the result is flagged `limit_reached`.
    :param store: bool
        Keep the projected models (False only counts).
    :param learning: Optional[bool]
        Engine mode, defaults to `settings.SAT_LEARNING`.
    :param priority: Sequence[Term]
        Variables the engine should branch on first.

    Return value:
    -------------
    :return: EnumerationResult

    Description:
    ------------
    After each SAT answer the clause ⋁ (p ≠ value(p)) over V_I is asserted and
    the formula re-checked until UNSAT. With an empty V_I the result is 1 for a
    satisfiable formula and 0 otherwise.

    Example usage:
    --------------
    >>> p = lt.bool_var("p")
    >>> all_bc(lt.mk_not(p), [p]).count
    1

    Possible errors:
    ----------------
    - `UnknownVariable`: an important or relevant variable does not occur in `phi`.
    - `UnsupportedSort`: an important variable is not Bool.
    """
    imp = _resolve(phi, important, "important", True, strict)
    rel = _resolve(phi, relevant, "relevant", False, strict)
    result = EnumerationResult("bc", tuple(p.name for p in imp), tuple(v.name for v in rel))
    start = time.perf_counter()
    if limit is not None and limit <= 0:
        result.limit_reached = True
        return result
    solver = Solver(learning, priority=list(priority) + imp)
    solver.assert_term(phi)
    while True:
        result.checks += 1
        if not solver.check():
            break
        model = _project(solver.model(), imp, rel)
        if result._record(model, store, limit) or not imp:
            break
        solver.assert_term(lt.mk_or(*[lt.mk_not(p) if model.important[p.name] else p for p in imp]))
    result.elapsed = time.perf_counter() - start
    logger.debug("all_bc: %d models, %d checks, %.3fs", result.count, result.checks, result.elapsed)
    return result


def all_dfs(phi: lt.Term, important: Sequence[VarRef], relevant: Sequence[VarRef] = (),
            limit: Optional[int] = None, store: bool = True, learning: Optional[bool] = None,
            priority: Sequence[lt.Term] = (), strict: bool = True) -> EnumerationResult:
    """
    Enumerates the important-variable projections of `phi` depth-first.

    Parameters are those of `all_bc`.

    Description:
    ------------
    Walks V_I in the given order. Each step pushes a frame, asserts `p` (then
    `¬p`) and checks; a SAT answer at depth |V_I| is a model. The solver never
    holds more than |V_I| extra unit assertions. A check is skipped when the
    witness of the parent node already agrees with the new literal.

    Example usage:
    --------------
    >>> g1, g2 = lt.bool_var("G_1"), lt.bool_var("G_2")
    >>> r = all_dfs(lt.mk_not(lt.mk_and(g1, g2)), [g1, g2])
    >>> r.keys()
    [(False, False), (False, True), (True, False)]
    """
    imp = _resolve(phi, important, "important", True, strict)
    rel = _resolve(phi, relevant, "relevant", False, strict)
    result = EnumerationResult("dfs", tuple(p.name for p in imp), tuple(v.name for v in rel))
    start = time.perf_counter()
    if limit is not None and limit <= 0:
        result.limit_reached = True
        return result
    solver = Solver(learning, priority=list(priority) + imp)
    solver.assert_term(phi)
    result.checks += 1
    if not solver.check():
        result.elapsed = time.perf_counter() - start
        return result
    n = len(imp)

    def visit(depth: int, witness: Model) -> bool:
        if depth == n:
            return result._record(_project(witness, imp, rel), store, limit)
        p = imp[depth]
        for value in (True, False):
            solver.push()
            solver.assert_term(p if value else lt.mk_not(p))
            if bool(witness.value(p)) == value:
                found = witness
            else:
                result.checks += 1
                found = solver.model() if solver.check() else None
            stop = found is not None and visit(depth + 1, found)
            solver.pop()
            if stop:
                return True
        return False

    visit(0, solver.model())
    result.elapsed = time.perf_counter() - start
    logger.debug("all_dfs: %d models, %d checks, %.3fs", result.count, result.checks, result.elapsed)
    return result


def enumerate_models(phi: lt.Term, important: Sequence[VarRef], relevant: Sequence[VarRef] = (),
                     algorithm: str = settings.DEFAULT_ALGORITHM, **kwargs) -> EnumerationResult:
    if algorithm == "bc":
        return all_bc(phi, important, relevant, **kwargs)
    if algorithm == "dfs":
        return all_dfs(phi, important, relevant, **kwargs)
    raise ValueError(f"unknown enumeration algorithm '{algorithm}', expected one of {ALGORITHMS}")


def count_models(phi: lt.Term, important: Sequence[VarRef], algorithm: str = settings.DEFAULT_ALGORITHM,
                 limit: Optional[int] = None, **kwargs) -> int:
    """
    Number of distinct important-variable projections of the models of `phi`.

    Example usage:
    --------------
    >>> ps = [lt.bool_var(f"p{i}") for i in range(3)]
    >>> count_models(lt.mk_or(*ps), ps)
    7
    """
    return enumerate_models(phi, important, (), algorithm, limit=limit, store=False, **kwargs).count


# Script execution

def _model_block(m: Model, names: Iterable[str], declarations: Mapping[str, lt.Term]) -> str:
    lines = ["(model"]
    for name in names:
        v = declarations[name]
        lines.append(f"  (define-fun {lt.format_symbol(name)} () {v.sort} {format_value(v, m.value(v))})")
    lines.append(")")
    return "\n".join(lines)


def run_script(text: str, algorithm: str = settings.DEFAULT_ALGORITHM,
               learning: Optional[bool] = None) -> List[str]:
    """
    Executes an SMT-LIB script and returns the solver responses.

    Parameters:
    ----------
    :param text: str
        Script in the supported QF_BV subset (see `logic_smtlib.parse_smt`).
    :param algorithm: str
        Enumeration used by `check-allsat`: "bc" or "dfs".

    Return value:
    -------------
    :return: List[str]
        `sat`/`unsat` per `check-sat`, a `(model ...)` block per `get-model`,
        and for `check-allsat` one `(model ...)` block per projected model
        followed by `(models N)`.

    Example usage:
    --------------
    >>> run_script("(declare-fun p () Bool)(assert (not p))(check-allsat (p))")
    ['(model\\n  (define-fun p () Bool false)\\n)', '(models 1)']

    Possible errors:
    ----------------
    - `SourceSyntaxError`, `UnsupportedFeature`: from parsing.
    - `StackUnderflow`: `pop` below the first frame.
    """
    script = parse_smt(text)
    frames: List[List[lt.Term]] = [[]]
    relevant: Tuple[str, ...] = ()
    last_model: Optional[Model] = None
    out: List[str] = []
    command: Command
    for command in script.commands:
        name = command.name
        if name == "assert":
            frames[-1].append(command.term)
            last_model = None
        elif name == "push":
            frames.extend([] for _ in range(command.args[0]))
        elif name == "pop":
            count = command.args[0]
            if count > len(frames) - 1:
                raise StackUnderflow(f"line {command.pos[0]}: pop {count} at depth {len(frames) - 1}")
            del frames[len(frames) - count:]
            last_model = None
        elif name == "check-sat":
            solver = Solver(learning)
            for t in (t for frame in frames for t in frame):
                solver.assert_term(t)
            if solver.check():
                last_model = solver.model()
                out.append("sat")
            else:
                last_model = None
                out.append("unsat")
        elif name == "get-model":
            if last_model is None:
                out.append('(error "no model available")')
            else:
                out.append(_model_block(last_model, script.declarations, script.declarations))
        elif name == "allsat-relevant":
            relevant = command.args
        elif name == "check-allsat":
            phi = lt.mk_and(*[t for frame in frames for t in frame])
            important = [script.declarations[n] for n in command.args]
            rel = [script.declarations[n] for n in relevant]
            # declared but unconstrained variables still take part in the projection
            result = enumerate_models(phi, important, rel, algorithm, learning=learning, strict=False)
            out.extend(m.format(script.declarations) for m in result.models)
            out.append(f"(models {result.count})")
        elif name == "exit":
            break
    return out

