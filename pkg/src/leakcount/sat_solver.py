# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import enum
import itertools
import logging
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Union

from . import logic_terms as lt
from . import settings
from .errors import NoModel, StackUnderflow, UnsupportedSort
from .logic_smtlib import format_value
from .sat_bitblast import BitBlaster
from .sat_dpll import DpllEngine

logger = logging.getLogger(__name__)

Value = Union[bool, int]

_DUMP_COUNTER = itertools.count(1)


class SatResult(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"

    def __bool__(self) -> bool:
        return self is SatResult.SAT


class Model(Mapping[str, Value]):
    """Snapshot of variable values; variables the solver never saw read as 0/false."""

    def __init__(self, values: Dict[str, Value], sorts: Dict[str, lt.Term]):
        self._values = values
        self._vars = sorts

    def __getitem__(self, name: str) -> Value:
        return self._values[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def value(self, v: lt.Term) -> Value:
        if v.name in self._values:
            return self._values[v.name]
        return False if v.is_bool else 0

    def eval(self, t: lt.Term) -> Value:
        return lt.evaluate(t, self._values)

    def format(self, names: Optional[Iterable[str]] = None) -> str:
        """SMT-LIB `(model ...)` block for the given variables (default: all)."""
        chosen = list(names) if names is not None else sorted(self._values)
        lines = ["(model"]
        for name in chosen:
            v = self._vars.get(name)
            sort = v.sort if v is not None else lt.BOOL
            value = self._values.get(name, False if sort.is_bool else 0)
            term = v if v is not None else lt.bool_var(name)
            lines.append(f"  (define-fun {lt.format_symbol(name)} () {sort} {format_value(term, value)})")
        lines.append(")")
        return "\n".join(lines)


class Solver:
    """
    Incremental bit-vector solver: terms are bit-blasted onto a DPLL engine.

    Parameters:
    ----------
    :param learning: Optional[bool]
        Conflict-driven clause learning; None takes `settings.SAT_LEARNING`.
    :param priority: Iterable[Term]
        Variables allocated first; the engine decides low variable ids first,
        so these are branched on before anything else.

    Example usage:
    --------------
    >>> x = lt.bv_var("x", 4)
    >>> s = Solver()
    >>> s.assert_term(lt.mk_bvult(x, lt.const(3, 4)))
    >>> s.push(); s.assert_term(lt.mk_bvuge(x, lt.const(3, 4)))
    >>> s.check()
    <SatResult.UNSAT: 'unsat'>
    >>> s.pop(); s.check()
    <SatResult.SAT: 'sat'>
    """

    def __init__(self, learning: Optional[bool] = None, priority: Iterable[lt.Term] = ()):
        self.engine = DpllEngine(learning)
        self.blaster = BitBlaster(self.engine)
        self.frames: List[List[lt.Term]] = [[]]
        self._status: Optional[SatResult] = None
        self._model: Optional[Model] = None
        self.declare(priority)

    @property
    def depth(self) -> int:
        return self.engine.depth

    @property
    def assertions(self) -> List[lt.Term]:
        return [t for frame in self.frames for t in frame]

    def declare(self, variables: Iterable[lt.Term]) -> None:
        for v in variables:
            if not lt.is_var(v):
                raise UnsupportedSort(f"only variables can be declared, got {v}")
            self.blaster.declare(v)

    def assert_term(self, t: lt.Term) -> None:
        if not t.is_bool:
            raise UnsupportedSort(f"asserted term must be Bool, got {t.sort}")
        self.blaster.assert_term(t, self.engine.depth)
        self.frames[-1].append(t)
        self._invalidate()

    def push(self) -> None:
        self.engine.push()
        self.frames.append([])
        self._invalidate()

    def pop(self, n: int = 1) -> None:
        if n > self.depth:
            raise StackUnderflow(f"pop({n}) at depth {self.depth}")
        self.engine.pop(n)
        del self.frames[len(self.frames) - n:]
        self._invalidate()

    def _invalidate(self) -> None:
        self._status = None
        self._model = None

    def check(self) -> SatResult:
        directory = settings.dimacs_dir()
        if directory:
            self.engine.dump_dimacs(Path(directory) / f"check-{next(_DUMP_COUNTER):05d}.cnf")
        result = SatResult.SAT if self.engine.solve() else SatResult.UNSAT
        self._status = result
        self._model = None
        logger.debug("check at depth %d: %s (%d vars)", self.depth, result.value, self.engine.num_vars)
        return result

    @property
    def status(self) -> Optional[SatResult]:
        return self._status

    def model(self) -> Model:
        """Values of every variable the solver translated, valid after a SAT check."""
        if self._status is not SatResult.SAT:
            raise NoModel("no model: the last check was not SAT or the assertions changed since")
        if self._model is None:
            values = {name: self.blaster.value(v) for name, v in self.blaster.variables.items()}
            self._model = Model(values, dict(self.blaster.variables))
        return self._model

    def value(self, v: lt.Term) -> Value:
        """Value of one variable in the current model without taking a full snapshot."""
        if self._status is not SatResult.SAT:
            raise NoModel("no model available")
        if v in self.blaster.cache:
            return self.blaster.value(v)
        return False if v.is_bool else 0

    def eval(self, t: lt.Term) -> Value:
        return self.model().eval(t)


def is_sat(*terms: lt.Term, learning: Optional[bool] = None) -> bool:
    s = Solver(learning)
    for t in terms:
        s.assert_term(t)
    return bool(s.check())
