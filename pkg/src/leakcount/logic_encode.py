# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from . import logic_terms as lt
from .errors import UnknownVariable
from .gcl_unroll import GuardDef, SsaAssert, SsaAssign, SsaAssume, SsaProgram

logger = logging.getLogger(__name__)

IMPORTANT_PREFIX = "p!"


def encode(p: SsaProgram) -> lt.Term:
    """
    Conjunction C of one constraint per SSA statement.

    Guard definitions and assignments become equalities, assumes become
    `guard → cond`; assertions are left to `encode_property`.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> from .gcl_unroll import unroll
    >>> encode(unroll(parse("output int32 O; O = 3;"), 1))
    (= O_1 #x00000003)
    """
    parts = []
    for s in p.stmts:
        if isinstance(s, GuardDef):
            parts.append(lt.mk_eq(s.guard, s.value))
        elif isinstance(s, SsaAssign):
            parts.append(lt.mk_eq(s.target, s.value))
        elif isinstance(s, SsaAssume):
            parts.append(lt.mk_implies(s.guard, s.cond))
    return lt.mk_and(*parts)


def encode_property(p: SsaProgram) -> lt.Term:
    """Assertion conjunction P := ∧ (guard → cond)."""
    return lt.mk_and(*[lt.mk_implies(s.guard, s.cond) for s in p.stmts if isinstance(s, SsaAssert)])


@dataclass(frozen=True)
class InstrumentedFormula:
    """
    Base formula plus one Boolean per output bit.

    `important[i]` is bound to bit i of the output (LSB first).
    """

    base: lt.Term
    output: lt.Term
    important: Tuple[str, ...]
    relevant: Tuple[str, ...]
    bindings: Tuple[lt.Term, ...] = field(default=())

    @property
    def formula(self) -> lt.Term:
        return lt.mk_and(self.base, *self.bindings)

    @property
    def important_vars(self) -> List[lt.Term]:
        return [lt.bool_var(name) for name in self.important]

    def output_value(self, bits) -> int:
        """Reassembles the output value from the important-bit values (LSB first)."""
        return sum(1 << i for i, bit in enumerate(bits) if bit)


def instrument(c: lt.Term, output: lt.Term, relevant: Sequence[str] = ()) -> InstrumentedFormula:
    """
    Adds the bindings p!i ⇔ (extract(i-1, i-1)(O) = 1) for every output bit.

    Parameters:
    ----------
    :param c: Term
        Encoded program.
    :param output: Term
        Final output variable, of sort BitVec(M).
    :param relevant: Sequence[str]
        Variables whose witness values enumerations should report.

    Return value:
    -------------
    :return: InstrumentedFormula
        With M important variables `p!1 .. p!M`.

    Possible errors:
    ----------------
    - `UnknownVariable`: the output or a relevant variable does not occur in `c`.
    """
    names = lt.free_var_names(c)
    if not lt.is_var(output) or output.is_bool or output.name not in names:
        raise UnknownVariable(f"output {output} does not occur in the formula")
    missing = [v for v in relevant if v not in names]
    if missing:
        raise UnknownVariable(f"relevant variables not in the formula: {', '.join(missing)}")
    important = []
    bindings = []
    for i in range(output.width):
        p = lt.bool_var(f"{IMPORTANT_PREFIX}{i + 1}")
        if p.name in names:
            raise UnknownVariable(f"{p.name} already occurs in the formula")
        important.append(p.name)
        bindings.append(lt.mk_eq(p, lt.mk_eq(lt.mk_extract(i, i, output), lt.const(1, 1))))
    return InstrumentedFormula(c, output, tuple(important), tuple(relevant), tuple(bindings))
