# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple, Union

from . import logic_terms as lt
from .errors import BoundError
from .gcl_ast import Assert, Assign, Assume, If, SourceProgram, While
from .gcl_lower import lower

logger = logging.getLogger(__name__)

GUARD_PREFIX = "g!"


def version_name(base: str, version: int) -> str:
    return f"{base}_{version}"


@dataclass(frozen=True)
class GuardDef:
    guard: lt.Term
    value: lt.Term


@dataclass(frozen=True)
class SsaAssign:
    target: lt.Term
    value: lt.Term


@dataclass(frozen=True)
class SsaAssume:
    guard: lt.Term
    cond: lt.Term


@dataclass(frozen=True)
class SsaAssert:
    guard: lt.Term
    cond: lt.Term
    pos: Tuple[int, int] = (0, 0)


SsaStmt = Union[GuardDef, SsaAssign, SsaAssume, SsaAssert]


@dataclass
class SsaProgram:
    """
    Loop-free single-assignment form of a bounded program.

    Guards are path-composed: `g!k := parent_guard ∧ cond`, so every guard
    variable is true exactly on the executions that take the then-branch of
    that particular `if` (or loop iteration).
    """

    stmts: List[SsaStmt]
    input_versions: Dict[str, lt.Term]
    output_final: lt.Term
    guards: List[lt.Term] = field(default_factory=list)
    source: SourceProgram = None

    def assigned(self) -> List[lt.Term]:
        return [s.target for s in self.stmts if isinstance(s, SsaAssign)] + \
               [s.guard for s in self.stmts if isinstance(s, GuardDef)]

    def validate(self) -> None:
        """Raises ValueError when single assignment or definition order is broken."""
        defined = set(self.input_versions.values())
        last_version: Dict[str, int] = {}
        for s in self.stmts:
            if isinstance(s, (GuardDef, SsaAssign)):
                target = s.guard if isinstance(s, GuardDef) else s.target
                used = lt.free_vars(s.value)
            else:
                target = None
                used = lt.free_vars(s.guard) | lt.free_vars(s.cond)
            undefined = [v.name for v in used if v not in defined]
            if undefined:
                raise ValueError(f"use before definition: {undefined}")
            if target is None:
                continue
            if target in defined:
                raise ValueError(f"{target.name} assigned twice")
            defined.add(target)
            if isinstance(s, SsaAssign):
                base, _, version = target.name.rpartition("_")
                if int(version) <= last_version.get(base, 0):
                    raise ValueError(f"versions of {base} do not increase")
                last_version[base] = int(version)

    def run(self, inputs: Mapping[str, int]) -> Tuple[int, bool, int]:
        """
        Evaluates the SSA statements on concrete inputs.

        Returns (output value, blocked by an assume, number of failed assertions).
        """
        env: Dict[str, Union[bool, int]] = {}
        for base, term in self.input_versions.items():
            env[term.name] = inputs.get(base, 0)
        blocked = False
        failed = 0
        for s in self.stmts:
            if isinstance(s, GuardDef):
                env[s.guard.name] = lt.evaluate(s.value, env)
            elif isinstance(s, SsaAssign):
                env[s.target.name] = lt.evaluate(s.value, env)
            elif isinstance(s, SsaAssume):
                if lt.evaluate(s.guard, env) and not lt.evaluate(s.cond, env):
                    blocked = True
            elif lt.evaluate(s.guard, env) and not lt.evaluate(s.cond, env):
                failed += 1
        return lt.evaluate(self.output_final, env), blocked, failed


class _Unroller:

    def __init__(self, p: SourceProgram, bound: int):
        self.bound = bound
        self.stmts: List[SsaStmt] = []
        self.guards: List[lt.Term] = []
        self.env: Dict[str, lt.Term] = {}
        self.versions: Dict[str, int] = {}
        self.widths: Dict[str, int] = {}
        self.inputs: Dict[str, lt.Term] = {}
        for d in p.decls:
            self.widths[d.name] = d.width
            self.versions[d.name] = 0
            if d.kind.is_input:
                term = lt.bv_var(version_name(d.name, 0), d.width)
                self.inputs[d.name] = term
                self.env[d.name] = term
            else:
                # locals and the output start at zero
                self.env[d.name] = lt.const(0, d.width)

    def fresh_guard(self, value: lt.Term) -> lt.Term:
        g = lt.bool_var(f"{GUARD_PREFIX}{len(self.guards)}")
        self.guards.append(g)
        self.stmts.append(GuardDef(g, value))
        return g

    def assign(self, target: str, value: lt.Term, guard: lt.Term) -> None:
        self.versions[target] += 1
        v = lt.bv_var(version_name(target, self.versions[target]), self.widths[target])
        self.stmts.append(SsaAssign(v, lt.mk_ite(guard, value, self.env[target])))
        self.env[target] = v

    def block(self, stmts, guard: lt.Term) -> None:
        for s in stmts:
            if isinstance(s, Assign):
                self.assign(s.target, lower(s.value, self.env), guard)
            elif isinstance(s, Assume):
                self.stmts.append(SsaAssume(guard, lower(s.cond, self.env)))
            elif isinstance(s, Assert):
                self.stmts.append(SsaAssert(guard, lower(s.cond, self.env), s.pos))
            elif isinstance(s, If):
                cond = lower(s.cond, self.env)
                g = self.fresh_guard(lt.mk_and(guard, cond))
                self.block(s.then, g)
                self.block(s.other, lt.mk_and(guard, lt.mk_not(g)))
            elif isinstance(s, While):
                self.unwind(s, guard, self.bound)
            else:
                raise TypeError(f"not a statement: {s!r}")

    def unwind(self, loop: While, guard: lt.Term, remaining: int) -> None:
        cond = lower(loop.cond, self.env)
        if remaining == 0:
            # unwinding assumption: executions needing more iterations are excluded
            self.stmts.append(SsaAssume(guard, lt.mk_not(cond)))
            return
        g = self.fresh_guard(lt.mk_and(guard, cond))
        self.block(loop.body, g)
        self.unwind(loop, g, remaining - 1)


def unroll(p: SourceProgram, bound: int) -> SsaProgram:
    """
    Unwinds loops `bound` times and converts the program to guarded SSA.

    Parameters:
    ----------
    :param p: SourceProgram
        Typed program.
    :param bound: int
        Number of unwindings per `while`, at least 1.

    Return value:
    -------------
    :return: SsaProgram
        Statements `v_k := ite(guard, e, v_{k-1})`, guard definitions, guarded
        assumes and assertions. The output always ends in a versioned variable.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> ssa = unroll(parse("high int8 H; output int8 O; O = H;"), 1)
    >>> ssa.output_final
    O_1

    Possible errors:
    ----------------
    - `BoundError`: bound below 1.
    """
    if bound < 1:
        raise BoundError(f"unwinding bound must be at least 1, got {bound}")
    u = _Unroller(p, bound)
    u.block(p.body, lt.TRUE)
    out = p.output.name
    if not lt.is_var(u.env[out]):
        u.assign(out, u.env[out], lt.TRUE)
    ssa = SsaProgram(u.stmts, u.inputs, u.env[out], u.guards, p)
    logger.debug("unrolled %s: %d SSA statements, %d guards", p.name, len(ssa.stmts), len(ssa.guards))
    return ssa
