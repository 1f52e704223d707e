# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

from . import logic_bv as bv
from .gcl_ast import (
    Assert, Assign, Assume, Binary, BoolLit, Call, Decl, Expr, If, Lit, Ref, SourceProgram, Ternary,
    Unary, While,
)

Value = Union[bool, int]

DEFAULT_FUEL = 1_000_000


@dataclass
class Execution:
    """Outcome of one concrete run."""

    output: int
    blocked: bool = False
    bound_exceeded: bool = False
    failed_asserts: List[Tuple[int, int]] = field(default_factory=list)
    env: Dict[str, int] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        # Runs cut by an assume or by the unwinding assumption are not behaviours of the bounded program
        return not self.blocked and not self.bound_exceeded

    @property
    def violated(self) -> bool:
        return bool(self.failed_asserts)


class _Stop(Exception):
    pass


def eval_expr(e: Expr, env: Mapping[str, int]) -> Value:
    """Concrete value of a typed expression (Bool nodes give bool, others unsigned ints)."""
    if isinstance(e, Lit):
        return bv.norm(e.value, e.width)
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, Ref):
        return env[e.name]
    if isinstance(e, Unary):
        x = eval_expr(e.operand, env)
        if e.op == "!":
            return not x
        if e.op == "-":
            return bv.neg(x, e.width)
        return bv.bnot(x, e.width)
    if isinstance(e, Binary):
        return _binary(e, eval_expr(e.left, env), eval_expr(e.right, env))
    if isinstance(e, Ternary):
        return eval_expr(e.then, env) if eval_expr(e.cond, env) else eval_expr(e.other, env)
    if isinstance(e, Call):
        args = [eval_expr(a, env) for a in e.args]
        w = e.args[0].width
        if e.func == "zext":
            return args[0]
        if e.func == "sext":
            return bv.sign_extend(args[0], e.param - w, w)
        if e.func == "trunc":
            return bv.norm(args[0], e.param)
        if e.func == "slt":
            return bv.slt(args[0], args[1], w)
        if e.func == "sle":
            return bv.sle(args[0], args[1], w)
        if e.func == "sgt":
            return bv.slt(args[1], args[0], w)
        if e.func == "sge":
            return bv.sle(args[1], args[0], w)
        if e.func == "ashr":
            return bv.ashr(args[0], args[1], w)
    raise TypeError(f"cannot evaluate {e!r}")


def _binary(e: Binary, a: Value, b: Value) -> Value:
    op, w = e.op, e.left.width
    if op == "&&":
        return a and b
    if op == "||":
        return a or b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "+":
        return bv.add(a, b, w)
    if op == "-":
        return bv.sub(a, b, w)
    if op == "*":
        return bv.mul(a, b, w)
    if op == "/":
        return bv.udiv(a, b, w)
    if op == "%":
        return bv.urem(a, b, w)
    if op == "&":
        return a & b
    if op == "|":
        return a | b
    if op == "^":
        return a ^ b
    if op == "<<":
        return bv.shl(a, b, w)
    if op == ">>":
        return bv.lshr(a, b, w)
    raise TypeError(f"unknown operator {op}")


def interpret(p: SourceProgram, inputs: Mapping[str, int], loop_bound: Optional[int] = None,
              fuel: int = DEFAULT_FUEL) -> Execution:
    """
    Runs a program on concrete inputs.

    Parameters:
    ----------
    :param p: SourceProgram
        Typed program.
    :param inputs: Mapping[str, int]
        Values of the input variables (missing inputs read 0); locals and the output start at 0.
    :param loop_bound: Optional[int]
        Maximum iterations per execution of a `while`; a loop whose condition still holds
        after `loop_bound` iterations stops the run with `bound_exceeded` set, mirroring
        the unwinding assumption. None runs loops to completion.
    :param fuel: int
        Total loop iterations allowed when `loop_bound` is None.

    Return value:
    -------------
    :return: Execution
        Output value, blocking/bound flags and the positions of failed assertions.
        Failed assertions do not stop the run.

    Example usage:
    --------------
    >>> from .gcl_parser import parse
    >>> p = parse("high int8 H; output int8 O; if (H < 16) O = H; else O = 0;")
    >>> interpret(p, {"H": 3}).output
    3
    """
    env: Dict[str, int] = {}
    for d in p.decls:
        env[d.name] = bv.norm(int(inputs.get(d.name, 0)), d.width) if d.kind.is_input else 0
    run = Execution(output=0, env=env)
    budget = [fuel]

    def block(stmts) -> None:
        for s in stmts:
            stmt(s)

    def stmt(s) -> None:
        if isinstance(s, Assign):
            env[s.target] = eval_expr(s.value, env)
        elif isinstance(s, Assume):
            if not eval_expr(s.cond, env):
                run.blocked = True
                raise _Stop()
        elif isinstance(s, Assert):
            if not eval_expr(s.cond, env):
                run.failed_asserts.append(s.pos)
        elif isinstance(s, If):
            block(s.then if eval_expr(s.cond, env) else s.other)
        elif isinstance(s, While):
            iterations = 0
            while eval_expr(s.cond, env):
                if loop_bound is not None and iterations >= loop_bound:
                    run.bound_exceeded = True
                    raise _Stop()
                budget[0] -= 1
                if budget[0] < 0:
                    run.bound_exceeded = True
                    raise _Stop()
                iterations += 1
                block(s.body)
        else:
            raise TypeError(f"not a statement: {s!r}")

    try:
        block(p.body)
    except _Stop:
        pass
    run.output = env[p.output.name]
    return run


def input_space(decls: Tuple[Decl, ...]) -> Iterator[Dict[str, int]]:
    """All valuations of the given input declarations (exhaustive, for small widths)."""
    names = [d.name for d in decls]
    ranges = [range(1 << d.width) for d in decls]
    for values in itertools.product(*ranges):
        yield dict(zip(names, values))


def input_bits(p: SourceProgram) -> int:
    return sum(d.width for d in p.inputs)


def reachable_outputs(p: SourceProgram, loop_bound: Optional[int] = None) -> set:
    """Distinct outputs over every feasible input valuation (brute force)."""
    outputs = set()
    for valuation in input_space(p.inputs):
        run = interpret(p, valuation, loop_bound)
        if run.feasible:
            outputs.add(run.output)
    return outputs
