# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import dataclasses
from typing import Dict, Optional, Tuple

from . import settings
from .errors import SourceSyntaxError, WidthError
from .gcl_ast import (
    ARITH_OPS, CAST_FUNCS, COMPARE_OPS, EQUALITY_OPS, LOGIC_OPS, SHIFT_FUNCS, SIGNED_COMPARE_FUNCS,
    Assert, Assign, Assume, Binary, BoolLit, Call, Decl, Expr, If, Lit, Ref, SourceProgram, Stmt,
    Ternary, Unary, VarKind, While,
)


class _Checker:
    """Assigns widths to a raw AST and validates declarations."""

    def __init__(self, decls: Tuple[Decl, ...], file: Optional[str]):
        self.file = file
        self.widths: Dict[str, int] = {}
        for d in decls:
            if d.name in self.widths:
                self.fail(f"duplicate declaration of '{d.name}'", d.pos)
            if not 1 <= d.width <= settings.MAX_WIDTH:
                self.fail(f"width of '{d.name}' must be in 1..{settings.MAX_WIDTH}, got {d.width}", d.pos, WidthError)
            self.widths[d.name] = d.width
        outputs = [d for d in decls if d.kind is VarKind.OUTPUT]
        if len(outputs) != 1:
            pos = outputs[1].pos if len(outputs) > 1 else (1, 1)
            self.fail(f"exactly one output variable required, found {len(outputs)}", pos)

    def fail(self, message: str, pos, error=SourceSyntaxError):
        raise error(message, pos[0], pos[1], self.file)

    # Expressions

    def literal_only(self, e: Expr) -> bool:
        if isinstance(e, Lit):
            return True
        if isinstance(e, Unary) and e.op in ("-", "~"):
            return self.literal_only(e.operand)
        if isinstance(e, Binary) and e.op in ARITH_OPS:
            return self.literal_only(e.left) and self.literal_only(e.right)
        return False

    def pair(self, left: Expr, right: Expr, hint: Optional[int]):
        if self.literal_only(left) and not self.literal_only(right):
            r = self.infer(right, hint)
            l = self.infer(left, r.width)
        else:
            l = self.infer(left, hint)
            r = self.infer(right, l.width if l.width else hint)
        return l, r

    def same_bv(self, l: Expr, r: Expr, what: str, pos) -> int:
        if l.width == 0 or r.width == 0:
            self.fail(f"operator '{what}' needs bit-vector operands", pos, WidthError)
        if l.width != r.width:
            self.fail(
                f"mixed widths {l.width} and {r.width} for '{what}' (use zext/sext/trunc)",
                pos,
                WidthError,
            )
        return l.width

    def cond(self, e: Expr) -> Expr:
        t = self.infer(e, None)
        if t.width == 0:
            return t
        return Binary("!=", t, Lit(0, t.width, t.pos), 0, t.pos)

    def infer(self, e: Expr, hint: Optional[int]) -> Expr:
        if isinstance(e, Lit):
            if hint == 0:
                self.fail(f"integer literal {e.value} used as a Boolean", e.pos, WidthError)
            width = hint or settings.DEFAULT_LITERAL_WIDTH
            if e.value >= (1 << width):
                self.fail(f"literal {e.value} does not fit in {width} bits", e.pos, WidthError)
            return dataclasses.replace(e, width=width)
        if isinstance(e, BoolLit):
            return e
        if isinstance(e, Ref):
            if e.name not in self.widths:
                self.fail(f"undeclared variable '{e.name}'", e.pos)
            return dataclasses.replace(e, width=self.widths[e.name])
        if isinstance(e, Unary):
            if e.op == "!":
                return Unary("!", self.cond(e.operand), 0, e.pos)
            inner = self.infer(e.operand, hint)
            if inner.width == 0:
                self.fail(f"operator '{e.op}' needs a bit-vector operand", e.pos, WidthError)
            return Unary(e.op, inner, inner.width, e.pos)
        if isinstance(e, Binary):
            return self.binary(e, hint)
        if isinstance(e, Ternary):
            c = self.cond(e.cond)
            a, b = self.pair(e.then, e.other, hint)
            if a.width != b.width:
                self.fail(f"branches of '?:' have widths {a.width} and {b.width}", e.pos, WidthError)
            return Ternary(c, a, b, a.width, e.pos)
        if isinstance(e, Call):
            return self.call(e)
        raise TypeError(f"not an expression: {e!r}")

    def binary(self, e: Binary, hint: Optional[int]) -> Expr:
        if e.op in LOGIC_OPS:
            return Binary(e.op, self.cond(e.left), self.cond(e.right), 0, e.pos)
        if e.op in EQUALITY_OPS:
            l, r = self.pair(e.left, e.right, None)
            if l.width != r.width:
                self.fail(f"mixed widths {l.width} and {r.width} for '{e.op}' (use zext/sext/trunc)", e.pos, WidthError)
            return Binary(e.op, l, r, 0, e.pos)
        if e.op in COMPARE_OPS:
            l, r = self.pair(e.left, e.right, None)
            self.same_bv(l, r, e.op, e.pos)
            return Binary(e.op, l, r, 0, e.pos)
        if e.op in ARITH_OPS:
            l, r = self.pair(e.left, e.right, hint)
            width = self.same_bv(l, r, e.op, e.pos)
            return Binary(e.op, l, r, width, e.pos)
        self.fail(f"unknown operator '{e.op}'", e.pos)

    def call(self, e: Call) -> Expr:
        if e.func in CAST_FUNCS:
            if len(e.args) != 1 or e.param is None:
                self.fail(f"{e.func} takes an expression and a literal width", e.pos)
            inner = self.infer(e.args[0], None)
            if inner.width == 0:
                self.fail(f"{e.func} needs a bit-vector operand", e.pos, WidthError)
            if not 1 <= e.param <= settings.MAX_WIDTH:
                self.fail(f"{e.func} target width {e.param} out of range", e.pos, WidthError)
            if e.func == "trunc" and e.param > inner.width:
                self.fail(f"trunc to {e.param} bits from {inner.width} bits", e.pos, WidthError)
            if e.func != "trunc" and e.param < inner.width:
                self.fail(f"{e.func} to {e.param} bits from {inner.width} bits", e.pos, WidthError)
            return Call(e.func, (inner,), e.param, e.param, e.pos)
        if e.func in SIGNED_COMPARE_FUNCS or e.func in SHIFT_FUNCS:
            if len(e.args) != 2 or e.param is not None:
                self.fail(f"{e.func} takes two operands", e.pos)
            l, r = self.pair(e.args[0], e.args[1], None)
            width = self.same_bv(l, r, e.func, e.pos)
            result = 0 if e.func in SIGNED_COMPARE_FUNCS else width
            return Call(e.func, (l, r), None, result, e.pos)
        self.fail(f"unknown function '{e.func}'", e.pos)

    # Statements

    def block(self, stmts) -> Tuple[Stmt, ...]:
        return tuple(self.stmt(s) for s in stmts)

    def stmt(self, s: Stmt) -> Stmt:
        if isinstance(s, Assign):
            if s.target not in self.widths:
                self.fail(f"undeclared variable '{s.target}'", s.pos)
            width = self.widths[s.target]
            value = self.infer(s.value, width)
            if value.width == 0:
                value = Ternary(value, Lit(1, width, s.pos), Lit(0, width, s.pos), width, s.pos)
            elif value.width != width:
                self.fail(
                    f"assigning {value.width}-bit value to {width}-bit '{s.target}' (use zext/sext/trunc)",
                    s.pos,
                    WidthError,
                )
            return Assign(s.target, value, s.pos)
        if isinstance(s, Assume):
            return Assume(self.cond(s.cond), s.pos)
        if isinstance(s, Assert):
            return Assert(self.cond(s.cond), s.pos)
        if isinstance(s, If):
            return If(self.cond(s.cond), self.block(s.then), self.block(s.other), s.pos)
        if isinstance(s, While):
            return While(self.cond(s.cond), self.block(s.body), s.pos)
        raise TypeError(f"not a statement: {s!r}")


def check_program(decls: Tuple[Decl, ...], body: Tuple[Stmt, ...], name: str = "<input>") -> SourceProgram:
    """
    Width-checks a raw AST and returns the typed `SourceProgram`.

    Parameters:
    ----------
    :param decls: Tuple[Decl, ...]
        Declarations in source order.
    :param body: Tuple[Stmt, ...]
        Statements with unresolved expression widths.
    :param name: str
        File name used in diagnostics.

    Description:
    ------------
    - Untyped integer literals take the width of the other operand, of the
      assignment target, or 32 bits when nothing constrains them.
    - Bit-vector conditions become `e != 0`; Boolean values assigned to a
      bit-vector variable become `c ? 1 : 0`.
    - Mixed widths without an explicit cast raise `WidthError`.
    """
    file = None if name == "<input>" else name
    checker = _Checker(decls, file)
    return SourceProgram(tuple(decls), checker.block(body), name)
