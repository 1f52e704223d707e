# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import enum
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

Pos = Tuple[int, int]


class VarKind(enum.Enum):
    HIGH = "high"
    LOW = "low"
    NONDET = "nondet"
    LOCAL = "local"
    OUTPUT = "output"

    @property
    def is_input(self) -> bool:
        return self in (VarKind.HIGH, VarKind.LOW, VarKind.NONDET)


# Expressions. `width` is 0 for Boolean-valued nodes and None before width checking.

@dataclass(frozen=True)
class Lit:
    value: int
    width: Optional[int] = None
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    width: Optional[int] = 0
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Ref:
    name: str
    width: Optional[int] = None
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    width: Optional[int] = None
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    width: Optional[int] = None
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Ternary:
    cond: "Expr"
    then: "Expr"
    other: "Expr"
    width: Optional[int] = None
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Expr", ...]
    param: Optional[int] = None
    width: Optional[int] = None
    pos: Pos = field(default=(0, 0), compare=False)


Expr = Union[Lit, BoolLit, Ref, Unary, Binary, Ternary, Call]

ARITH_OPS = ("+", "-", "*", "/", "%", "&", "|", "^", "<<", ">>")
COMPARE_OPS = ("<", "<=", ">", ">=")
EQUALITY_OPS = ("==", "!=")
LOGIC_OPS = ("&&", "||")
CAST_FUNCS = ("zext", "sext", "trunc")
SIGNED_COMPARE_FUNCS = ("slt", "sle", "sgt", "sge")
SHIFT_FUNCS = ("ashr",)

# Binding strength of the binary operators; all of them associate to the left.
BINARY_PRECEDENCE = {
    "*": 10, "/": 10, "%": 10,
    "+": 9, "-": 9,
    "<<": 8, ">>": 8,
    "<": 7, "<=": 7, ">": 7, ">=": 7,
    "==": 6, "!=": 6,
    "&": 5,
    "^": 4,
    "|": 3,
    "&&": 2,
    "||": 1,
}
UNARY_PRECEDENCE = 11
TERNARY_PRECEDENCE = 0
_ATOM_PRECEDENCE = 12


# Statements

@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Assume:
    cond: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Assert:
    cond: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    other: Tuple["Stmt", ...] = ()
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class While:
    cond: Expr
    body: Tuple["Stmt", ...]
    pos: Pos = field(default=(0, 0), compare=False)


Stmt = Union[Assign, Assume, Assert, If, While]


@dataclass(frozen=True)
class Decl:
    name: str
    kind: VarKind
    width: int
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SourceProgram:
    """Checked program: declarations in source order and a statement body."""

    decls: Tuple[Decl, ...]
    body: Tuple[Stmt, ...]
    name: str = field(default="<input>", compare=False)

    def decl(self, name: str) -> Decl:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def output(self) -> Decl:
        return next(d for d in self.decls if d.kind is VarKind.OUTPUT)

    @property
    def inputs(self) -> Tuple[Decl, ...]:
        return tuple(d for d in self.decls if d.kind.is_input)

    @property
    def highs(self) -> Tuple[Decl, ...]:
        return tuple(d for d in self.decls if d.kind is VarKind.HIGH)

    def with_body(self, body: Tuple[Stmt, ...]) -> "SourceProgram":
        return SourceProgram(self.decls, tuple(body), self.name)


# Canonical printer

def _precedence(e: Expr) -> int:
    if isinstance(e, Binary):
        return BINARY_PRECEDENCE[e.op]
    if isinstance(e, Unary):
        return UNARY_PRECEDENCE
    if isinstance(e, Ternary):
        return TERNARY_PRECEDENCE
    return _ATOM_PRECEDENCE


def format_expr(e: Expr, context: int = TERNARY_PRECEDENCE) -> str:
    """
    Prints an expression with the fewest parentheses that keep its shape.

    `context` is the weakest binding the surrounding position accepts; an
    expression binding more loosely than that is parenthesized.

    Example usage:
    --------------
    >>> format_expr(Binary("-", Ref("a"), Binary("-", Ref("b"), Ref("c"))))
    'a - (b - c)'
    >>> format_expr(Binary("*", Unary("-", Ref("a")), Binary("+", Ref("b"), Lit(1))))
    '-a * (b + 1)'
    """
    text = _format_bare(e)
    return f"({text})" if _precedence(e) < context else text


def _format_bare(e: Expr) -> str:
    if isinstance(e, Lit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Unary):
        return f"{e.op}{format_expr(e.operand, UNARY_PRECEDENCE)}"
    if isinstance(e, Binary):
        prec = BINARY_PRECEDENCE[e.op]
        return f"{format_expr(e.left, prec)} {e.op} {format_expr(e.right, prec + 1)}"
    if isinstance(e, Ternary):
        # only the else branch may hold a bare conditional
        cond = format_expr(e.cond, TERNARY_PRECEDENCE + 1)
        then = format_expr(e.then, TERNARY_PRECEDENCE + 1)
        return f"{cond} ? {then} : {format_expr(e.other)}"
    if isinstance(e, Call):
        args = [format_expr(a) for a in e.args]
        if e.param is not None:
            args.append(str(e.param))
        return f"{e.func}({', '.join(args)})"
    raise TypeError(f"not an expression: {e!r}")


def _format_block(stmts: Tuple[Stmt, ...], indent: int, out: list) -> None:
    for s in stmts:
        _format_stmt(s, indent, out)


def _format_stmt(s: Stmt, indent: int, out: list) -> None:
    pad = "    " * indent
    if isinstance(s, Assign):
        out.append(f"{pad}{s.target} = {format_expr(s.value)};")
    elif isinstance(s, Assume):
        out.append(f"{pad}assume({format_expr(s.cond)});")
    elif isinstance(s, Assert):
        out.append(f"{pad}assert({format_expr(s.cond)});")
    elif isinstance(s, If):
        out.append(f"{pad}if ({format_expr(s.cond)}) {{")
        _format_block(s.then, indent + 1, out)
        if s.other:
            out.append(f"{pad}}} else {{")
            _format_block(s.other, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, While):
        out.append(f"{pad}while ({format_expr(s.cond)}) {{")
        _format_block(s.body, indent + 1, out)
        out.append(f"{pad}}}")
    else:
        raise TypeError(f"not a statement: {s!r}")


def format_program(p: SourceProgram) -> str:
    """
    Prints a program in canonical concrete syntax.

    Expressions carry only the parentheses their precedence needs and every
    block is braced, so
    `parse(format_program(parse(text))) == parse(text)`.
    """
    out = []
    for d in p.decls:
        out.append(f"{d.kind.value} int{d.width} {d.name};")
    _format_block(p.body, 0, out)
    return "\n".join(out) + "\n"
