# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import logging
from functools import lru_cache
from pathlib import Path
from typing import Union

import pyparsing as pp

from .errors import SourceSyntaxError
from .gcl_ast import (
    BINARY_PRECEDENCE, Assert, Assign, Assume, Binary, BoolLit, Call, Decl, If, Lit, Ref, SourceProgram,
    Ternary, Unary, VarKind, While,
)
from .gcl_typing import check_program

logger = logging.getLogger(__name__)

pp.ParserElement.enable_packrat()

KEYWORDS = {
    "if", "else", "while", "assume", "assert", "true", "false", "bool",
    "high", "low", "nondet", "local", "output",
}
FUNCTIONS = ("zext", "sext", "trunc", "slt", "sle", "sgt", "sge", "ashr")


def _pos(s: str, loc: int):
    return pp.lineno(loc, s), pp.col(loc, s)


def _to_int(text: str) -> int:
    lowered = text.lower()
    if lowered.startswith("0x"):
        return int(lowered[2:], 16)
    if lowered.startswith("0b"):
        return int(lowered[2:], 2)
    return int(lowered, 10)


def _fold_binary(s, loc, toks):
    """
    Folds a flat `operand (op operand)*` run into a tree by operator precedence.

    The grammar keeps one level for every binary operator, so parentheses in
    the source are the only thing that adds parser recursion.
    """
    operands = [toks[0]]
    operators = []

    def reduce_top():
        op = operators.pop()
        right = operands.pop()
        left = operands.pop()
        operands.append(Binary(op, left, right, None, getattr(left, "pos", _pos(s, loc))))

    for i in range(1, len(toks), 2):
        op = toks[i]
        while operators and BINARY_PRECEDENCE[operators[-1]] >= BINARY_PRECEDENCE[op]:
            reduce_top()
        operators.append(op)
        operands.append(toks[i + 1])
    while operators:
        reduce_top()
    return operands[0]


def _fold_unary(s, loc, toks):
    node = toks[-1]
    for op in reversed(toks[:-1]):
        node = Unary(op, node, None, _pos(s, loc))
    return node


def _fold_ternary(s, loc, toks):
    if len(toks) == 1:
        return toks[0]
    return Ternary(toks[0], toks[1], toks[2], None, _pos(s, loc))


def _make_call(s, loc, toks):
    func = toks[0]
    args = list(toks[1:])
    param = None
    if func in ("zext", "sext", "trunc"):
        if len(args) != 2 or not isinstance(args[1], Lit):
            raise pp.ParseFatalException(s, loc, f"{func}(expr, width) needs a literal width")
        param = args[1].value
        args = args[:1]
    return Call(func, tuple(args), param, None, _pos(s, loc))


def _make_decls(s, loc, toks):
    kind = VarKind(toks[0])
    type_name = toks[1]
    width = 1 if type_name == "bool" else int(type_name[3:])
    return [Decl(name, kind, width, _pos(s, loc)) for name in toks[2:]]


def _make_if(s, loc, toks):
    other = tuple(toks[2]) if len(toks) > 2 else ()
    return If(toks[0], tuple(toks[1]), other, _pos(s, loc))


@lru_cache(maxsize=None)
def _grammar() -> pp.ParserElement:
    LPAR, RPAR, LBRACE, RBRACE, SEMI, COMMA = map(pp.Suppress, "(){};,")

    ident = pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*").set_name("identifier")
    ident.add_condition(lambda t: t[0] not in KEYWORDS and t[0] not in FUNCTIONS and not _is_type(t[0]))

    number = pp.Regex(r"0[xX][0-9a-fA-F]+|0[bB][01]+|[0-9]+").set_name("integer literal")
    number.set_parse_action(lambda s, loc, t: Lit(_to_int(t[0]), None, _pos(s, loc)))

    boolean = (pp.Keyword("true") | pp.Keyword("false")).set_parse_action(
        lambda s, loc, t: BoolLit(t[0] == "true", 0, _pos(s, loc))
    )
    ref = ident.copy().add_parse_action(lambda s, loc, t: Ref(t[0], None, _pos(s, loc)))

    expr = pp.Forward().set_name("expression")
    func = pp.MatchFirst([pp.Keyword(f) for f in FUNCTIONS])
    call = (func + LPAR - pp.DelimitedList(expr) + RPAR).set_parse_action(_make_call)
    operand = call | number | boolean | ref | (LPAR + expr + RPAR)

    # one_of tries the longest spelling first, so `<<` wins over `<` and `&&` over `&`
    unary_op = pp.one_of("- ~ !").set_name("unary operator")
    binary_op = pp.one_of(list(BINARY_PRECEDENCE)).set_name("binary operator")
    unary = (pp.ZeroOrMore(unary_op) + operand).set_parse_action(_fold_unary)
    binary = (unary + pp.ZeroOrMore(binary_op + unary)).set_parse_action(_fold_binary)
    QMARK, COLON = map(pp.Suppress, "?:")
    expr <<= (binary + pp.Optional(QMARK - expr + COLON - expr)).set_parse_action(_fold_ternary)

    stmt = pp.Forward().set_name("statement")
    block = LBRACE - pp.Group(pp.ZeroOrMore(stmt)) + RBRACE
    body = block | pp.Group(stmt)

    assign_op = pp.Regex(r"=(?!=)").suppress()
    assign = (ident + assign_op - expr + SEMI).set_parse_action(
        lambda s, loc, t: Assign(t[0], t[1], _pos(s, loc))
    )
    assume = (pp.Keyword("assume").suppress() - LPAR + expr + RPAR + SEMI).set_parse_action(
        lambda s, loc, t: Assume(t[0], _pos(s, loc))
    )
    assertion = (pp.Keyword("assert").suppress() - LPAR + expr + RPAR + SEMI).set_parse_action(
        lambda s, loc, t: Assert(t[0], _pos(s, loc))
    )
    if_stmt = (
        pp.Keyword("if").suppress() - LPAR + expr + RPAR + body
        + pp.Optional(pp.Keyword("else").suppress() - body)
    ).set_parse_action(_make_if)
    while_stmt = (pp.Keyword("while").suppress() - LPAR + expr + RPAR + body).set_parse_action(
        lambda s, loc, t: While(t[0], tuple(t[1]), _pos(s, loc))
    )
    stmt <<= if_stmt | while_stmt | assume | assertion | assign

    kind = pp.MatchFirst([pp.Keyword(k.value) for k in VarKind])
    type_name = (pp.Regex(r"int[0-9]+") | pp.Keyword("bool")).set_name("type")
    decl = (kind - type_name + pp.DelimitedList(ident) + SEMI).set_parse_action(_make_decls)

    program = pp.Group(pp.ZeroOrMore(decl)) + pp.Group(pp.ZeroOrMore(stmt)) + pp.StringEnd()
    program.ignore(pp.python_style_comment)
    return program


def _is_type(word: str) -> bool:
    return word.startswith("int") and word[3:].isdigit()


def _found(text: str, loc: int) -> str:
    rest = text[loc:].split()
    if not rest:
        return "end of input"
    return repr(rest[0][:20])


def parse(text: str, name: str = "<input>") -> SourceProgram:
    """
    Parses and width-checks guarded-command source text.

    Parameters:
    ----------
    :param text: str
        Program source (declarations first, then statements; `#` starts a comment).
    :param name: str
        File name reported in diagnostics.

    Return value:
    -------------
    :return: SourceProgram
        The typed AST.

    Example usage:
    --------------
    >>> p = parse("high int32 H; output int32 O; O = H + 1;")
    >>> len(p.body)
    1

    Possible errors:
    ----------------
    - `SourceSyntaxError`: bad syntax, nesting deeper than the interpreter stack allows,
      undeclared variable, output count other than one.
    - `WidthError`: literal overflow or mixed widths without cast.
    """
    try:
        decl_groups, body = _grammar().parse_string(text, parse_all=True)
    except pp.ParseBaseException as e:
        file = None if name == "<input>" else name
        message = f"{e.msg}, found {_found(text, e.loc)}"
        raise SourceSyntaxError(message, e.lineno, e.col, file) from None
    except RecursionError:
        file = None if name == "<input>" else name
        raise SourceSyntaxError("expression nested too deeply", 1, 1, file) from None
    decls = tuple(d for d in decl_groups)
    program = check_program(decls, tuple(body), name)
    logger.debug("parsed %s: %d declarations, %d statements", name, len(program.decls), len(program.body))
    return program


def load_program(path: Union[str, Path]) -> SourceProgram:
    """Reads a UTF-8 `.gcl` file and parses it."""
    source = Path(path)
    return parse(source.read_text(encoding="utf-8"), str(source))
