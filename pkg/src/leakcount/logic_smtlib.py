# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import logging
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pyparsing as pp

from . import logic_terms as lt
from .errors import SourceSyntaxError, UnsupportedFeature
from .logic_encode import InstrumentedFormula

logger = logging.getLogger(__name__)

SUPPORTED_LOGICS = ("QF_BV", "ALL")


@dataclass(frozen=True)
class Atom:
    kind: str  # sym, num, bv, kw, str
    value: Union[str, int]
    width: int = 0
    pos: Tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class SList:
    items: Tuple[Union["SList", Atom], ...]
    pos: Tuple[int, int] = (0, 0)


SExpr = Union[SList, Atom]


@dataclass(frozen=True)
class Command:
    name: str
    args: tuple = ()
    term: Optional[lt.Term] = None
    pos: Tuple[int, int] = (0, 0)


@dataclass
class SmtScript:
    """Parsed script: every assertion in order plus the full command sequence."""

    assertions: List[lt.Term] = field(default_factory=list)
    commands: List[Command] = field(default_factory=list)
    declarations: Dict[str, lt.Term] = field(default_factory=dict)


def _pos(s, loc):
    return pp.lineno(loc, s), pp.col(loc, s)


@lru_cache(maxsize=None)
def _reader() -> pp.ParserElement:
    LPAR, RPAR = map(pp.Suppress, "()")
    simple = pp.Regex(r"[A-Za-z~!@$%^&*_\-+=<>.?/][0-9A-Za-z~!@$%^&*_\-+=<>.?/]*")
    simple.set_parse_action(lambda s, loc, t: Atom("sym", t[0], 0, _pos(s, loc)))
    quoted = pp.Regex(r"\|[^|\\]*\|")
    quoted.set_parse_action(lambda s, loc, t: Atom("sym", t[0][1:-1], 0, _pos(s, loc)))
    numeral = pp.Regex(r"[0-9]+")
    numeral.set_parse_action(lambda s, loc, t: Atom("num", int(t[0]), 0, _pos(s, loc)))
    hexa = pp.Regex(r"#x[0-9a-fA-F]+")
    hexa.set_parse_action(lambda s, loc, t: Atom("bv", int(t[0][2:], 16), 4 * (len(t[0]) - 2), _pos(s, loc)))
    binary = pp.Regex(r"#b[01]+")
    binary.set_parse_action(lambda s, loc, t: Atom("bv", int(t[0][2:], 2), len(t[0]) - 2, _pos(s, loc)))
    keyword = pp.Regex(r":[0-9A-Za-z~!@$%^&*_\-+=<>.?/]+")
    keyword.set_parse_action(lambda s, loc, t: Atom("kw", t[0], 0, _pos(s, loc)))
    string = pp.QuotedString('"', esc_quote='""')
    string.set_parse_action(lambda s, loc, t: Atom("str", t[0], 0, _pos(s, loc)))
    atom = hexa | binary | numeral | keyword | string | quoted | simple

    sexp = pp.Forward().set_name("s-expression")
    group = pp.Group(LPAR - pp.ZeroOrMore(sexp) + RPAR)
    group.set_parse_action(lambda s, loc, t: SList(tuple(t[0]), _pos(s, loc)))
    sexp <<= group | atom
    script = pp.ZeroOrMore(sexp) + pp.StringEnd()
    script.ignore(pp.Regex(r";[^\n]*"))
    return script


def read_sexprs(text: str) -> List[SExpr]:
    try:
        return list(_reader().parse_string(text, parse_all=True))
    except pp.ParseBaseException as e:
        raise SourceSyntaxError(e.msg, e.lineno, e.col) from None


def _fail(message: str, node: SExpr, error=SourceSyntaxError):
    if error is SourceSyntaxError:
        raise SourceSyntaxError(message, node.pos[0], node.pos[1])
    raise error(f"{node.pos[0]}:{node.pos[1]}: {message}")


def _sym(node: SExpr) -> Optional[str]:
    if isinstance(node, Atom) and node.kind == "sym":
        return node.value
    return None


def _num(node: SExpr) -> int:
    if isinstance(node, Atom) and node.kind == "num":
        return node.value
    _fail("expected a numeral", node)


_LEFT_ASSOC = {
    "bvadd": lt.mk_bvadd,
    "bvmul": lt.mk_bvmul,
    "bvand": lt.mk_bvand,
    "bvor": lt.mk_bvor,
    "bvxor": lt.mk_bvxor,
    "concat": lt.mk_concat,
    "bvsub": lt.mk_bvsub,
}
_BINARY = {
    "bvudiv": lt.mk_bvudiv,
    "bvurem": lt.mk_bvurem,
    "bvshl": lt.mk_bvshl,
    "bvlshr": lt.mk_bvlshr,
    "bvashr": lt.mk_bvashr,
    "bvult": lt.mk_bvult,
    "bvule": lt.mk_bvule,
    "bvugt": lt.mk_bvugt,
    "bvuge": lt.mk_bvuge,
    "bvslt": lt.mk_bvslt,
    "bvsle": lt.mk_bvsle,
    "bvsgt": lt.mk_bvsgt,
    "bvsge": lt.mk_bvsge,
}
_UNARY = {"not": lt.mk_not, "bvnot": lt.mk_bvnot, "bvneg": lt.mk_bvneg}
_INDEXED = {"extract", "zero_extend", "sign_extend"}
_UNSUPPORTED = {
    "let", "forall", "exists", "!", "select", "store", "bvsdiv", "bvsrem", "bvsmod", "bvnand", "bvnor",
    "bvxnor", "bvcomp", "repeat", "rotate_left", "rotate_right",
}


class _TermBuilder:

    def __init__(self, declarations: Dict[str, lt.Term]):
        self.declarations = declarations

    def sort(self, node: SExpr) -> lt.Sort:
        if _sym(node) == "Bool":
            return lt.BOOL
        if isinstance(node, SList) and len(node.items) == 3 and _sym(node.items[0]) == "_" \
                and _sym(node.items[1]) == "BitVec":
            return lt.bv_sort(_num(node.items[2]))
        name = _sym(node) or "compound sort"
        _fail(f"unsupported sort {name} (only Bool and (_ BitVec w))", node, UnsupportedFeature)

    def term(self, node: SExpr) -> lt.Term:
        if isinstance(node, Atom):
            if node.kind == "bv":
                return lt.const(node.value, node.width)
            if node.kind == "num":
                _fail("integer numerals (Int theory)", node, UnsupportedFeature)
            name = node.value
            if name == "true":
                return lt.TRUE
            if name == "false":
                return lt.FALSE
            if node.kind == "sym" and name in self.declarations:
                return self.declarations[name]
            _fail(f"unknown symbol '{name}'", node)
        if not node.items:
            _fail("empty application", node)
        head = node.items[0]
        if isinstance(head, SList):
            return self.indexed_application(head, node)
        op = _sym(head)
        if op == "_":
            return self.indexed_constant(node)
        if op in _UNSUPPORTED:
            _fail(f"'{op}' is not supported", node, UnsupportedFeature)
        args = [self.term(a) for a in node.items[1:]]
        try:
            return self.apply(op, args, node)
        except lt.UnsupportedSort as e:
            _fail(str(e), node)

    def apply(self, op: str, args: List[lt.Term], node: SList) -> lt.Term:
        if op in _UNARY:
            self.arity(op, args, 1, node)
            return _UNARY[op](args[0])
        if op == "and":
            return lt.mk_and(*args)
        if op == "or":
            return lt.mk_or(*args)
        if op == "xor":
            return reduce(lt.mk_xor, args)
        if op == "=>":
            if len(args) < 2:
                self.arity(op, args, 2, node)
            return reduce(lambda acc, a: lt.mk_implies(a, acc), reversed(args[:-1]), args[-1])
        if op == "=":
            if len(args) < 2:
                self.arity(op, args, 2, node)
            return lt.mk_and(*[lt.mk_eq(a, b) for a, b in zip(args, args[1:])])
        if op == "distinct":
            if len(args) < 2:
                self.arity(op, args, 2, node)
            return lt.mk_and(*[lt.mk_distinct(a, b) for i, a in enumerate(args) for b in args[i + 1:]])
        if op == "ite":
            self.arity(op, args, 3, node)
            return lt.mk_ite(*args)
        if op in _LEFT_ASSOC:
            if len(args) < 2:
                self.arity(op, args, 2, node)
            return reduce(_LEFT_ASSOC[op], args)
        if op in _BINARY:
            self.arity(op, args, 2, node)
            return _BINARY[op](*args)
        if op in self.declarations:
            _fail(f"'{op}' is a constant, not a function", node)
        _fail(f"unknown function '{op}'", node, UnsupportedFeature)

    def arity(self, op: str, args, expected: int, node: SList) -> None:
        if len(args) != expected:
            _fail(f"'{op}' expects {expected} arguments, got {len(args)}", node)

    def indexed_constant(self, node: SList) -> lt.Term:
        # (_ bvN w)
        name = _sym(node.items[1]) if len(node.items) == 3 else None
        if name and name.startswith("bv") and name[2:].isdigit():
            return lt.const(int(name[2:]), _num(node.items[2]))
        _fail("malformed indexed constant", node)

    def indexed_application(self, head: SList, node: SList) -> lt.Term:
        if len(head.items) < 3 or _sym(head.items[0]) != "_":
            _fail("malformed indexed operator", head)
        name = _sym(head.items[1])
        if name not in _INDEXED:
            _fail(f"indexed operator '{name}' is not supported", head, UnsupportedFeature)
        indices = [_num(i) for i in head.items[2:]]
        args = [self.term(a) for a in node.items[1:]]
        self.arity(name, args, 1, node)
        try:
            if name == "extract":
                return lt.mk_extract(indices[0], indices[1], args[0])
            if name == "zero_extend":
                return lt.mk_zero_extend(indices[0], args[0])
            return lt.mk_sign_extend(indices[0], args[0])
        except lt.UnsupportedSort as e:
            _fail(str(e), node)


def _symbol_list(node: SExpr) -> Tuple[str, ...]:
    if not isinstance(node, SList):
        _fail("expected a parenthesized symbol list", node)
    names = []
    for item in node.items:
        name = _sym(item)
        if name is None:
            _fail("expected a symbol", item)
        names.append(name)
    return tuple(names)


def parse_smt(text: str) -> SmtScript:
    """
    Reads an SMT-LIB v2 script in the supported QF_BV subset.

    Parameters:
    ----------
    :param text: str
        Script text; `;` starts a comment.

    Return value:
    -------------
    :return: SmtScript
        Assertions, commands (including `assert` with its term) and declared constants.

    Description:
    ------------
    - Supports `set-logic`, `set-info`, `set-option`, `declare-fun` (0-ary),
      `declare-const`, `assert`, `check-sat`, `check-allsat`, `allsat-relevant`,
      `get-model`, `push`, `pop` and `exit`.
    - `let`, quantifiers, arrays and non bit-vector theories raise `UnsupportedFeature`.

    Example usage:
    --------------
    >>> script = parse_smt("(assert true)(check-sat)")
    >>> [c.name for c in script.commands]
    ['assert', 'check-sat']
    """
    script = SmtScript()
    builder = _TermBuilder(script.declarations)
    for node in read_sexprs(text):
        if not isinstance(node, SList) or not node.items or _sym(node.items[0]) is None:
            _fail("expected a command", node)
        name = _sym(node.items[0])
        args = node.items[1:]
        if name == "set-logic":
            logic = _sym(args[0]) if args else None
            if logic not in SUPPORTED_LOGICS:
                _fail(f"logic {logic} is not supported (use QF_BV)", node, UnsupportedFeature)
        elif name in ("set-info", "set-option"):
            continue
        elif name in ("declare-fun", "declare-const"):
            var_name = _sym(args[0]) if args else None
            if var_name is None:
                _fail(f"{name} needs a symbol", node)
            if name == "declare-fun":
                if len(args) != 3 or not isinstance(args[1], SList):
                    _fail("malformed declare-fun", node)
                if args[1].items:
                    _fail("uninterpreted functions with arguments", node, UnsupportedFeature)
                sort_node = args[2]
            else:
                if len(args) != 2:
                    _fail("malformed declare-const", node)
                sort_node = args[1]
            if var_name in script.declarations:
                _fail(f"'{var_name}' declared twice", node)
            script.declarations[var_name] = lt.var(var_name, builder.sort(sort_node))
        elif name == "assert":
            if len(args) != 1:
                _fail("assert takes one term", node)
            t = builder.term(args[0])
            if not t.is_bool:
                _fail("asserted term is not Bool", node)
            script.assertions.append(t)
            script.commands.append(Command("assert", (), t, node.pos))
        elif name in ("check-sat", "get-model", "exit"):
            script.commands.append(Command(name, (), None, node.pos))
        elif name in ("check-allsat", "allsat-relevant"):
            if len(args) != 1:
                _fail(f"{name} takes one symbol list", node)
            names = _symbol_list(args[0])
            for n in names:
                if n not in script.declarations:
                    _fail(f"unknown symbol '{n}'", args[0])
            script.commands.append(Command(name, names, None, node.pos))
        elif name in ("push", "pop"):
            count = _num(args[0]) if args else 1
            script.commands.append(Command(name, (count,), None, node.pos))
        elif name in ("define-fun", "define-sort", "get-value", "get-unsat-core", "check-sat-assuming"):
            _fail(f"command '{name}' is not supported", node, UnsupportedFeature)
        else:
            _fail(f"unknown command '{name}'", node)
    logger.debug("parsed script: %d assertions, %d commands", len(script.assertions), len(script.commands))
    return script


def _declaration_order(terms: Sequence[lt.Term]) -> List[lt.Term]:
    seen = set()
    order = []
    for t in terms:
        stack = [t]
        visited = set()
        while stack:
            node = stack.pop()
            if node in visited:
                continue
            visited.add(node)
            if node.op == "var":
                if node not in seen:
                    seen.add(node)
                    order.append(node)
            else:
                stack.extend(reversed(node.args))
    return order


def emit_smt(f: Union[InstrumentedFormula, Sequence[lt.Term]]) -> str:
    """
    Writes a formula as an SMT-LIB script.

    An `InstrumentedFormula` becomes its declarations, one `assert` per
    conjunct, `allsat-relevant` (when set) and `check-allsat`; a list of terms
    becomes declarations, one `assert` each and `check-sat`.
    """
    if isinstance(f, InstrumentedFormula):
        assertions = list(lt.conjuncts(f.base)) + list(f.bindings)
    else:
        assertions = list(f)
    lines = ["(set-logic QF_BV)"]
    for v in _declaration_order(assertions):
        lines.append(f"(declare-fun {lt.format_symbol(v.name)} () {v.sort})")
    for t in assertions:
        lines.append(f"(assert {lt.format_term(t)})")
    if isinstance(f, InstrumentedFormula):
        if f.relevant:
            lines.append(f"(allsat-relevant ({' '.join(lt.format_symbol(n) for n in f.relevant)}))")
        lines.append(f"(check-allsat ({' '.join(lt.format_symbol(n) for n in f.important)}))")
    else:
        lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def format_value(t: lt.Term, value) -> str:
    if t.is_bool:
        return "true" if value else "false"
    return lt.format_bv_const(value, t.width)
