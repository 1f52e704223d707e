# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

"""
First-order term IR over Booleans and fixed-width bit-vectors.

Terms are hash-consed: two structurally equal terms are the same object, so
identity comparison is structural equality and terms can key dictionaries.
Constructors (`mk_*`) check operator signatures and apply local
simplifications (constant folding, neutral elements, `x - x = 0`, ...).
Constructors are idempotent on their own results, which keeps the SMT-LIB
printer and reader a fixpoint.
"""

import logging
import threading
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple, Union

from . import logic_bv as bv
from .errors import UnsupportedSort

logger = logging.getLogger(__name__)

Value = Union[bool, int]


@dataclass(frozen=True)
class Sort:
    """Term sort: width 0 is Bool, width w > 0 is BitVec(w)."""

    width: int

    @property
    def is_bool(self) -> bool:
        return self.width == 0

    def __str__(self) -> str:
        if self.is_bool:
            return "Bool"
        return f"(_ BitVec {self.width})"


BOOL = Sort(0)


def bv_sort(width: int) -> Sort:
    if width < 1:
        raise UnsupportedSort(f"bit-vector width must be positive, got {width}")
    return Sort(width)


class Term:
    """Hash-consed term node. Build terms with the module constructors only."""

    __slots__ = ("op", "args", "params", "sort", "_vars")

    def __init__(self, op: str, args: Tuple["Term", ...], params: tuple, sort: Sort):
        self.op = op
        self.args = args
        self.params = params
        self.sort = sort
        self._vars: Optional[FrozenSet["Term"]] = None

    @property
    def width(self) -> int:
        return self.sort.width

    @property
    def is_bool(self) -> bool:
        return self.sort.is_bool

    @property
    def name(self) -> str:
        if self.op != "var":
            raise AttributeError(f"{self.op} term has no name")
        return self.params[0]

    @property
    def value(self) -> Value:
        if self.op == "const":
            return self.params[0]
        if self.op in ("true", "false"):
            return self.op == "true"
        raise AttributeError(f"{self.op} term has no value")

    def __repr__(self) -> str:
        return format_term(self)

    def __reduce__(self):
        return (apply_op, (self.op, self.args, self.params, self.sort))


_TABLE: Dict[tuple, Term] = {}
_TABLE_LOCK = threading.Lock()


def _make(op: str, args: Tuple[Term, ...], params: tuple, sort: Sort) -> Term:
    key = (op, args, params, sort)
    term = _TABLE.get(key)
    if term is not None:
        return term
    with _TABLE_LOCK:
        term = _TABLE.get(key)
        if term is None:
            term = Term(op, args, params, sort)
            _TABLE[key] = term
    return term


TRUE = _make("true", (), (), BOOL)
FALSE = _make("false", (), (), BOOL)


# Leaves

def var(name: str, sort: Sort) -> Term:
    return _make("var", (), (name,), sort)


def bool_var(name: str) -> Term:
    return var(name, BOOL)


def bv_var(name: str, width: int) -> Term:
    return var(name, bv_sort(width))


def const(value: int, width: int) -> Term:
    return _make("const", (), (bv.norm(value, width),), bv_sort(width))


def bool_const(value: bool) -> Term:
    return TRUE if value else FALSE


def is_const(t: Term) -> bool:
    return t.op in ("const", "true", "false")


def is_var(t: Term) -> bool:
    return t.op == "var"


def _is_bv_const(t: Term, value: Optional[int] = None) -> bool:
    return t.op == "const" and (value is None or t.params[0] == value)


def _is_ones(t: Term) -> bool:
    return t.op == "const" and t.params[0] == bv.mask(t.width)


# Signature checks

def _need_bool(*terms: Term) -> None:
    for t in terms:
        if not t.is_bool:
            raise UnsupportedSort(f"expected Bool, got {t.sort}: {t}")


def _need_bv(*terms: Term) -> int:
    width = None
    for t in terms:
        if t.is_bool:
            raise UnsupportedSort(f"expected bit-vector, got Bool: {t}")
        if width is None:
            width = t.width
        elif t.width != width:
            raise UnsupportedSort(f"width mismatch: {width} vs {t.width} in {t}")
    return width


# Boolean connectives

def mk_not(a: Term) -> Term:
    _need_bool(a)
    if a is TRUE:
        return FALSE
    if a is FALSE:
        return TRUE
    if a.op == "not":
        return a.args[0]
    return _make("not", (a,), (), BOOL)


def _flatten(op: str, args: Iterable[Term]) -> list:
    out = []
    for a in args:
        _need_bool(a)
        if a.op == op:
            out.extend(a.args)
        else:
            out.append(a)
    return out


def mk_and(*args: Term) -> Term:
    items = []
    seen = set()
    for a in _flatten("and", args):
        if a is FALSE:
            return FALSE
        if a is TRUE or a in seen:
            continue
        seen.add(a)
        items.append(a)
    for a in items:
        if a.op == "not" and a.args[0] in seen:
            return FALSE
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return _make("and", tuple(items), (), BOOL)


def mk_or(*args: Term) -> Term:
    items = []
    seen = set()
    for a in _flatten("or", args):
        if a is TRUE:
            return TRUE
        if a is FALSE or a in seen:
            continue
        seen.add(a)
        items.append(a)
    for a in items:
        if a.op == "not" and a.args[0] in seen:
            return TRUE
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return _make("or", tuple(items), (), BOOL)


def mk_implies(a: Term, b: Term) -> Term:
    _need_bool(a, b)
    if a is FALSE or b is TRUE or a is b:
        return TRUE
    if a is TRUE:
        return b
    if b is FALSE:
        return mk_not(a)
    return _make("=>", (a, b), (), BOOL)


def mk_eq(a: Term, b: Term) -> Term:
    if a.sort != b.sort:
        raise UnsupportedSort(f"cannot compare {a.sort} with {b.sort}")
    if a is b:
        return TRUE
    if a.is_bool:
        if a is TRUE:
            return b
        if b is TRUE:
            return a
        if a is FALSE:
            return mk_not(b)
        if b is FALSE:
            return mk_not(a)
        if (a.op == "not" and a.args[0] is b) or (b.op == "not" and b.args[0] is a):
            return FALSE
    elif a.op == "const" and b.op == "const":
        return bool_const(a.params[0] == b.params[0])
    return _make("=", (a, b), (), BOOL)


def mk_distinct(a: Term, b: Term) -> Term:
    return mk_not(mk_eq(a, b))


def mk_xor(a: Term, b: Term) -> Term:
    _need_bool(a, b)
    return mk_not(mk_eq(a, b))


def mk_ite(c: Term, t: Term, e: Term) -> Term:
    _need_bool(c)
    if t.sort != e.sort:
        raise UnsupportedSort(f"ite branches differ: {t.sort} vs {e.sort}")
    if c is TRUE:
        return t
    if c is FALSE:
        return e
    if t is e:
        return t
    if t.is_bool:
        if t is TRUE and e is FALSE:
            return c
        if t is FALSE and e is TRUE:
            return mk_not(c)
    return _make("ite", (c, t, e), (), t.sort)


# Bit-vector arithmetic and logic

def _binary(op: str, a: Term, b: Term) -> Term:
    width = _need_bv(a, b)
    return _make(op, (a, b), (), bv_sort(width))


def mk_bvadd(a: Term, b: Term) -> Term:
    width = _need_bv(a, b)
    if a.op == "const" and b.op == "const":
        return const(bv.add(a.value, b.value, width), width)
    if a.op == "const":
        a, b = b, a
    if _is_bv_const(b, 0):
        return a
    if b.op == "const" and a.op == "bvadd" and a.args[1].op == "const":
        return mk_bvadd(a.args[0], const(a.args[1].value + b.value, width))
    return _binary("bvadd", a, b)


def mk_bvsub(a: Term, b: Term) -> Term:
    width = _need_bv(a, b)
    if a is b:
        return const(0, width)
    if b.op == "const":
        return mk_bvadd(a, const(bv.neg(b.value, width), width))
    if b.op == "bvneg":
        return mk_bvadd(a, b.args[0])
    return _binary("bvsub", a, b)


def mk_bvneg(a: Term) -> Term:
    width = _need_bv(a)
    if a.op == "const":
        return const(bv.neg(a.value, width), width)
    if a.op == "bvneg":
        return a.args[0]
    return _make("bvneg", (a,), (), a.sort)


def mk_bvmul(a: Term, b: Term) -> Term:
    width = _need_bv(a, b)
    if a.op == "const" and b.op == "const":
        return const(bv.mul(a.value, b.value, width), width)
    if a.op == "const":
        a, b = b, a
    if _is_bv_const(b, 0):
        return b
    if _is_bv_const(b, 1):
        return a
    return _binary("bvmul", a, b)


def mk_bvudiv(a: Term, b: Term) -> Term:
    width = _need_bv(a, b)
    if a.op == "const" and b.op == "const":
        return const(bv.udiv(a.value, b.value, width), width)
    if _is_bv_const(b, 1):
        return a
    return _binary("bvudiv", a, b)


def mk_bvurem(a: Term, b: Term) -> Term:
    width = _need_bv(a, b)
    if a.op == "const" and b.op == "const":
        return const(bv.urem(a.value, b.value, width), width)
    if _is_bv_const(b, 1):
        return const(0, width)
    return _binary("bvurem", a, b)


def mk_bvand(a: Term, b: Term) -> Term:
    width = _need_bv(a, b)
    if a.op == "const" and b.op == "const":
        return const(a.value & b.value, width)
    if a.op == "const":
        a, b = b, a
    if _is_bv_const(b, 0):
        return b
    if _is_ones(b) or a is b:
        return a
    return _binary("bvand", a, b)


def mk_bvor(a: Term, b: Term) -> Term:
    width = _need_bv(a, b)
    if a.op == "const" and b.op == "const":
        return const(a.value | b.value, width)
    if a.op == "const":
        a, b = b, a
    if _is_bv_const(b, 0) or a is b:
        return a
    if _is_ones(b):
        return b
    return _binary("bvor", a, b)


def mk_bvxor(a: Term, b: Term) -> Term:
    width = _need_bv(a, b)
    if a.op == "const" and b.op == "const":
        return const(a.value ^ b.value, width)
    if a is b:
        return const(0, width)
    if a.op == "const":
        a, b = b, a
    if _is_bv_const(b, 0):
        return a
    return _binary("bvxor", a, b)


def mk_bvnot(a: Term) -> Term:
    width = _need_bv(a)
    if a.op == "const":
        return const(bv.bnot(a.value, width), width)
    if a.op == "bvnot":
        return a.args[0]
    return _make("bvnot", (a,), (), a.sort)


def _shift(op: str, fold: Callable[[int, int, int], int], a: Term, b: Term) -> Term:
    width = _need_bv(a, b)
    if a.op == "const" and b.op == "const":
        return const(fold(a.value, b.value, width), width)
    if _is_bv_const(b, 0):
        return a
    return _binary(op, a, b)


def mk_bvshl(a: Term, b: Term) -> Term:
    return _shift("bvshl", bv.shl, a, b)


def mk_bvlshr(a: Term, b: Term) -> Term:
    return _shift("bvlshr", bv.lshr, a, b)


def mk_bvashr(a: Term, b: Term) -> Term:
    return _shift("bvashr", bv.ashr, a, b)


def mk_concat(a: Term, b: Term) -> Term:
    if a.is_bool or b.is_bool:
        raise UnsupportedSort("concat needs bit-vector operands")
    width = a.width + b.width
    if a.op == "const" and b.op == "const":
        return const(bv.concat(a.value, b.value, b.width), width)
    return _make("concat", (a, b), (), bv_sort(width))


def mk_extract(hi: int, lo: int, a: Term) -> Term:
    width = _need_bv(a)
    if not 0 <= lo <= hi < width:
        raise UnsupportedSort(f"extract({hi},{lo}) out of range for width {width}")
    if lo == 0 and hi == width - 1:
        return a
    if a.op == "const":
        return const(bv.extract(a.value, hi, lo), hi - lo + 1)
    if a.op == "extract":
        inner_lo = a.params[1]
        return mk_extract(hi + inner_lo, lo + inner_lo, a.args[0])
    return _make("extract", (a,), (hi, lo), bv_sort(hi - lo + 1))


def mk_zero_extend(extra: int, a: Term) -> Term:
    width = _need_bv(a)
    if extra == 0:
        return a
    if a.op == "const":
        return const(a.value, width + extra)
    return _make("zero_extend", (a,), (extra,), bv_sort(width + extra))


def mk_sign_extend(extra: int, a: Term) -> Term:
    width = _need_bv(a)
    if extra == 0:
        return a
    if a.op == "const":
        return const(bv.sign_extend(a.value, extra, width), width + extra)
    return _make("sign_extend", (a,), (extra,), bv_sort(width + extra))


# Comparisons

def _compare(op: str, fold: Callable[[int, int, int], bool], a: Term, b: Term) -> Term:
    width = _need_bv(a, b)
    if a.op == "const" and b.op == "const":
        return bool_const(fold(a.value, b.value, width))
    if a is b:
        return bool_const(op in ("bvule", "bvsle"))
    return _make(op, (a, b), (), BOOL)


def mk_bvult(a: Term, b: Term) -> Term:
    if _is_bv_const(b, 0):
        _need_bv(a, b)
        return FALSE
    return _compare("bvult", bv.ult, a, b)


def mk_bvule(a: Term, b: Term) -> Term:
    if _is_bv_const(a, 0):
        _need_bv(a, b)
        return TRUE
    return _compare("bvule", bv.ule, a, b)


def mk_bvslt(a: Term, b: Term) -> Term:
    return _compare("bvslt", bv.slt, a, b)


def mk_bvsle(a: Term, b: Term) -> Term:
    return _compare("bvsle", bv.sle, a, b)


def mk_bvugt(a: Term, b: Term) -> Term:
    return mk_bvult(b, a)


def mk_bvuge(a: Term, b: Term) -> Term:
    return mk_bvule(b, a)


def mk_bvsgt(a: Term, b: Term) -> Term:
    return mk_bvslt(b, a)


def mk_bvsge(a: Term, b: Term) -> Term:
    return mk_bvsle(b, a)


# Generic reconstruction

_NARY = {"and": mk_and, "or": mk_or}
_FIXED = {
    "not": mk_not,
    "=>": mk_implies,
    "=": mk_eq,
    "ite": mk_ite,
    "bvadd": mk_bvadd,
    "bvsub": mk_bvsub,
    "bvneg": mk_bvneg,
    "bvmul": mk_bvmul,
    "bvudiv": mk_bvudiv,
    "bvurem": mk_bvurem,
    "bvand": mk_bvand,
    "bvor": mk_bvor,
    "bvxor": mk_bvxor,
    "bvnot": mk_bvnot,
    "bvshl": mk_bvshl,
    "bvlshr": mk_bvlshr,
    "bvashr": mk_bvashr,
    "concat": mk_concat,
    "bvult": mk_bvult,
    "bvule": mk_bvule,
    "bvslt": mk_bvslt,
    "bvsle": mk_bvsle,
}
_INDEXED = {"extract": mk_extract, "zero_extend": mk_zero_extend, "sign_extend": mk_sign_extend}

BOOL_CONNECTIVES = frozenset({"not", "and", "or", "=>", "ite", "=", "true", "false", "var"})


def apply_op(op: str, args: Sequence[Term], params: tuple = (), sort: Optional[Sort] = None) -> Term:
    """Rebuilds a node through its simplifying constructor."""
    if op == "var":
        return var(params[0], sort)
    if op == "const":
        return const(params[0], sort.width)
    if op == "true":
        return TRUE
    if op == "false":
        return FALSE
    if op in _NARY:
        return _NARY[op](*args)
    if op in _FIXED:
        return _FIXED[op](*args)
    if op in _INDEXED:
        return _INDEXED[op](*params, *args)
    raise UnsupportedSort(f"unknown operator {op}")


def free_vars(t: Term) -> FrozenSet[Term]:
    """Variable leaves of `t` (cached on the node)."""
    if t._vars is not None:
        return t._vars
    stack = [t]
    order = []
    while stack:
        node = stack.pop()
        if node._vars is not None:
            continue
        order.append(node)
        stack.extend(a for a in node.args if a._vars is None)
    for node in reversed(order):
        if node._vars is not None:
            continue
        if node.op == "var":
            node._vars = frozenset((node,))
        elif not node.args:
            node._vars = frozenset()
        else:
            acc = set()
            for a in node.args:
                acc.update(free_vars(a))
            node._vars = frozenset(acc)
    return t._vars


def free_var_names(t: Term) -> FrozenSet[str]:
    return frozenset(v.name for v in free_vars(t))


def substitute(t: Term, mapping: Mapping[str, Term]) -> Term:
    """
    Replaces variables by name and re-simplifies.

    Example usage:
    --------------
    >>> h = bv_var("H", 8)
    >>> substitute(mk_bvadd(h, const(1, 8)), {"H": bv_var("H!1", 8)})
    (bvadd H!1 #x01)
    """
    cache: Dict[Term, Term] = {}

    def walk(node: Term) -> Term:
        hit = cache.get(node)
        if hit is not None:
            return hit
        if node.op == "var":
            repl = mapping.get(node.name, node)
            if repl.sort != node.sort:
                raise UnsupportedSort(f"substitution for {node.name} changes sort")
            out = repl
        elif not node.args:
            out = node
        else:
            out = apply_op(node.op, [walk(a) for a in node.args], node.params, node.sort)
        cache[node] = out
        return out

    return walk(t)


def evaluate(t: Term, env: Mapping[str, Value], default: bool = True) -> Value:
    """
    Evaluates `t` under a concrete assignment of its variables.

    Parameters:
    ----------
    :param t: Term
        Term to evaluate.
    :param env: Mapping[str, bool | int]
        Values by variable name; bit-vector values are unsigned patterns.
    :param default: bool
        When True, missing variables read as 0/false; otherwise a KeyError is raised.

    Return value:
    -------------
    :return: bool for Bool-sorted terms, int in [0, 2^w) otherwise.

    Example usage:
    --------------
    >>> x = bv_var("x", 4)
    >>> evaluate(mk_bvult(x, const(3, 4)), {"x": 2})
    True
    """
    cache: Dict[Term, Value] = {}

    def walk(node: Term) -> Value:
        hit = cache.get(node)
        if hit is not None:
            return hit
        op = node.op
        if op == "var":
            if node.name in env:
                raw = env[node.name]
            elif default:
                raw = False if node.is_bool else 0
            else:
                raise KeyError(node.name)
            out = bool(raw) if node.is_bool else bv.norm(int(raw), node.width)
        elif op == "const":
            out = node.params[0]
        elif op == "true":
            out = True
        elif op == "false":
            out = False
        elif op == "ite":
            out = walk(node.args[1]) if walk(node.args[0]) else walk(node.args[2])
        else:
            vals = [walk(a) for a in node.args]
            out = _apply_concrete(node, vals)
        cache[node] = out
        return out

    return walk(t)


def _apply_concrete(node: Term, vals: list) -> Value:
    op = node.op
    w = node.args[0].width if node.args else 0
    if op == "not":
        return not vals[0]
    if op == "and":
        return all(vals)
    if op == "or":
        return any(vals)
    if op == "=>":
        return (not vals[0]) or vals[1]
    if op == "=":
        return vals[0] == vals[1]
    if op == "bvadd":
        return bv.add(vals[0], vals[1], w)
    if op == "bvsub":
        return bv.sub(vals[0], vals[1], w)
    if op == "bvneg":
        return bv.neg(vals[0], w)
    if op == "bvmul":
        return bv.mul(vals[0], vals[1], w)
    if op == "bvudiv":
        return bv.udiv(vals[0], vals[1], w)
    if op == "bvurem":
        return bv.urem(vals[0], vals[1], w)
    if op == "bvand":
        return vals[0] & vals[1]
    if op == "bvor":
        return vals[0] | vals[1]
    if op == "bvxor":
        return vals[0] ^ vals[1]
    if op == "bvnot":
        return bv.bnot(vals[0], w)
    if op == "bvshl":
        return bv.shl(vals[0], vals[1], w)
    if op == "bvlshr":
        return bv.lshr(vals[0], vals[1], w)
    if op == "bvashr":
        return bv.ashr(vals[0], vals[1], w)
    if op == "concat":
        return bv.concat(vals[0], vals[1], node.args[1].width)
    if op == "extract":
        return bv.extract(vals[0], node.params[0], node.params[1])
    if op == "zero_extend":
        return vals[0]
    if op == "sign_extend":
        return bv.sign_extend(vals[0], node.params[0], w)
    if op == "bvult":
        return bv.ult(vals[0], vals[1], w)
    if op == "bvule":
        return bv.ule(vals[0], vals[1], w)
    if op == "bvslt":
        return bv.slt(vals[0], vals[1], w)
    if op == "bvsle":
        return bv.sle(vals[0], vals[1], w)
    raise UnsupportedSort(f"cannot evaluate operator {op}")


# Printing

_SIMPLE_SYMBOL_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789~!@$%^&*_-+=<>.?/")


def format_symbol(name: str) -> str:
    if name and not name[0].isdigit() and all(ch in _SIMPLE_SYMBOL_CHARS for ch in name):
        return name
    return f"|{name}|"


def format_bv_const(value: int, width: int) -> str:
    if width % 4 == 0:
        return "#x" + format(value, f"0{width // 4}x")
    return "#b" + format(value, f"0{width}b")


def format_term(t: Term) -> str:
    """SMT-LIB v2 rendering of a term, e.g. `(bvult H_0 #x00000010)`."""
    cache: Dict[Term, str] = {}

    def walk(node: Term) -> str:
        hit = cache.get(node)
        if hit is not None:
            return hit
        op = node.op
        if op == "var":
            out = format_symbol(node.name)
        elif op == "const":
            out = format_bv_const(node.params[0], node.width)
        elif op in ("true", "false"):
            out = op
        else:
            inner = " ".join(walk(a) for a in node.args)
            if op == "extract":
                head = f"(_ extract {node.params[0]} {node.params[1]})"
            elif op in _INDEXED:
                head = f"(_ {op} {node.params[0]})"
            else:
                head = op
            out = f"({head} {inner})"
        cache[node] = out
        return out

    return walk(t)


def conjuncts(t: Term) -> Tuple[Term, ...]:
    if t.op == "and":
        return t.args
    if t is TRUE:
        return ()
    return (t,)
