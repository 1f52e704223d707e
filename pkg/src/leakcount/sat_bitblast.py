# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import logging
from typing import Dict, List, Sequence, Tuple, Union

from . import logic_terms as lt
from .errors import UnsupportedSort
from .sat_dpll import TRUE_LIT, DpllEngine

logger = logging.getLogger(__name__)

T = TRUE_LIT
F = -TRUE_LIT

Bits = List[int]
Blasted = Union[int, Bits]


class BitBlaster:
    """
    Translates terms to engine literals.

    A Bool term maps to one literal, a BitVec(w) term to w literals (LSB
    first). Gate definitions are permanent (frame 0), so translations are
    cached for the life of the engine.
    """

    def __init__(self, engine: DpllEngine):
        self.engine = engine
        self.cache: Dict[lt.Term, Blasted] = {}
        self.variables: Dict[str, lt.Term] = {}
        self.gates: Dict[tuple, int] = {}

    # Variables

    def is_blasted(self, t: lt.Term) -> bool:
        return t in self.cache

    def declare(self, v: lt.Term) -> Blasted:
        hit = self.cache.get(v)
        if hit is not None:
            return hit
        if v.is_bool:
            out = self.engine.new_var()
        else:
            out = [self.engine.new_var() for _ in range(v.width)]
        self.cache[v] = out
        self.variables[v.name] = v
        return out

    def alias(self, v: lt.Term, rhs: lt.Term) -> bool:
        """Binds a not yet translated variable to the translation of `rhs`."""
        if v in self.cache or v in lt.free_vars(rhs):
            return False
        self.cache[v] = self.blast(rhs)
        self.variables[v.name] = v
        return True

    # Gates

    def _def(self, clauses: Sequence[Sequence[int]]) -> None:
        for c in clauses:
            self.engine.add_clause(c, 0)

    def g_and(self, a: int, b: int) -> int:
        if a == F or b == F or a == -b:
            return F
        if a == T or a == b:
            return b
        if b == T:
            return a
        key = ("and", min(a, b), max(a, b))
        out = self.gates.get(key)
        if out is None:
            out = self.engine.new_var()
            self._def([(-out, a), (-out, b), (out, -a, -b)])
            self.gates[key] = out
        return out

    def g_or(self, a: int, b: int) -> int:
        return -self.g_and(-a, -b)

    def g_and_n(self, lits: Sequence[int]) -> int:
        items = []
        seen = set()
        for lit in lits:
            if lit == F or -lit in seen:
                return F
            if lit == T or lit in seen:
                continue
            seen.add(lit)
            items.append(lit)
        if not items:
            return T
        if len(items) == 1:
            return items[0]
        if len(items) == 2:
            return self.g_and(items[0], items[1])
        key = ("and",) + tuple(sorted(items))
        out = self.gates.get(key)
        if out is None:
            out = self.engine.new_var()
            self._def([(-out, lit) for lit in items] + [[out] + [-lit for lit in items]])
            self.gates[key] = out
        return out

    def g_or_n(self, lits: Sequence[int]) -> int:
        return -self.g_and_n([-lit for lit in lits])

    def g_xor(self, a: int, b: int) -> int:
        if a == F:
            return b
        if b == F:
            return a
        if a == T:
            return -b
        if b == T:
            return -a
        if a == b:
            return F
        if a == -b:
            return T
        negate = (a < 0) != (b < 0)
        a, b = abs(a), abs(b)
        key = ("xor", min(a, b), max(a, b))
        out = self.gates.get(key)
        if out is None:
            out = self.engine.new_var()
            self._def([(-out, a, b), (-out, -a, -b), (out, -a, b), (out, a, -b)])
            self.gates[key] = out
        return -out if negate else out

    def g_ite(self, c: int, t: int, e: int) -> int:
        if c == T or t == e:
            return t
        if c == F:
            return e
        if t == -e:
            return -self.g_xor(c, t)
        if t == T or t == c:
            return self.g_or(c, e)
        if t == F or t == -c:
            return self.g_and(-c, e)
        if e == T or e == -c:
            return self.g_or(-c, t)
        if e == F or e == c:
            return self.g_and(c, t)
        if c < 0:
            c, t, e = -c, e, t
        key = ("ite", c, t, e)
        out = self.gates.get(key)
        if out is None:
            out = self.engine.new_var()
            self._def([(-c, -t, out), (-c, t, -out), (c, -e, out), (c, e, -out), (-t, -e, out), (t, e, -out)])
            self.gates[key] = out
        return out

    def g_maj(self, a: int, b: int, c: int) -> int:
        for x, y, z in ((a, b, c), (b, a, c), (c, a, b)):
            if x == T:
                return self.g_or(y, z)
            if x == F:
                return self.g_and(y, z)
        if a == b or a == c:
            return a
        if b == c:
            return b
        if a == -b:
            return c
        if a == -c:
            return b
        if b == -c:
            return a
        key = ("maj",) + tuple(sorted((a, b, c)))
        out = self.gates.get(key)
        if out is None:
            out = self.engine.new_var()
            self._def([
                (-a, -b, out), (-a, -c, out), (-b, -c, out),
                (a, b, -out), (a, c, -out), (b, c, -out),
            ])
            self.gates[key] = out
        return out

    # Word-level circuits

    def add(self, a: Bits, b: Bits, carry: int = F) -> Tuple[Bits, int]:
        out = []
        for x, y in zip(a, b):
            out.append(self.g_xor(self.g_xor(x, y), carry))
            carry = self.g_maj(x, y, carry)
        return out, carry

    def sub(self, a: Bits, b: Bits) -> Bits:
        return self.add(a, [-y for y in b], T)[0]

    def mul(self, a: Bits, b: Bits) -> Bits:
        w = len(a)
        acc = [F] * w
        for i in range(w):
            if b[i] == F:
                continue
            partial = [self.g_and(a[j], b[i]) for j in range(w - i)]
            acc[i:] = self.add(acc[i:], partial)[0]
        return acc

    def udivrem(self, a: Bits, b: Bits) -> Tuple[Bits, Bits]:
        # Restoring division; b = 0 yields all-ones quotient and remainder a.
        w = len(a)
        divisor = list(b) + [F]
        rem = [F] * (w + 1)
        quotient = [F] * w
        for i in range(w - 1, -1, -1):
            rem = [a[i]] + rem[:-1]
            diff, no_borrow = self.add(rem, [-y for y in divisor], T)
            quotient[i] = no_borrow
            rem = [self.g_ite(no_borrow, d, r) for d, r in zip(diff, rem)]
        return quotient, rem[:w]

    def shift(self, op: str, a: Bits, b: Bits) -> Bits:
        w = len(a)
        fill = a[-1] if op == "bvashr" else F
        res = list(a)
        for k, bit in enumerate(b):
            s = 1 << k
            if s >= w:
                over = self.g_or_n(b[k:])
                res = [self.g_ite(over, fill, r) for r in res]
                break
            if op == "bvshl":
                shifted = [F] * s + res[:w - s]
            else:
                shifted = res[s:] + [fill] * s
            res = [self.g_ite(bit, x, y) for x, y in zip(shifted, res)]
        return res

    def ult(self, a: Bits, b: Bits) -> int:
        # a < b iff a + ~b + 1 produces no carry out
        _, carry = self.add(a, [-y for y in b], T)
        return -carry

    def slt(self, a: Bits, b: Bits) -> int:
        return self.ult(a[:-1] + [-a[-1]], b[:-1] + [-b[-1]])

    def equal(self, a: Blasted, b: Blasted) -> int:
        if isinstance(a, int):
            return -self.g_xor(a, b)
        return self.g_and_n([-self.g_xor(x, y) for x, y in zip(a, b)])

    # Terms

    def blast(self, t: lt.Term) -> Blasted:
        """Literal (Bool) or literal list (BitVec) for `t`, translating sub-terms bottom-up."""
        hit = self.cache.get(t)
        if hit is not None:
            return hit
        stack = [(t, False)]
        cache = self.cache
        while stack:
            node, ready = stack.pop()
            if node in cache:
                continue
            if not ready:
                stack.append((node, True))
                stack.extend((a, False) for a in node.args if a not in cache)
                continue
            cache[node] = self._gate(node, [cache[a] for a in node.args])
        return cache[t]

    def _gate(self, node: lt.Term, args: list) -> Blasted:
        op = node.op
        if op == "var":
            self.variables[node.name] = node
            if node.is_bool:
                return self.engine.new_var()
            return [self.engine.new_var() for _ in range(node.width)]
        if op == "const":
            value = node.params[0]
            return [T if (value >> i) & 1 else F for i in range(node.width)]
        if op == "true":
            return T
        if op == "false":
            return F
        if op == "not":
            return -args[0]
        if op == "and":
            return self.g_and_n(args)
        if op == "or":
            return self.g_or_n(args)
        if op == "=>":
            return self.g_or(-args[0], args[1])
        if op == "=":
            return self.equal(args[0], args[1])
        if op == "ite":
            if node.is_bool:
                return self.g_ite(*args)
            return [self.g_ite(args[0], x, y) for x, y in zip(args[1], args[2])]
        if op == "bvnot":
            return [-x for x in args[0]]
        if op == "bvand":
            return [self.g_and(x, y) for x, y in zip(*args)]
        if op == "bvor":
            return [self.g_or(x, y) for x, y in zip(*args)]
        if op == "bvxor":
            return [self.g_xor(x, y) for x, y in zip(*args)]
        if op == "bvadd":
            return self.add(args[0], args[1])[0]
        if op == "bvsub":
            return self.sub(args[0], args[1])
        if op == "bvneg":
            return self.add([-x for x in args[0]], [F] * len(args[0]), T)[0]
        if op == "bvmul":
            return self.mul(args[0], args[1])
        if op == "bvudiv":
            return self.udivrem(args[0], args[1])[0]
        if op == "bvurem":
            return self.udivrem(args[0], args[1])[1]
        if op in ("bvshl", "bvlshr", "bvashr"):
            return self.shift(op, args[0], args[1])
        if op == "concat":
            return list(args[1]) + list(args[0])
        if op == "extract":
            hi, lo = node.params
            return list(args[0][lo:hi + 1])
        if op == "zero_extend":
            return list(args[0]) + [F] * node.params[0]
        if op == "sign_extend":
            return list(args[0]) + [args[0][-1]] * node.params[0]
        if op == "bvult":
            return self.ult(args[0], args[1])
        if op == "bvule":
            return -self.ult(args[1], args[0])
        if op == "bvslt":
            return self.slt(args[0], args[1])
        if op == "bvsle":
            return -self.slt(args[1], args[0])
        raise UnsupportedSort(f"cannot bit-blast operator {op}")

    # Assertions

    def assert_term(self, t: lt.Term, level: int) -> None:
        """
        Adds `t` as a constraint in frame `level`.

        Top-level conjunctions are split and disjunctions become single
        clauses. In frame 0, an equation `v = rhs` on a variable not yet
        translated binds `v` to the translation of `rhs` instead of adding clauses.
        """
        pending = [t]
        while pending:
            node = pending.pop()
            if node.op == "and":
                pending.extend(reversed(node.args))
            elif node.op == "or":
                self.engine.add_clause([self.blast(a) for a in node.args], level)
            elif node.op == "=>":
                self.engine.add_clause([-self.blast(node.args[0]), self.blast(node.args[1])], level)
            elif node.op == "not" and node.args[0].op == "and":
                self.engine.add_clause([-self.blast(a) for a in node.args[0].args], level)
            elif level == 0 and node.op == "=" and self._try_alias(node):
                continue
            else:
                self.engine.add_clause([self.blast(node)], level)

    def _try_alias(self, eq: lt.Term) -> bool:
        left, right = eq.args
        if lt.is_var(left) and self.alias(left, right):
            return True
        return lt.is_var(right) and self.alias(right, left)

    # Models

    def value(self, v: lt.Term) -> Union[bool, int]:
        lits = self.cache[v]
        if isinstance(lits, int):
            return self.engine.lit_value(lits)
        return sum(1 << i for i, lit in enumerate(lits) if self.engine.lit_value(lit))
