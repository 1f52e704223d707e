# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

from typing import Dict, List, Tuple

from . import logic_terms as lt
from .errors import UnsupportedSort

ABSTRACTION_PREFIX = "ba!"


class AbstractionMap:
    """Bijection between theory atoms and fresh Boolean variables."""

    def __init__(self, reserved=frozenset(), prefix: str = ABSTRACTION_PREFIX):
        self.prefix = prefix
        self.reserved = set(reserved)
        self.forward: Dict[lt.Term, lt.Term] = {}
        self.backward: Dict[str, lt.Term] = {}

    def __len__(self) -> int:
        return len(self.forward)

    def abstract_atom(self, atom: lt.Term) -> lt.Term:
        hit = self.forward.get(atom)
        if hit is not None:
            return hit
        index = len(self.forward)
        while f"{self.prefix}{index}" in self.reserved:
            index += 1
        v = lt.bool_var(f"{self.prefix}{index}")
        self.reserved.add(v.name)
        self.forward[atom] = v
        self.backward[v.name] = atom
        return v

    def atom(self, name: str) -> lt.Term:
        return self.backward[name]

    def refine(self, skeleton: lt.Term) -> lt.Term:
        return lt.substitute(skeleton, self.backward)

    def definitions(self) -> List[lt.Term]:
        return [lt.mk_eq(v, atom) for atom, v in self.forward.items()]


def _is_connective(t: lt.Term) -> bool:
    if t.op in ("not", "and", "or", "=>", "true", "false"):
        return True
    if t.op == "var":
        return t.is_bool
    if t.op in ("=", "ite"):
        return t.args[1].is_bool
    return False


def abstract(t: lt.Term, amap: AbstractionMap = None) -> Tuple[lt.Term, AbstractionMap]:
    """
    Boolean skeleton of a formula.

    Every Bool-sorted subterm that is not Boolean structure (a bit-vector
    equality or comparison) is replaced by a fresh Boolean variable; repeated
    atoms share one variable because terms are hash-consed.

    Example usage:
    --------------
    >>> x = lt.bv_var("x", 8)
    >>> gt = lt.mk_bvugt(x, lt.const(5, 8))
    >>> skeleton, amap = abstract(lt.mk_and(gt, lt.mk_implies(gt, lt.bool_var("T"))))
    >>> len(amap)
    1
    """
    if amap is None:
        amap = AbstractionMap(lt.free_var_names(t))
    cache: Dict[lt.Term, lt.Term] = {}

    def walk(node: lt.Term) -> lt.Term:
        hit = cache.get(node)
        if hit is not None:
            return hit
        if not _is_connective(node):
            out = amap.abstract_atom(node)
        elif node.args:
            out = lt.apply_op(node.op, [walk(a) for a in node.args], node.params, node.sort)
        else:
            out = node
        cache[node] = out
        return out

    if not t.is_bool:
        raise UnsupportedSort(f"abstract() needs a Bool-sorted term, got {t.sort}")
    return walk(t), amap
