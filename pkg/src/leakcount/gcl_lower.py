# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

from typing import Mapping

from . import logic_terms as lt
from .gcl_ast import Binary, BoolLit, Call, Expr, Lit, Ref, Ternary, Unary

_BINARY = {
    "&&": lt.mk_and,
    "||": lt.mk_or,
    "==": lt.mk_eq,
    "!=": lt.mk_distinct,
    "<": lt.mk_bvult,
    "<=": lt.mk_bvule,
    ">": lt.mk_bvugt,
    ">=": lt.mk_bvuge,
    "+": lt.mk_bvadd,
    "-": lt.mk_bvsub,
    "*": lt.mk_bvmul,
    "/": lt.mk_bvudiv,
    "%": lt.mk_bvurem,
    "&": lt.mk_bvand,
    "|": lt.mk_bvor,
    "^": lt.mk_bvxor,
    "<<": lt.mk_bvshl,
    ">>": lt.mk_bvlshr,
}

_CALLS = {
    "slt": lt.mk_bvslt,
    "sle": lt.mk_bvsle,
    "sgt": lt.mk_bvsgt,
    "sge": lt.mk_bvsge,
    "ashr": lt.mk_bvashr,
}


def lower(e: Expr, env: Mapping[str, lt.Term]) -> lt.Term:
    """
    Translates a typed expression into a term, reading variables from `env`.

    `env` maps each base variable to the term holding its current value: a
    versioned SSA variable during unrolling, a symbolic value during symbolic
    execution.
    """
    if isinstance(e, Lit):
        return lt.const(e.value, e.width)
    if isinstance(e, BoolLit):
        return lt.bool_const(e.value)
    if isinstance(e, Ref):
        return env[e.name]
    if isinstance(e, Unary):
        inner = lower(e.operand, env)
        if e.op == "!":
            return lt.mk_not(inner)
        if e.op == "-":
            return lt.mk_bvneg(inner)
        return lt.mk_bvnot(inner)
    if isinstance(e, Binary):
        return _BINARY[e.op](lower(e.left, env), lower(e.right, env))
    if isinstance(e, Ternary):
        return lt.mk_ite(lower(e.cond, env), lower(e.then, env), lower(e.other, env))
    if isinstance(e, Call):
        args = [lower(a, env) for a in e.args]
        if e.func == "zext":
            return lt.mk_zero_extend(e.param - args[0].width, args[0])
        if e.func == "sext":
            return lt.mk_sign_extend(e.param - args[0].width, args[0])
        if e.func == "trunc":
            return lt.mk_extract(e.param - 1, 0, args[0])
        return _CALLS[e.func](*args)
    raise TypeError(f"cannot lower {e!r}")
