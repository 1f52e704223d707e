# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import pickle
import random

import pytest

from src.leakcount import logic_bv as bv
from src.leakcount import logic_terms as lt
from src.leakcount.errors import UnsupportedSort


class TestHashConsing:

    def test_structural_sharing(self):
        x = lt.bv_var("x", 8)
        a = lt.mk_bvadd(x, lt.bv_var("y", 8))
        b = lt.mk_bvadd(lt.bv_var("x", 8), lt.bv_var("y", 8))
        assert a is b

    def test_pickle_keeps_identity(self):
        t = lt.mk_bvult(lt.bv_var("x", 8), lt.const(7, 8))
        assert pickle.loads(pickle.dumps(t)) is t


class TestSimplification:

    def test_boolean_folding(self):
        a, b = lt.bool_var("a"), lt.bool_var("b")
        assert lt.mk_and(a, lt.TRUE, a) is a
        assert lt.mk_and(a, lt.mk_not(a)) is lt.FALSE
        assert lt.mk_or(b, lt.mk_not(b)) is lt.TRUE
        assert lt.mk_not(lt.mk_not(a)) is a
        assert lt.mk_and() is lt.TRUE
        assert lt.mk_or() is lt.FALSE
        assert lt.mk_and(lt.mk_and(a, b), a).args == (a, b)

    def test_equality(self):
        x = lt.bv_var("x", 8)
        assert lt.mk_eq(x, x) is lt.TRUE
        assert lt.mk_eq(lt.const(3, 8), lt.const(4, 8)) is lt.FALSE
        with pytest.raises(UnsupportedSort):
            lt.mk_eq(x, lt.bv_var("y", 4))

    def test_ite(self):
        c = lt.bool_var("c")
        x = lt.bv_var("x", 4)
        assert lt.mk_ite(lt.TRUE, x, lt.const(0, 4)) is x
        assert lt.mk_ite(c, x, x) is x
        assert lt.mk_ite(c, lt.TRUE, lt.FALSE) is c

    def test_arithmetic_identities(self):
        x = lt.bv_var("x", 8)
        assert lt.mk_bvadd(x, lt.const(0, 8)) is x
        assert lt.mk_bvsub(x, x) is lt.const(0, 8)
        assert lt.mk_bvmul(lt.const(1, 8), x) is x
        assert lt.mk_bvand(x, lt.const(0xFF, 8)) is x
        assert lt.mk_bvadd(lt.mk_bvadd(x, lt.const(250, 8)), lt.const(10, 8)) is lt.mk_bvadd(x, lt.const(4, 8))
        assert lt.mk_bvult(x, lt.const(0, 8)) is lt.FALSE

    def test_extract_range(self):
        x = lt.bv_var("x", 8)
        assert lt.mk_extract(7, 0, x) is x
        assert lt.mk_extract(1, 0, lt.mk_extract(5, 2, x)) is lt.mk_extract(3, 2, x)
        with pytest.raises(UnsupportedSort):
            lt.mk_extract(8, 0, x)

    def test_sort_checks(self):
        with pytest.raises(UnsupportedSort):
            lt.mk_and(lt.bv_var("x", 8))
        with pytest.raises(UnsupportedSort):
            lt.mk_bvadd(lt.bool_var("a"), lt.bool_var("b"))


class TestEvaluation:

    OPS = [
        (lt.mk_bvadd, bv.add), (lt.mk_bvsub, bv.sub), (lt.mk_bvmul, bv.mul),
        (lt.mk_bvudiv, bv.udiv), (lt.mk_bvurem, bv.urem), (lt.mk_bvshl, bv.shl),
        (lt.mk_bvlshr, bv.lshr), (lt.mk_bvashr, bv.ashr),
    ]

    def test_constant_folding_matches_evaluation(self):
        rng = random.Random(7)
        x, y = lt.bv_var("x", 6), lt.bv_var("y", 6)
        for _ in range(200):
            a, b = rng.randrange(64), rng.randrange(64)
            for build, fold in self.OPS:
                symbolic = lt.evaluate(build(x, y), {"x": a, "y": b})
                folded = build(lt.const(a, 6), lt.const(b, 6))
                assert symbolic == fold(a, b, 6) == folded.value

    def test_signed_comparison(self):
        x = lt.bv_var("x", 4)
        assert lt.evaluate(lt.mk_bvslt(x, lt.const(0, 4)), {"x": 8}) is True
        assert lt.evaluate(lt.mk_bvult(x, lt.const(0, 4)), {"x": 8}) is False

    def test_missing_variable(self):
        x = lt.bv_var("x", 4)
        assert lt.evaluate(x, {}) == 0
        with pytest.raises(KeyError):
            lt.evaluate(x, {}, default=False)


class TestTraversal:

    def test_free_vars_and_substitute(self):
        h = lt.bv_var("H_0", 8)
        t = lt.mk_bvult(lt.mk_bvadd(h, lt.bv_var("L_0", 8)), lt.const(9, 8))
        assert lt.free_var_names(t) == {"H_0", "L_0"}
        s = lt.substitute(t, {"H_0": lt.bv_var("H_0!1", 8)})
        assert lt.free_var_names(s) == {"H_0!1", "L_0"}

    def test_substitute_resimplifies(self):
        x = lt.bv_var("x", 8)
        t = lt.mk_bvult(x, lt.const(9, 8))
        assert lt.substitute(t, {"x": lt.const(3, 8)}) is lt.TRUE

    def test_substitute_sort_mismatch(self):
        with pytest.raises(UnsupportedSort):
            lt.substitute(lt.bv_var("x", 8), {"x": lt.bool_var("b")})

    def test_format(self):
        t = lt.mk_bvult(lt.bv_var("H_0", 32), lt.const(16, 32))
        assert lt.format_term(t) == "(bvult H_0 #x00000010)"
        assert lt.format_term(lt.const(5, 3)) == "#b101"
        assert lt.format_symbol("1x") == "|1x|"
        assert lt.format_term(lt.mk_extract(3, 2, lt.bv_var("x", 8))) == "((_ extract 3 2) x)"

    def test_conjuncts(self):
        a, b = lt.bool_var("a"), lt.bool_var("b")
        assert lt.conjuncts(lt.mk_and(a, b)) == (a, b)
        assert lt.conjuncts(lt.TRUE) == ()
        assert lt.conjuncts(a) == (a,)
