# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import itertools
import random

import pytest

from src.leakcount import logic_bv as bv
from src.leakcount import logic_terms as lt
from src.leakcount import settings
from src.leakcount.errors import NoModel, StackUnderflow, UnsupportedSort
from src.leakcount.sat_dpll import DpllEngine
from src.leakcount.sat_solver import SatResult, Solver, is_sat

MODES = [True, False]


def _engine_with(clauses, num_vars, learning):
    e = DpllEngine(learning=learning)
    lits = [e.new_var() for _ in range(num_vars)]
    for clause in clauses:
        e.add_clause([lits[abs(l) - 1] * (1 if l > 0 else -1) for l in clause])
    return e, lits


def _brute_force(clauses, num_vars):
    for values in itertools.product((False, True), repeat=num_vars):
        if all(any(values[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def _pigeonhole(holes):
    pigeons = holes + 1
    var = lambda i, j: i * holes + j + 1
    clauses = [[var(i, j) for j in range(holes)] for i in range(pigeons)]
    for j in range(holes):
        for a, b in itertools.combinations(range(pigeons), 2):
            clauses.append([-var(a, j), -var(b, j)])
    return clauses, pigeons * holes


class TestDpllEngine:

    @pytest.mark.parametrize("learning", MODES)
    def test_pigeonhole_unsat(self, learning):
        clauses, n = _pigeonhole(4)
        e, _ = _engine_with(clauses, n, learning)
        assert e.solve() is False
        assert e.stats["conflicts"] > 0

    @pytest.mark.parametrize("learning", MODES)
    def test_random_3sat_matches_brute_force(self, learning):
        rng = random.Random(2024)
        for _ in range(60):
            n = 10
            clauses = [[rng.choice((1, -1)) * v for v in rng.sample(range(1, n + 1), 3)]
                       for _ in range(rng.randint(30, 50))]
            e, lits = _engine_with(clauses, n, learning)
            sat = e.solve()
            assert sat == _brute_force(clauses, n)
            if sat:
                values = [e.lit_value(v) for v in lits]
                assert all(any(values[abs(l) - 1] == (l > 0) for l in c) for c in clauses)

    @pytest.mark.parametrize("learning", MODES)
    def test_push_pop_frames(self, learning):
        e = DpllEngine(learning=learning)
        a, b = e.new_var(), e.new_var()
        e.add_clause([a, b])
        e.push()
        e.add_clause([-a])
        e.add_clause([-b])
        assert e.solve() is False
        e.pop()
        assert e.solve() is True
        with pytest.raises(StackUnderflow):
            e.pop()

    def test_default_is_plain_dpll(self):
        clauses, n = _pigeonhole(3)
        e, _ = _engine_with(clauses, n, None)
        assert e.learning is False
        assert e.solve() is False
        assert e.learned_count == 0
        assert Solver().engine.learning is False

    def test_learning_is_opt_in(self):
        clauses, n = _pigeonhole(3)
        e, _ = _engine_with(clauses, n, True)
        assert e.solve() is False
        assert e.learned_count > 0

    def test_empty_clause(self):
        e = DpllEngine()
        e.push()
        e.add_clause([])
        assert e.solve() is False
        e.pop()
        assert e.solve() is True

    def test_dimacs_dump(self, tmp_path):
        e = DpllEngine()
        a, b = e.new_var(), e.new_var()
        e.add_clause([a, -b])
        e.add_clause([b])
        lines = e.dump_dimacs(tmp_path / "dump.cnf").read_text(encoding="utf-8").splitlines()
        assert lines[1] == f"p cnf {e.num_vars} 3"
        assert f"{a} {-b} 0" in lines


class TestSolver:

    BINARY = [
        (lt.mk_bvadd, bv.add), (lt.mk_bvsub, bv.sub), (lt.mk_bvmul, bv.mul), (lt.mk_bvudiv, bv.udiv),
        (lt.mk_bvurem, bv.urem), (lt.mk_bvshl, bv.shl), (lt.mk_bvlshr, bv.lshr), (lt.mk_bvashr, bv.ashr),
        (lt.mk_bvand, lambda a, b, w: a & b), (lt.mk_bvor, lambda a, b, w: a | b),
        (lt.mk_bvxor, lambda a, b, w: a ^ b),
    ]
    COMPARE = [
        (lt.mk_bvult, bv.ult), (lt.mk_bvule, bv.ule), (lt.mk_bvslt, bv.slt), (lt.mk_bvsle, bv.sle),
    ]

    @pytest.mark.parametrize("build,fold", BINARY)
    def test_bit_blasted_arithmetic(self, build, fold):
        rng = random.Random(build.__name__)
        w = 5
        x, y, z = lt.bv_var("x", w), lt.bv_var("y", w), lt.bv_var("z", w)
        for _ in range(12):
            a, b = rng.randrange(1 << w), rng.randrange(1 << w)
            s = Solver()
            s.assert_term(lt.mk_eq(x, lt.const(a, w)))
            s.assert_term(lt.mk_eq(y, lt.const(b, w)))
            s.assert_term(lt.mk_eq(z, build(x, y)))
            assert s.check() is SatResult.SAT
            assert s.value(z) == fold(a, b, w)

    @pytest.mark.parametrize("build,fold", COMPARE)
    def test_bit_blasted_comparisons(self, build, fold):
        w = 3
        x, y, c = lt.bv_var("x", w), lt.bv_var("y", w), lt.bool_var("c")
        for a, b in itertools.product(range(1 << w), repeat=2):
            s = Solver()
            s.assert_term(lt.mk_and(lt.mk_eq(x, lt.const(a, w)), lt.mk_eq(y, lt.const(b, w)),
                                    lt.mk_eq(c, build(x, y))))
            assert s.check()
            assert s.value(c) == fold(a, b, w)

    def test_extension_and_extraction(self):
        x = lt.bv_var("x", 4)
        s = Solver()
        s.assert_term(lt.mk_eq(lt.mk_sign_extend(4, x), lt.const(0xFA, 8)))
        assert s.check()
        assert s.value(x) == 0xA
        s.assert_term(lt.mk_eq(lt.mk_extract(3, 3, x), lt.const(0, 1)))
        assert not s.check()

    def test_inverse_solving(self):
        x = lt.bv_var("x", 8)
        s = Solver()
        s.assert_term(lt.mk_eq(lt.mk_bvmul(x, lt.const(3, 8)), lt.const(1, 8)))
        assert s.check()
        assert bv.mul(s.value(x), 3, 8) == 1

    @pytest.mark.parametrize("seed", range(500), ids=lambda s: f"seed{s}")
    def test_incremental_matches_fresh(self, seed):
        rng = random.Random(seed)
        learning = seed % 2 == 0
        width = rng.choice((3, 4))
        top = 1 << width
        x = lt.bv_var("x", width)
        y = lt.bv_var("y", width)
        atoms = [lt.mk_bvult(x, lt.const(rng.randrange(top), width)) for _ in range(3)] + \
                [lt.mk_bvult(lt.mk_bvadd(x, y), lt.const(rng.randrange(top), width)) for _ in range(3)] + \
                [lt.mk_eq(lt.mk_bvand(x, y), lt.const(rng.randrange(top), width)) for _ in range(2)] + \
                [lt.mk_eq(lt.mk_bvmul(x, y), lt.const(rng.randrange(top), width))]
        s = Solver(learning)
        stack = [[]]
        for _ in range(rng.randint(8, 16)):
            action = rng.random()
            if action < 0.3:
                s.push()
                stack.append([])
            elif action < 0.5 and len(stack) > 1:
                s.pop()
                stack.pop()
            else:
                t = rng.choice(atoms)
                t = t if rng.random() < 0.5 else lt.mk_not(t)
                s.assert_term(t)
                stack[-1].append(t)
            expected = is_sat(*[t for frame in stack for t in frame], learning=learning)
            assert bool(s.check()) == expected
            if expected:
                m = s.model()
                assert all(m.eval(t) for frame in stack for t in frame)

    @pytest.mark.parametrize("learning", MODES)
    def test_pop_two_nested_frames(self, learning):
        x, y = lt.bv_var("x", 8), lt.bv_var("y", 8)
        s = Solver(learning)
        s.assert_term(lt.mk_bvult(x, lt.const(0x10, 8)))
        assert s.check() is SatResult.SAT
        s.push()
        s.assert_term(lt.mk_eq(y, lt.mk_bvadd(x, lt.const(1, 8))))
        assert s.check() is SatResult.SAT
        s.push()
        s.assert_term(lt.mk_eq(y, x))
        assert s.check() is SatResult.UNSAT
        s.pop(2)
        assert s.depth == 0
        s.assert_term(lt.mk_eq(y, x))
        assert s.check() is SatResult.SAT
        assert s.value(x) == s.value(y) < 0x10

    def test_model_invalidated(self):
        s = Solver()
        with pytest.raises(NoModel):
            s.model()
        s.assert_term(lt.bool_var("p"))
        assert s.check()
        assert s.model()["p"] is True
        s.assert_term(lt.bool_var("q"))
        with pytest.raises(NoModel):
            s.model()

    def test_stack_underflow(self):
        s = Solver()
        s.push()
        with pytest.raises(StackUnderflow):
            s.pop(2)

    def test_non_boolean_assertion(self):
        with pytest.raises(UnsupportedSort):
            Solver().assert_term(lt.bv_var("x", 4))

    def test_dimacs_dump_per_check(self, tmp_path, monkeypatch):
        monkeypatch.setenv(settings.DIMACS_DIR_ENV, str(tmp_path))
        s = Solver()
        s.assert_term(lt.mk_bvult(lt.bv_var("x", 4), lt.const(3, 4)))
        s.check()
        s.check()
        dumps = sorted(tmp_path.glob("check-*.cnf"))
        assert len(dumps) == 2
        assert dumps[0].read_text(encoding="utf-8").startswith("c leakcount dump")
