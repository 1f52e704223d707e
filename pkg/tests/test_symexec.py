# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import itertools
import random
import threading
from collections import Counter

import pytest

from src.leakcount import logic_terms as lt
from src.leakcount.errors import BoundError
from src.leakcount.gcl_interp import interpret
from src.leakcount.gcl_parser import parse
from src.leakcount.sat_solver import is_sat
from src.leakcount.symexec import MODES, Verdict, bmc_formula, execute, iter_summaries, summaries_to_json


def _symbol_env(inputs):
    return {f"{name}_0": value for name, value in inputs.items()}


class TestExploration:

    def test_then_branch_first(self, load):
        summaries = execute(load("sanitize"), 1, "classical")
        h = lt.bv_var("H_0", 32)
        assert summaries[0].pc is lt.mk_bvult(h, lt.const(16, 32))
        assert summaries[0].out is lt.mk_bvadd(h, lt.const(8, 32))
        assert summaries[1].out is lt.const(8, 32)

    @pytest.mark.parametrize("mode", MODES)
    def test_path_conditions_are_disjoint(self, load, mode):
        for name in ("symex_example", "cbmc_example", "dining3", "implicit_flow"):
            p = load(name)
            pcs = [s.pc for s in execute(p, 10, mode) if s.verdict is not Verdict.ASSUME_VIOLATED]
            for a, b in itertools.combinations(pcs, 2):
                assert not is_sat(lt.mk_and(a, b))

    @pytest.mark.parametrize("name", ["sanitize", "symex_example", "cbmc_example", "dining3", "grade2x2"])
    def test_summaries_agree_with_interpreter(self, load, name):
        p = load(name)
        summaries = execute(p, 10, "deferred")
        assert all(s.verdict is not Verdict.BOUND_HIT for s in summaries)
        rng = random.Random(name)
        for _ in range(100):
            inputs = {d.name: rng.randrange(1 << d.width) for d in p.inputs}
            env = _symbol_env(inputs)
            run = interpret(p, inputs)
            hits = [s for s in summaries if lt.evaluate(s.pc, env)]
            if not run.feasible:
                assert not hits
                continue
            assert len(hits) == 1
            leaf = hits[0]
            assert lt.evaluate(leaf.out, env) == run.output
            fails = leaf.failing is not None and lt.evaluate(leaf.failing, env)
            assert fails == run.violated

    def test_assert_disjuncts(self, load):
        summaries = execute(load("symex_example"), 2)
        assert len(bmc_formula(summaries)) == 3
        assert [s.verdict for s in summaries] == [Verdict.ASSERT_VIOLATED] * 3

    def test_classical_drops_infeasible_failures(self, load):
        verdicts = [s.verdict for s in execute(load("symex_example"), 2, "classical")]
        assert Counter(verdicts) == {Verdict.ASSERT_VIOLATED: 2, Verdict.COMPLETED: 1}

    def test_bound_hit(self, load):
        verdicts = Counter(s.verdict for s in execute(load("electronic_purse"), 2, "classical"))
        assert verdicts == {Verdict.COMPLETED: 2, Verdict.BOUND_HIT: 1}

    def test_classical_prunes_infeasible_iterations(self, load):
        p = load("electronic_purse")
        classical = Counter(s.verdict for s in execute(p, 4, "classical"))
        deferred = Counter(s.verdict for s in execute(p, 4, "deferred"))
        assert classical == {Verdict.COMPLETED: 4}
        assert deferred[Verdict.COMPLETED] == 4
        assert deferred[Verdict.BOUND_HIT] == 1

    def test_constant_loop_is_not_a_decision(self, load):
        summaries = execute(load("popcount8"), 1)
        assert len(summaries) == 1
        assert summaries[0].verdict is Verdict.COMPLETED

    def test_assume_violated_leaf(self):
        p = parse("high int8 H; output int8 O; if (H < 4) { assume(H > 10); O = 1; } else { O = 2; }")
        verdicts = [s.verdict for s in execute(p, 2, "classical")]
        assert verdicts == [Verdict.ASSUME_VIOLATED, Verdict.COMPLETED]

    def test_stop_event(self, load):
        stop = threading.Event()
        stop.set()
        assert list(iter_summaries(load("implicit_flow"), 10, stop=stop)) == []

    def test_invalid_arguments(self, load):
        with pytest.raises(BoundError):
            execute(load("sanitize"), 0)
        with pytest.raises(BoundError):
            execute(load("sanitize"), 1, "eager")

    def test_json(self, load):
        rows = summaries_to_json(execute(load("sanitize"), 1))
        assert rows[0]["verdict"] == "completed"
        assert rows[0]["pc"] == "(bvult H_0 #x00000010)"
        assert set(rows[0]) == {"pc", "out", "verdict", "asserts", "depth"}
