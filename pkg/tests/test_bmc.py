# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import itertools

import pytest

from src.leakcount import bmc
from src.leakcount import logic_terms as lt
from src.leakcount.bmc import (BmcConfig, BmcVerdict, check_concurrent, check_sequential, enumerate_counterexamples,
                               generate_tests, generate_tests_symbolic, reliability, replay)
from src.leakcount.errors import BoundError, InternalError
from src.leakcount.gcl_interp import interpret
from src.leakcount.gcl_parser import parse
from src.leakcount.symexec import Verdict, bmc_formula, execute

UNSORTED_PAIR = """
low int4 a, b;
local int4 t;
output int4 O;
if (a > b) {
    t = a;
    a = b;
    b = t;
}
assert(a <= b);
assert(a < 15);
O = a;
"""


@pytest.fixture(scope="module")
def bubble_reference(load, expect):
    """Verdict and violated disjuncts of one sequential run, per bubble sort program."""
    cache = {}

    def _reference(name: str):
        if name not in cache:
            cfg = BmcConfig(bound=expect(name).depth, stop_on_first=False, learning=True)
            result = check_sequential(load(name), cfg)
            cache[name] = (result.verdict, sorted(c.disjunct for c in result.counterexamples))
        return cache[name]

    return _reference


class TestConcurrentBmc:

    @pytest.mark.parametrize("name", ["cbmc_example", "symex_example", "bubble5_negated"])
    def test_counterexample_replays(self, load, expect, name):
        p = load(name)
        depth = expect(name).depth
        result = check_concurrent(p, BmcConfig(bound=depth, workers=2))
        assert result.verdict is BmcVerdict.VIOLATED
        for cex in result.counterexamples:
            run = replay(p, cex)
            assert run.feasible
            assert run.violated

    def test_all_disjuncts_witnessed(self, load):
        p = load("cbmc_example")
        terms = bmc_formula(execute(p, 2))
        result = check_concurrent(p, BmcConfig(bound=2, stop_on_first=False))
        assert result.disjuncts == len(terms)
        for cex in result.counterexamples:
            env = {f"{k}_0": v for k, v in cex.inputs.items()}
            assert lt.evaluate(terms[cex.disjunct], env)

    @pytest.mark.parametrize("workers,batch_size", itertools.product([1, 2, 4], [1, 2, 100]))
    def test_worker_and_batch_grid(self, load, workers, batch_size):
        p = load("cbmc_example")
        result = check_concurrent(p, BmcConfig(bound=2, workers=workers, batch_size=batch_size,
                                               stop_on_first=False))
        sequential = check_sequential(p, BmcConfig(bound=2, stop_on_first=False))
        assert [c.disjunct for c in result.counterexamples] == sorted(c.disjunct for c in sequential.counterexamples)
        assert result.batches == -(-result.disjuncts // batch_size)

    def test_no_assertions_is_safe_without_batches(self, load):
        result = check_concurrent(load("sanitize"), BmcConfig(bound=1, workers=3))
        assert result.verdict is BmcVerdict.SAFE
        assert (result.disjuncts, result.batches, result.counterexamples) == (0, 0, [])

    def test_safe_program(self):
        result = check_concurrent(parse(UNSORTED_PAIR.replace("assert(a < 15);", "")), BmcConfig(bound=1, workers=2))
        assert result.verdict is BmcVerdict.SAFE
        assert result.batches == 1

    @pytest.mark.slow
    def test_sorted_bubble_sort(self, load, expect):
        result = check_concurrent(load("bubble5"), BmcConfig(bound=expect("bubble5").depth, workers=4, batch_size=64,
                                                             learning=True))
        assert result.verdict is BmcVerdict.SAFE

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["bubble5", "bubble5_negated"])
    @pytest.mark.parametrize("workers,batch_size", itertools.product([1, 2, 4], [1, 10, 200]))
    def test_bubble_sort_grid(self, load, expect, bubble_reference, name, workers, batch_size):
        p = load(name)
        cfg = BmcConfig(bound=expect(name).depth, workers=workers, batch_size=batch_size, stop_on_first=False,
                        learning=True)
        result = check_concurrent(p, cfg)
        verdict, disjuncts = bubble_reference(name)
        assert result.verdict is verdict
        assert [c.disjunct for c in result.counterexamples] == disjuncts
        assert result.batches == -(-result.disjuncts // batch_size)
        for cex in result.counterexamples:
            assert replay(p, cex).violated

    def test_analyses_ask_for_learning(self):
        assert BmcConfig().learning is True

    def test_counterexample_limit(self):
        p = parse(UNSORTED_PAIR)
        result = check_concurrent(p, BmcConfig(bound=1, stop_on_first=False, max_counterexamples=1))
        assert len(result.counterexamples) == 1

    def test_worker_failure(self, load, monkeypatch):
        def broken(*args, **kwargs):
            raise RuntimeError("solver crashed")

        monkeypatch.setattr(bmc, "solve_batch", broken)
        with pytest.raises(InternalError) as info:
            check_concurrent(load("cbmc_example"), BmcConfig(bound=2, workers=2))
        assert info.value.batch_id == 0

    @pytest.mark.parametrize("cfg", [
        BmcConfig(bound=0), BmcConfig(workers=0), BmcConfig(batch_size=0), BmcConfig(max_counterexamples=0),
    ])
    def test_invalid_config(self, load, cfg):
        with pytest.raises(BoundError):
            check_concurrent(load("cbmc_example"), cfg)

    def test_json(self, load):
        data = check_concurrent(load("symex_example"), BmcConfig(bound=2)).to_json()
        assert data["verdict"] == "violated"
        assert data["stats"]["disjuncts"] == 3
        assert set(data["counterexamples"][0]) == {"inputs", "disjunct", "batch"}


class TestTraceClasses:

    def test_cbmc_example(self, load):
        p = load("cbmc_example")
        result = enumerate_counterexamples(p, BmcConfig(bound=1))
        assert result.method == "allsmt"
        assert len(result.counterexamples) == 2
        for cex in result.counterexamples:
            assert set(cex.guards) == {"g!0", "g!1"}
            assert replay(p, cex).violated
        assert len({tuple(sorted(c.guards.items())) for c in result.counterexamples}) == 2

    def test_limit(self, load):
        result = enumerate_counterexamples(load("cbmc_example"), BmcConfig(max_counterexamples=1))
        assert len(result.counterexamples) == 1

    def test_safe(self):
        result = enumerate_counterexamples(parse(UNSORTED_PAIR.replace("assert(a < 15);", "")), BmcConfig())
        assert result.verdict is BmcVerdict.SAFE


class TestGeneration:

    @pytest.mark.parametrize("generator", [generate_tests, generate_tests_symbolic])
    def test_foo(self, load, generator):
        p = load("foo")
        tests = generator(p, BmcConfig(bound=2))
        assert len(tests) == 3
        outputs = set()
        for t in tests:
            run = interpret(p, t)
            assert run.feasible
            outputs.add(t["x"] > 5)
        assert outputs == {True, False}
        # the inner then-branch needs x + 1 to wrap around
        assert any(t["x"] == 0xFFFFFFFF for t in tests)

    @pytest.mark.parametrize("name", ["foo", "symex_example"])
    def test_one_test_per_feasible_path(self, load, name):
        p = load(name)
        feasible = [s for s in execute(p, 2, "classical")
                    if s.verdict in (Verdict.COMPLETED, Verdict.ASSERT_VIOLATED)]
        assert len(generate_tests(p, BmcConfig(bound=2))) == len(feasible)
        assert len(generate_tests_symbolic(p, BmcConfig(bound=2))) == len(feasible)

    @pytest.mark.parametrize("generator", [generate_tests, generate_tests_symbolic])
    def test_every_branch_covered(self, load, generator):
        p = load("implicit_flow")
        tests = generator(p, BmcConfig(bound=7))
        assert sorted(min(t["S"], 7) for t in tests) == list(range(8))

    def test_program_without_inputs(self):
        p = parse("output int8 O; O = 1;")
        assert generate_tests(p, BmcConfig()) == [{}]
        assert generate_tests_symbolic(p, BmcConfig()) == [{}]


class TestReliability:

    def test_single_assertion(self):
        r = reliability(parse("low int4 x; output int4 O; assert(x < 12);"), BmcConfig())
        assert (r.true_inputs, r.false_inputs, r.grey_inputs) == (12, 4, 0)
        assert r.reliability == 0.75

    def test_failure_on_one_branch(self):
        p = parse("low int4 x; output int4 O; if (x < 8) { assert(x != 3); } O = x;")
        r = reliability(p, BmcConfig())
        assert r.paths == {"T": 1, "F": 1, "G": 0}
        assert r.reliability == 15 / 16

    def test_grey_paths(self, load):
        r = reliability(load("electronic_purse"), BmcConfig(bound=2))
        assert r.paths["G"] == 1
        assert r.grey_inputs == 10
        assert r.reliability == 10 / 20

    def test_no_inputs(self):
        r = reliability(parse("output int4 O; O = 1; assert(O == 1);"), BmcConfig())
        assert r.reliability == 1.0
        assert r.to_json()["true"] == 1
