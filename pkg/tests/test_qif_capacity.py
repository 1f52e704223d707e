# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import math

import pytest

from src.leakcount.errors import BoundError
from src.leakcount.gcl_parser import parse
from src.leakcount.qif_capacity import QifQuery, QifVerdict, analyze, early_pruning, prepare

ROUTES = [("formula", "bc"), ("formula", "dfs"), ("symcount", "dfs")]


def _query(program, bound=1, route="formula", algorithm="dfs", **kwargs):
    return QifQuery(program, bound, route=route, algorithm=algorithm, **kwargs)


class TestCapacity:

    @pytest.mark.parametrize("route,algorithm", ROUTES)
    def test_sanitize(self, load, route, algorithm):
        report = analyze(_query(load("sanitize"), route=route, algorithm=algorithm))
        assert report.N == 16
        assert report.capacity == pytest.approx(4.0)
        assert report.verdict is QifVerdict.EXACT
        assert report.outputs == list(range(8, 24))

    @pytest.mark.parametrize("route,algorithm", ROUTES)
    def test_corpus_counts(self, load, expect, route, algorithm):
        for name in ("no_flow", "no_flow_branches", "password", "dining3", "sum_query", "implicit_flow"):
            exp = expect(name)
            report = analyze(_query(load(name), exp.unwind, route, algorithm, want_outputs=False))
            assert str(report.N) == exp.checks["N"], name
            assert f"{report.capacity:.3f}" == exp.checks["capacity"], name

    @pytest.mark.parametrize("name,bound", [
        ("popcount8", 8), ("electronic_purse", 4), ("dining3", 1), ("mix_dup8", 1),
    ])
    def test_agrees_with_brute_force(self, load, brute_outputs, name, bound):
        p = load(name)
        expected = sorted(brute_outputs(p, loop_bound=bound))
        for route in ("formula", "symcount"):
            report = analyze(_query(p, bound, route))
            assert report.outputs == expected

    def test_unwinding_bound_limits_outputs(self, load, brute_outputs):
        p = load("electronic_purse")
        report = analyze(_query(p, 2))
        assert report.outputs == sorted(brute_outputs(p, loop_bound=2)) == [0, 1, 2]

    def test_infeasible_program(self):
        p = parse("high int8 H; output int8 O; assume(H > 3); assume(H < 2); O = H;")
        for route in ("formula", "symcount"):
            report = analyze(_query(p, route=route))
            assert report.N == 0
            assert report.capacity == 0.0

    def test_boolean_output(self, load):
        report = analyze(_query(load("password")))
        assert report.outputs == [0, 1]


class TestPolicy:

    @pytest.mark.parametrize("route,algorithm", ROUTES)
    def test_thresholds(self, load, route, algorithm):
        p = load("sanitize")
        zero = analyze(_query(p, route=route, algorithm=algorithm, policy=0))
        assert (zero.verdict, zero.N) == (QifVerdict.INSECURE_AT_POLICY, 1)
        four = analyze(_query(p, route=route, algorithm=algorithm, policy=4))
        assert (four.verdict, four.N) == (QifVerdict.INSECURE_AT_POLICY, 16)
        five = analyze(_query(p, route=route, algorithm=algorithm, policy=5))
        assert (five.verdict, five.N) == (QifVerdict.EXACT, 16)

    def test_policy_is_monotone(self, load):
        p = load("dining3")
        exact = analyze(_query(p)).N
        for k in range(4):
            report = analyze(_query(p, route="symcount", policy=k))
            if report.verdict is QifVerdict.INSECURE_AT_POLICY:
                assert exact >= 2 ** k
            else:
                assert report.N == exact < 2 ** k

    def test_invalid_query(self, load):
        p = load("sanitize")
        with pytest.raises(BoundError):
            analyze(_query(p, policy=-1))
        with pytest.raises(BoundError):
            analyze(_query(p, route="sampling"))
        with pytest.raises(BoundError):
            analyze(_query(p, algorithm="brute"))
        with pytest.raises(BoundError):
            analyze(_query(p, bound=0))


class TestEarlyPruning:

    def test_sanitize_high_bits_never_set(self, load):
        _, f = prepare(load("sanitize"), 1, {})
        table = early_pruning(f)
        assert [table[f"p!{i}"][0] for i in range(1, 33)] == [True] * 5 + [False] * 27
        assert all(neg for _, neg in table.values())

    def test_report_json(self, load):
        report = analyze(_query(load("sanitize"), route="symcount"))
        data = report.to_json()
        assert data["N"] == 16
        assert data["capacity"] == 4.0
        assert data["verdict"] == "exact"
        assert data["route"] == "symcount"
        assert {"unroll", "encode", "prune", "count"} <= set(data["timings"])
        assert math.isclose(report.capacity, math.log2(16))
