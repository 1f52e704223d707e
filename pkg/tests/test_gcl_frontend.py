# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import pytest

from conftest import corpus_names
from src.leakcount.errors import SourceSyntaxError, WidthError
from src.leakcount.gcl_ast import VarKind, format_program
from src.leakcount.gcl_interp import input_space, interpret
from src.leakcount.gcl_parser import parse


class TestParser:

    def test_declarations(self, load):
        p = load("sanitize")
        assert [(d.name, d.kind, d.width) for d in p.decls] == [
            ("H", VarKind.HIGH, 32),
            ("L", VarKind.LOCAL, 32),
            ("O", VarKind.OUTPUT, 32),
        ]
        assert p.output.name == "O"
        assert [d.name for d in p.highs] == ["H"]

    def test_bool_declaration_is_one_bit(self, load):
        p = load("dining3")
        assert {d.name: d.width for d in p.decls}["c0"] == 1
        assert [d.kind for d in p.inputs].count(VarKind.NONDET) == 3

    def test_syntax_error_position(self):
        with pytest.raises(SourceSyntaxError) as info:
            parse("output int8 O;\nO = ;\n", "bad.gcl")
        assert info.value.line == 2
        assert info.value.diagnostic().startswith("bad.gcl:2:")

    def test_mixed_widths_rejected(self):
        with pytest.raises(WidthError):
            parse("high int8 a; high int16 b; output int16 O; O = a + b;")

    def test_cast_accepted(self):
        p = parse("high int8 a; high int16 b; output int16 O; O = zext(a, 16) + b;")
        assert interpret(p, {"a": 255, "b": 1}).output == 256

    def test_literal_overflow(self):
        with pytest.raises(WidthError):
            parse("output int4 O; O = 16;")

    def test_single_output_required(self):
        with pytest.raises(SourceSyntaxError):
            parse("high int8 H;")
        with pytest.raises(SourceSyntaxError):
            parse("output int8 A; output int8 B;")

    def test_undeclared_variable(self):
        with pytest.raises(SourceSyntaxError):
            parse("output int8 O; X = 1;")

    def test_comments_ignored(self):
        p = parse("# header\noutput int8 O; # trailing\nO = 1;")
        assert interpret(p, {}).output == 1

    @pytest.mark.parametrize("name", corpus_names(include_slow=True))
    def test_print_parse_fixpoint(self, load, name):
        p = load(name)
        again = parse(format_program(p), p.name)
        assert again == p
        assert format_program(again) == format_program(p)

    def test_nested_conjunction_reparses(self):
        cond = "(a <= a)"
        for _ in range(5):
            cond = f"({cond} && (a <= a))"
        p = parse(f"low int8 a; output int8 O; assert({cond}); O = a;")
        again = parse(format_program(p))
        assert again == p
        assert "assert(a <= a && a <= a && a <= a && a <= a && a <= a && a <= a);" in format_program(p)

    def test_parenthesized_chain_depth(self):
        text = "low int8 a; output int8 O; O = " + "(" * 40 + "a + 1" + ")" * 40 + ";"
        assert interpret(parse(text), {"a": 3}).output == 4

    def test_runaway_nesting_is_syntax_error(self):
        text = "low int8 a; output int8 O; O = " + "(" * 5000 + "a" + ")" * 5000 + ";"
        with pytest.raises(SourceSyntaxError) as info:
            parse(text, "deep.gcl")
        assert "nested too deeply" in info.value.diagnostic()

    @pytest.mark.parametrize("source, printed", [
        ("O = a - (b - c) * a;", "O = a - (b - c) * a;"),
        ("O = (a - b) - c;", "O = a - b - c;"),
        ("O = a | b ^ c & a;", "O = a | b ^ c & a;"),
        ("O = (a | b) & c;", "O = (a | b) & c;"),
        ("O = -(a + b) * ~c;", "O = -(a + b) * ~c;"),
        ("O = a < b ? (b < c ? a : b) : c;", "O = a < b ? (b < c ? a : b) : c;"),
        ("O = a < b ? a : b < c ? b : c;", "O = a < b ? a : b < c ? b : c;"),
        ("O = zext(trunc(a << 1, 4), 8);", "O = zext(trunc(a << 1, 4), 8);"),
    ])
    def test_minimal_parentheses(self, source, printed):
        p = parse(f"low int8 a, b, c; output int8 O; {source}")
        text = format_program(p)
        assert printed in text
        assert parse(text) == p

    def test_precedence_shapes(self):
        p = parse("low int8 a, b, c; output int8 O; O = a + b * c - a;")
        value = p.body[0].value
        assert value.op == "-"
        assert value.left.op == "+"
        assert value.left.right.op == "*"
        assert interpret(p, {"a": 1, "b": 2, "c": 3}).output == 6


class TestInterpreter:

    def test_sanitize(self, load):
        p = load("sanitize")
        assert interpret(p, {"H": 3}).output == 11
        assert interpret(p, {"H": 100}).output == 8

    def test_unsigned_wraparound(self):
        p = parse("high int8 H; output int8 O; O = H + 1;")
        assert interpret(p, {"H": 255}).output == 0

    def test_signed_compare(self):
        p = parse("high int8 H; output int8 O; if (slt(H, 0)) O = 1; else O = 2;")
        assert interpret(p, {"H": 0x80}).output == 1
        assert interpret(p, {"H": 0x7F}).output == 2

    def test_division_by_zero(self):
        p = parse("high int8 a, b; output int8 O; O = a / b;")
        assert interpret(p, {"a": 7, "b": 0}).output == 255
        q = parse("high int8 a, b; output int8 O; O = a % b;")
        assert interpret(q, {"a": 7, "b": 0}).output == 7

    def test_failed_assert_continues(self, load):
        run = interpret(load("cbmc_example"), {"x": 0, "y": 0, "z": 0})
        assert len(run.failed_asserts) == 1
        assert run.output == 2
        assert run.feasible

    def test_assume_blocks(self, load):
        run = interpret(load("electronic_purse"), {"H": 25})
        assert run.blocked
        assert not run.feasible

    def test_loop(self, load):
        assert interpret(load("electronic_purse"), {"H": 19}).output == 3
        assert interpret(load("popcount8"), {"H": 0b10110001}).output == 4

    def test_loop_bound(self, load):
        run = interpret(load("popcount8"), {"H": 1}, loop_bound=3)
        assert run.bound_exceeded
        assert interpret(load("popcount8"), {"H": 1}, loop_bound=8).output == 1

    def test_input_space(self, load):
        p = parse("high int2 a; low bool b; output int2 O;")
        assert len(list(input_space(p.inputs))) == 8
