# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import csv
import json
import shutil

import pytest

from src.leakcount import cli
from src.leakcount.cli import EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, main
from src.leakcount.corpus import check_file, parse_expect, run_corpus
from src.leakcount.errors import InternalError, MissingExpectation
from src.leakcount.report_writer import format_summary, write_summary_csv

from conftest import CORPUS_DIR, corpus_names


def _copy(tmp_path, *names):
    for name in names:
        shutil.copy(CORPUS_DIR / f"{name}.gcl", tmp_path)
        shutil.copy(CORPUS_DIR / f"{name}.expect", tmp_path)


class TestCapacityCommand:
    def test_plain_output(self, corpus_dir, capsys):
        assert main(["capacity", str(corpus_dir / "sanitize.gcl"), "--bound", "1"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "N=16 capacity=4.000 bits"

    def test_alg_alias_and_outputs(self, corpus_dir, capsys):
        code = main(["capacity", str(corpus_dir / "password.gcl"), "--alg", "bc", "--outputs"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines == ["N=2 capacity=1.000 bits", "outputs: 0 1"]

    def test_policy_verdict(self, corpus_dir, capsys):
        main(["capacity", str(corpus_dir / "sanitize.gcl"), "--policy", "2"])
        assert "insecure at policy" in capsys.readouterr().out

    def test_json_to_stdout(self, corpus_dir, capsys):
        assert main(["capacity", str(corpus_dir / "sanitize.gcl"), "--json"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["N"] == 16
        assert report["capacity"] == 4.0
        assert report["outputs"] == list(range(8, 24))

    def test_json_to_file(self, corpus_dir, tmp_path, capsys):
        target = tmp_path / "report.json"
        main(["capacity", str(corpus_dir / "sanitize.gcl"), "--json", str(target)])
        assert capsys.readouterr().out.strip() == "N=16 capacity=4.000 bits"
        assert json.loads(target.read_text(encoding="utf-8"))["verdict"] == "exact"


class TestOtherCommands:
    def test_label(self, corpus_dir, capsys):
        assert main(["label", str(corpus_dir / "sanitize.gcl")]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[-1] == "bound=4.087 bits"
        assert lines[-2].startswith("labels ")

    def test_bmc_violated_is_not_an_error(self, corpus_dir, capsys):
        assert main(["bmc", str(corpus_dir / "cbmc_example.gcl"), "--bound", "2"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("violated")
        assert lines[1].startswith("counterexample: x=")

    def test_bmc_classes_json(self, corpus_dir, capsys):
        main(["bmc", str(corpus_dir / "cbmc_example.gcl"), "--bound", "2", "--classes", "--json"])
        result = json.loads(capsys.readouterr().out)
        assert len(result["counterexamples"]) == 2

    def test_gen_tests(self, corpus_dir, capsys):
        assert main(["bmc", str(corpus_dir / "foo.gcl"), "--bound", "2", "--gen-tests"]) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[-1] == "3 tests"

    @pytest.mark.parametrize("argv, learning", [
        (["solve", "s.smt2"], False),
        (["solve", "s.smt2", "--learning"], True),
        (["allsat", "s.smt2"], None),
        (["allsat", "s.smt2", "--no-learning"], False),
        (["capacity", "p.gcl"], True),
        (["capacity", "p.gcl", "--no-learning"], False),
        (["label", "p.gcl"], True),
        (["bmc", "p.gcl", "--no-learning"], False),
    ])
    def test_learning_flags(self, argv, learning):
        assert cli.build_parser().parse_args(argv).learning is learning

    def test_solve_script(self, scripts_dir, capsys):
        assert main(["solve", str(scripts_dir / "push_pop.smt2")]) == EXIT_OK
        assert capsys.readouterr().out.splitlines() == ["sat", "unsat", '(error "no model available")', "sat"]

    def test_allsat_script(self, scripts_dir, capsys):
        assert main(["allsat", str(scripts_dir / "allsmt_guards.smt2"), "--alg", "dfs"]) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[-1] == "(models 3)"

    def test_allsat_on_program(self, corpus_dir, capsys):
        assert main(["allsat", str(corpus_dir / "sanitize.gcl"), "--bound", "1"]) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[-1] == "(models 16)"

    def test_emit(self, corpus_dir, capsys):
        assert main(["allsat", str(corpus_dir / "sanitize.gcl"), "--emit"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "(declare-fun H_0 () (_ BitVec 32))" in out
        assert out.rstrip().splitlines()[-1].startswith("(check-allsat (")


class TestExitCodes:
    def test_missing_subcommand(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_unknown_choice(self, corpus_dir, capsys):
        assert main(["capacity", str(corpus_dir / "sanitize.gcl"), "--route", "nope"]) == EXIT_USAGE

    def test_bound_below_one(self, corpus_dir, capsys):
        assert main(["capacity", str(corpus_dir / "sanitize.gcl"), "--bound", "0"]) == EXIT_USAGE
        assert "bound" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["capacity", str(tmp_path / "absent.gcl")]) == EXIT_USAGE

    def test_syntax_error_diagnostic(self, tmp_path, capsys):
        source = tmp_path / "bad.gcl"
        source.write_text("low int8 x;\noutput int8 O;\nO = x +;\n", encoding="utf-8")
        assert main(["capacity", str(source)]) == EXIT_USAGE
        assert "bad.gcl:3:" in capsys.readouterr().err

    def test_internal_error(self, corpus_dir, monkeypatch, capsys):
        def broken(_query):
            raise InternalError("worker crashed", 3)

        monkeypatch.setattr(cli, "analyze_capacity", broken)
        assert main(["capacity", str(corpus_dir / "sanitize.gcl")]) == EXIT_INTERNAL
        assert "internal error" in capsys.readouterr().err


class TestExpectations:
    def test_parse(self, expect):
        exp = expect("cbmc_example")
        assert exp.depth == 2
        assert exp.checks == {"classes": "2", "bmc": "violated"}
        assert not exp.slow
        assert expect("bubble5").slow

    def test_depth_defaults_to_unwind(self, tmp_path):
        path = tmp_path / "p.expect"
        path.write_text("# comment\n\nunwind=3\nN=4\n", encoding="utf-8")
        exp = parse_expect(path)
        assert exp.unwind == exp.depth == 3

    @pytest.mark.parametrize("text", ["N=16\nnonsense\n", "N=16\ncolour=red\n", "unwind=2\n", "N=\n"])
    def test_rejects(self, tmp_path, text):
        path = tmp_path / "p.expect"
        path.write_text(text, encoding="utf-8")
        with pytest.raises(MissingExpectation):
            parse_expect(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingExpectation):
            parse_expect(tmp_path / "absent.expect")


class TestCorpus:
    @pytest.mark.parametrize("name", corpus_names())
    def test_program_matches_expectation(self, corpus_dir, name):
        rows = check_file(corpus_dir / f"{name}.gcl")
        assert rows
        assert [r for r in rows if r["Status"] != "pass"] == []

    @pytest.mark.slow
    @pytest.mark.parametrize("name", sorted(set(corpus_names(include_slow=True)) - set(corpus_names())))
    def test_slow_program_matches_expectation(self, corpus_dir, name):
        rows = check_file(corpus_dir / f"{name}.gcl")
        assert [r for r in rows if r["Status"] != "pass"] == []

    def test_skip_slow(self, tmp_path):
        _copy(tmp_path, "sanitize", "bubble5")
        rows = run_corpus(tmp_path, include_slow=False)
        assert {r["File"] for r in rows} == {"sanitize.gcl"}

    def test_command_passes(self, tmp_path, capsys):
        _copy(tmp_path, "sanitize", "no_flow")
        assert main(["corpus", str(tmp_path)]) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[-1].endswith(", 0 failed")

    def test_command_reports_mismatch(self, tmp_path, capsys):
        _copy(tmp_path, "sanitize")
        (tmp_path / "sanitize.expect").write_text("N=17\ncapacity=4.000\n", encoding="utf-8")
        assert main(["corpus", str(tmp_path)]) == EXIT_USAGE
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "FAIL sanitize.gcl N expected=17 actual=16"
        assert lines[-1] == "1 passed, 1 failed"

    def test_missing_sidecar(self, tmp_path, capsys):
        shutil.copy(CORPUS_DIR / "sanitize.gcl", tmp_path)
        assert main(["corpus", str(tmp_path)]) == EXIT_USAGE
        assert "expectation file not found" in capsys.readouterr().err

    def test_not_a_directory(self, tmp_path, capsys):
        assert main(["corpus", str(tmp_path / "nowhere")]) == EXIT_USAGE

    def test_csv_and_json(self, tmp_path, capsys):
        _copy(tmp_path, "sanitize", "no_flow")
        table = tmp_path / "summary.csv"
        main(["corpus", str(tmp_path), "--csv", str(table), "--json"])
        rows = json.loads(capsys.readouterr().out)
        with table.open(encoding="utf-8", newline="") as f:
            written = list(csv.DictReader(f))
        assert len(written) == len(rows)
        assert [r["File"] for r in written] == sorted(r["File"] for r in rows)
        assert all(r["Status"] == "pass" for r in written)


class TestReportWriter:
    ROWS = [
        {"File": "sanitize.gcl", "Check": "N", "Expected": "16", "Actual": "16", "Status": "pass"},
        {"File": "no_flow.gcl", "Check": "N", "Expected": "1", "Actual": "2", "Status": "FAIL"},
    ]

    def test_summary_csv_is_sorted(self, tmp_path):
        target = tmp_path / "summary.csv"
        write_summary_csv(str(target), self.ROWS)
        lines = target.read_text(encoding="utf-8").splitlines()
        assert lines == [
            "File,Check,Expected,Actual,Status",
            "no_flow.gcl,N,1,2,FAIL",
            "sanitize.gcl,N,16,16,pass",
        ]

    def test_summary_lines(self):
        assert format_summary(self.ROWS)[-1] == "1 passed, 1 failed"


SCHEMA = json.loads((CORPUS_DIR.parent / "docs" / "report.schema.json").read_text(encoding="utf-8"))


def _conforms(schema: dict, data) -> bool:
    """Checks `required`, `enum`, `$ref` and nested items; enough for the shipped report shapes."""
    if "$ref" in schema:
        return _conforms(SCHEMA["$defs"][schema["$ref"].rsplit("/", 1)[-1]], data)
    if "enum" in schema and data not in schema["enum"]:
        return False
    if isinstance(data, dict):
        if not set(schema.get("required", ())) <= data.keys():
            return False
        props = schema.get("properties", {})
        return all(_conforms(props[k], v) for k, v in data.items() if k in props and v is not None)
    if isinstance(data, list) and "items" in schema:
        return all(_conforms(schema["items"], v) for v in data)
    return True


class TestReportSchema:
    @pytest.mark.parametrize("argv, definition", [
        (["capacity", "sanitize.gcl"], "capacityReport"),
        (["label", "sanitize.gcl"], "labelReport"),
        (["bmc", "cbmc_example.gcl", "--bound", "2"], "bmcReport"),
        (["bmc", "cbmc_example.gcl", "--bound", "2", "--classes"], "bmcReport"),
        (["bmc", "foo.gcl", "--bound", "2", "--gen-tests"], "testsReport"),
        (["bmc", "electronic_purse.gcl", "--bound", "2", "--reliability"], "reliabilityReport"),
    ])
    def test_command_report(self, corpus_dir, capsys, argv, definition):
        argv = [argv[0], str(corpus_dir / argv[1]), *argv[2:], "--json"]
        assert main(argv) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert _conforms({"$ref": f"#/$defs/{definition}"}, report)

    def test_corpus_summary(self, tmp_path, capsys):
        _copy(tmp_path, "no_flow")
        main(["corpus", str(tmp_path), "--json"])
        assert _conforms(SCHEMA["$defs"]["corpusSummary"], json.loads(capsys.readouterr().out))

    def test_rejects_wrong_shape(self):
        assert not _conforms({"$ref": "#/$defs/bmcReport"}, {"program": "p", "verdict": "maybe"})
