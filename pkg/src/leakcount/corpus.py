# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from . import settings
from .bmc import BmcConfig, check_concurrent, enumerate_counterexamples, generate_tests, reliability
from .errors import MissingExpectation
from .gcl_parser import load_program
from .qif_capacity import QifQuery, analyze as analyze_capacity
from .selfcomp import analyze as analyze_labels
from .symexec import bmc_formula, execute

logger = logging.getLogger(__name__)

SETTING_KEYS = ("unwind", "depth", "route", "algorithm", "slow")
CHECK_KEYS = ("N", "capacity", "bound", "labels", "bmc", "classes", "tests", "disjuncts", "reliability")


@dataclass
class Expectation:
    """Parsed `.expect` sidecar: run settings plus the values to compare."""

    path: Path
    options: Dict[str, str] = field(default_factory=dict)
    checks: Dict[str, str] = field(default_factory=dict)

    @property
    def unwind(self) -> int:
        return int(self.options.get("unwind", settings.DEFAULT_BOUND))

    @property
    def depth(self) -> int:
        return int(self.options.get("depth", self.unwind))

    @property
    def slow(self) -> bool:
        return self.options.get("slow", "false").lower() == "true"


def parse_expect(path: Path) -> Expectation:
    """
    Reads a `key=value` expectation file.

    Blank lines and lines starting with `#` are ignored. Setting keys are
    `unwind` (unrolling bound), `depth` (symbolic execution bound, defaults
    to `unwind`), `route`, `algorithm` and `slow`; every other key must be one
    of `CHECK_KEYS`.

    Example usage:
    --------------
    With `corpus/sanitize.expect` containing:
    ```
    N=16
    capacity=4.000
    bound=4.087
    labels=direct:1,indirect:1
    ```
    >>> parse_expect(Path("corpus/sanitize.expect")).checks["N"]
    '16'

    Possible errors:
    ----------------
    - `MissingExpectation`: the file is missing, a line is not `key=value`, a key is
      unknown or no check is given.
    """
    if not path.is_file():
        raise MissingExpectation(f"{path}: expectation file not found")
    exp = Expectation(path)
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise MissingExpectation(f"{path}:{lineno}: expected key=value, got '{line}'")
        if key in SETTING_KEYS:
            exp.options[key] = value
        elif key in CHECK_KEYS:
            exp.checks[key] = value
        else:
            raise MissingExpectation(f"{path}:{lineno}: unknown key '{key}'")
    if not exp.checks:
        raise MissingExpectation(f"{path}: no expected value given")
    return exp


def _labels_text(counts: Dict[str, int]) -> str:
    return ",".join(f"{k}:{v}" for k, v in counts.items() if v)


def _normalize_labels(text: str) -> str:
    parts = dict(item.split(":", 1) for item in text.split(",") if item)
    counts = {k: int(parts.get(k, 0)) for k in ("clean", "indirect", "direct")}
    return _labels_text(counts)


def _row(name: str, check: str, expected: str, actual: str) -> Dict[str, str]:
    return {"File": name, "Check": check, "Expected": expected, "Actual": actual,
            "Status": "pass" if expected == actual else "FAIL"}


def check_file(program_path: Path, exp: Optional[Expectation] = None) -> List[Dict[str, str]]:
    """Runs every analysis the expectation asks for and returns one row per check."""
    exp = exp or parse_expect(program_path.with_suffix(".expect"))
    p = load_program(program_path)
    name = program_path.name
    checks = exp.checks
    rows = []
    decimals = settings.CAPACITY_DECIMALS
    if "N" in checks or "capacity" in checks:
        q = QifQuery(p, exp.unwind, route=exp.options.get("route", settings.DEFAULT_ROUTE),
                     algorithm=exp.options.get("algorithm", settings.DEFAULT_ALGORITHM), want_outputs=False)
        report = analyze_capacity(q)
        if "N" in checks:
            rows.append(_row(name, "N", checks["N"], str(report.N)))
        if "capacity" in checks:
            rows.append(_row(name, "capacity", checks["capacity"], f"{report.capacity:.{decimals}f}"))
    if "bound" in checks or "labels" in checks:
        labels = analyze_labels(p, exp.depth)
        if "bound" in checks:
            rows.append(_row(name, "bound", checks["bound"], f"{labels.report.upper_bound_bits:.{decimals}f}"))
        if "labels" in checks:
            rows.append(_row(name, "labels", _normalize_labels(checks["labels"]), _labels_text(labels.label_counts())))
    if "bmc" in checks:
        result = check_concurrent(p, BmcConfig(bound=exp.depth))
        rows.append(_row(name, "bmc", checks["bmc"], result.verdict.value))
    if "disjuncts" in checks:
        rows.append(_row(name, "disjuncts", checks["disjuncts"], str(len(bmc_formula(execute(p, exp.depth))))))
    if "classes" in checks:
        result = enumerate_counterexamples(p, BmcConfig(bound=exp.unwind))
        rows.append(_row(name, "classes", checks["classes"], str(len(result.counterexamples))))
    if "tests" in checks:
        rows.append(_row(name, "tests", checks["tests"], str(len(generate_tests(p, BmcConfig(bound=exp.unwind))))))
    if "reliability" in checks:
        r = reliability(p, BmcConfig(bound=exp.depth))
        rows.append(_row(name, "reliability", checks["reliability"], f"{r.reliability:.{decimals}f}"))
    return rows


def run_corpus(directory: Path, include_slow: bool = True) -> List[Dict[str, str]]:
    """
    Checks every `.gcl` program of a directory against its `.expect` sidecar.

    Parameters:
    ----------
    :param directory: Path
        Directory holding `name.gcl` / `name.expect` pairs.
    :param include_slow: bool
        When False, programs whose expectation sets `slow=true` are skipped.

    Return value:
    -------------
    :return: List[Dict[str, str]]
        Rows of the summary table (see `report_writer.SUMMARY_FIELDS`), in file order.

    Possible errors:
    ----------------
    - `MissingExpectation`: a program has no usable sidecar.
    """
    rows: List[Dict[str, str]] = []
    for program_path in sorted(Path(directory).glob("*.gcl")):
        exp = parse_expect(program_path.with_suffix(".expect"))
        if exp.slow and not include_slow:
            logger.info("skipping slow program %s", program_path.name)
            continue
        file_rows = check_file(program_path, exp)
        failed = [r["Check"] for r in file_rows if r["Status"] != "pass"]
        if failed:
            logger.warning("%s: mismatch in %s", program_path.name, ", ".join(failed))
        rows.extend(file_rows)
    return rows
