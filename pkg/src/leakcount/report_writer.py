# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import csv
import json
import operator
import sys
from pathlib import Path
from typing import Iterable, List, Mapping, Optional

from . import settings

SUMMARY_FIELDS = ["File", "Check", "Expected", "Actual", "Status"]


def write_summary_csv(summary_output: str, rows: Iterable[Mapping[str, str]]) -> None:
    """
    Writes the corpus pass/fail table into a CSV file.

    Parameters:
    ----------
    :param summary_output: str
        Path to the output CSV file.
    :param rows: Iterable[Mapping[str, str]]
        One row per checked expectation with the keys `File`, `Check`, `Expected`,
        `Actual` and `Status`.

    Description:
    ------------
    - Sorts the rows by file name, keeping the check order within a file.
    - Writes the data into a CSV file with the headers listed in `SUMMARY_FIELDS`.

    Example usage:
    --------------
    >>> rows = [
    ...     {"File": "sanitize.gcl", "Check": "N", "Expected": "16", "Actual": "16", "Status": "pass"},
    ...     {"File": "no_flow.gcl", "Check": "N", "Expected": "1", "Actual": "1", "Status": "pass"},
    ... ]
    >>> write_summary_csv("summary.csv", rows)

    After execution, `summary.csv` will contain:
    ```
    File,Check,Expected,Actual,Status
    no_flow.gcl,N,1,1,pass
    sanitize.gcl,N,16,16,pass
    ```
    """
    sorted_rows = sorted(rows, key=operator.itemgetter("File"))

    output_path = Path(summary_output)
    with output_path.open("w", encoding="utf-8", newline="") as csvfile:
        csvwriter = csv.DictWriter(csvfile, fieldnames=SUMMARY_FIELDS)
        csvwriter.writeheader()
        for row in sorted_rows:
            csvwriter.writerow({name: row.get(name, "") for name in SUMMARY_FIELDS})


def write_json(data, json_output: Optional[str] = None) -> None:
    """Writes a report as indented JSON to a file, or to stdout when no path is given."""
    text = json.dumps(data, indent=2, sort_keys=False)
    if json_output is None or json_output == "-":
        sys.stdout.write(text + "\n")
        return
    Path(json_output).write_text(text + "\n", encoding="utf-8")


def format_capacity(report) -> str:
    """`N=16 capacity=4.000 bits`, with the policy verdict appended when one was set."""
    line = f"N={report.N} capacity={report.capacity:.{settings.CAPACITY_DECIMALS}f} bits"
    if report.verdict.value == "insecureAtPolicy":
        line += f" (leaks at least {report.policy} bits: insecure at policy)"
    return line


def format_labels(report) -> List[str]:
    lines = []
    for i, lp in enumerate(report.paths):
        lines.append(f"path {i}: {lp.label.value:<8} pc={lp.summary.to_json()['pc']}")
        if lp.in_count is not None:
            lines[-1] += f" inputs={lp.in_count}"
    counts = report.label_counts()
    lines.append("labels " + " ".join(f"{k}:{v}" for k, v in counts.items()))
    lines.append(f"bound={report.report.upper_bound_bits:.{settings.CAPACITY_DECIMALS}f} bits")
    return lines


def format_bmc(result) -> List[str]:
    lines = [f"{result.verdict.value} ({result.paths} paths, {result.disjuncts} disjuncts, {result.batches} batches)"]
    for c in result.counterexamples:
        values = " ".join(f"{k}={v}" for k, v in c.inputs.items())
        lines.append(f"counterexample: {values}" if values else "counterexample: (no inputs)")
    return lines


def format_summary(rows: Iterable[Mapping[str, str]]) -> List[str]:
    rows = list(rows)
    lines = [f"{r['Status']:<4} {r['File']} {r['Check']} expected={r['Expected']} actual={r['Actual']}" for r in rows]
    failed = sum(1 for r in rows if r["Status"] != "pass")
    lines.append(f"{len(rows) - failed} passed, {failed} failed")
    return lines
