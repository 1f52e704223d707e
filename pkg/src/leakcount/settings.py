# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import os
from typing import Mapping, Optional

# Analysis defaults
DEFAULT_BOUND = 1
DEFAULT_ROUTE = "formula"
DEFAULT_ALGORITHM = "dfs"

# Concurrent BMC: disjuncts per batch and worker threads
DEFAULT_BATCH_SIZE = 200
DEFAULT_WORKERS = 1

# SAT engine
# A bare check() is plain chronological DPLL; analyses over unrolled programs opt into 1-UIP learning.
SAT_LEARNING = False
ANALYSIS_LEARNING = True
# Learned clauses are dropped wholesale at the start of a check once this many accumulated
LEARNED_CLAUSE_CAP = 20000

# countInputs enumeration cap, log2 of the number of enumerated input valuations
DEFAULT_MAX_INPUT_BITS = 20
MAX_INPUT_BITS_ENV = "LEAKCOUNT_MAX_INPUT_BITS"
DIMACS_DIR_ENV = "LEAKCOUNT_DIMACS_DIR"

# Reports
CAPACITY_DECIMALS = 3
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Literal width used when an expression gives no context (as a C int)
DEFAULT_LITERAL_WIDTH = 32
MAX_WIDTH = 64


def max_input_bits(environ: Optional[Mapping[str, str]] = None) -> int:
    """
    Returns the input-counting cap, honouring `LEAKCOUNT_MAX_INPUT_BITS`.

    `environ` defaults to the process environment.

    Example usage:
    --------------
    >>> max_input_bits({"LEAKCOUNT_MAX_INPUT_BITS": "12"})
    12
    >>> max_input_bits({"LEAKCOUNT_MAX_INPUT_BITS": "many"})
    20
    """
    raw = (os.environ if environ is None else environ).get(MAX_INPUT_BITS_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_MAX_INPUT_BITS
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_MAX_INPUT_BITS
    return max(value, 0)


def dimacs_dir() -> Optional[str]:
    """Directory for per-check DIMACS dumps, or None when dumping is off."""
    raw = os.environ.get(DIMACS_DIR_ENV)
    return raw if raw else None
