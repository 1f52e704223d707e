# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

from pathlib import Path

import pytest

from src.leakcount.corpus import parse_expect
from src.leakcount.gcl_interp import input_bits, reachable_outputs
from src.leakcount.gcl_parser import load_program

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"
SCRIPTS_DIR = CORPUS_DIR / "scripts"


def corpus_names(include_slow: bool = False):
    names = []
    for path in sorted(CORPUS_DIR.glob("*.gcl")):
        if include_slow or not parse_expect(path.with_suffix(".expect")).slow:
            names.append(path.stem)
    return names


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS_DIR


@pytest.fixture(scope="session")
def scripts_dir() -> Path:
    return SCRIPTS_DIR


@pytest.fixture(scope="session")
def load():
    """Loads a corpus program by stem, e.g. load("sanitize")."""
    cache = {}

    def _load(name: str):
        if name not in cache:
            cache[name] = load_program(CORPUS_DIR / f"{name}.gcl")
        return cache[name]

    return _load


@pytest.fixture(scope="session")
def expect():
    def _expect(name: str):
        return parse_expect(CORPUS_DIR / f"{name}.expect")

    return _expect


@pytest.fixture(scope="session")
def brute_outputs():
    """Distinct outputs by exhaustive interpretation; only for programs with few input bits."""

    def _outputs(program, loop_bound=None, max_bits: int = 16):
        assert input_bits(program) <= max_bits, f"{program.name}: too many input bits for brute force"
        return reachable_outputs(program, loop_bound)

    return _outputs
