# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

"""
Propositional DPLL engine over DIMACS-style integer literals.

Clauses live in frames, one per push level. Frame 0 holds permanent clauses
(gate definitions and depth-0 assertions); popping a frame retires its
clauses, including the clauses learned while it was open. Every `solve` call
starts from an empty assignment, decides the lowest unassigned variable
first and tries `true` before `false`.
"""

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

from . import settings
from .errors import StackUnderflow

logger = logging.getLogger(__name__)

TRUE_LIT = 1


class _Clause:
    __slots__ = ("lits", "level", "learned", "removed")

    def __init__(self, lits: List[int], level: int, learned: bool = False):
        self.lits = lits
        self.level = level
        self.learned = learned
        self.removed = False


class _Frame:
    __slots__ = ("clauses", "units", "learned_units", "empty")

    def __init__(self):
        self.clauses: List[_Clause] = []
        self.units: List[int] = []
        self.learned_units: List[int] = []
        self.empty = False


def _widx(lit: int) -> int:
    return 2 * lit if lit > 0 else -2 * lit + 1


class DpllEngine:
    """
    SAT engine with two search modes.

    With `learning=False` it is plain chronological DPLL: each decision keeps a
    flipped flag and a conflict flips the most recent unflipped decision.
    With `learning=True` conflicts are analysed to the first unique
    implication point, the learned clause is kept until its push level is
    popped, and search backjumps to the clause's second-highest level.

    Example usage:
    --------------
    >>> e = DpllEngine(learning=False)
    >>> a, b = e.new_var(), e.new_var()
    >>> e.add_clause([a, b]); e.add_clause([-a])
    >>> e.solve(), e.lit_value(b)
    (True, True)
    """

    def __init__(self, learning: Optional[bool] = None):
        self.learning = settings.SAT_LEARNING if learning is None else learning
        self.num_vars = 0
        self.assigns: List[int] = [0]
        self.levels: List[int] = [0]
        self.reasons: List[Optional[_Clause]] = [None]
        self.watches: List[List[_Clause]] = [[], []]
        self.frames: List[_Frame] = [_Frame()]
        self.trail: List[int] = []
        self.trail_lim: List[int] = []
        self.flipped: List[bool] = []
        self.qhead = 0
        self.cursor = 1
        self.learned_count = 0
        self.stats = {"solves": 0, "decisions": 0, "conflicts": 0, "propagations": 0}
        true_var = self.new_var()
        self.frames[0].units.append(true_var)

    # Problem construction

    @property
    def depth(self) -> int:
        return len(self.frames) - 1

    def new_var(self) -> int:
        self.num_vars += 1
        self.assigns.append(0)
        self.levels.append(0)
        self.reasons.append(None)
        self.watches.append([])
        self.watches.append([])
        return self.num_vars

    def add_clause(self, lits: Sequence[int], level: Optional[int] = None) -> None:
        """
        Adds a clause to the frame `level` (default: the current depth).

        The constant literal `TRUE_LIT` satisfies a clause, `-TRUE_LIT` is dropped.
        """
        level = self.depth if level is None else level
        frame = self.frames[level]
        seen = set()
        clause = []
        for lit in lits:
            if lit == TRUE_LIT or -lit in seen:
                return
            if lit == -TRUE_LIT or lit in seen:
                continue
            seen.add(lit)
            clause.append(lit)
        if not clause:
            frame.empty = True
        elif len(clause) == 1:
            frame.units.append(clause[0])
        else:
            c = _Clause(clause, level)
            frame.clauses.append(c)
            self.watches[_widx(clause[0])].append(c)
            self.watches[_widx(clause[1])].append(c)

    def push(self) -> None:
        self.frames.append(_Frame())

    def pop(self, n: int = 1) -> None:
        if n > self.depth:
            raise StackUnderflow(f"pop({n}) at depth {self.depth}")
        for _ in range(n):
            frame = self.frames.pop()
            for c in frame.clauses:
                c.removed = True
                if c.learned:
                    self.learned_count -= 1
            self.learned_count -= len(frame.learned_units)

    def drop_learned(self) -> None:
        for frame in self.frames:
            for c in frame.clauses:
                if c.learned:
                    c.removed = True
            frame.clauses = [c for c in frame.clauses if not c.learned]
            frame.learned_units = []
        self.learned_count = 0

    # Assignment

    def lit_value(self, lit: int) -> bool:
        v = self.assigns[lit] if lit > 0 else -self.assigns[-lit]
        return v > 0

    def _value(self, lit: int) -> int:
        return self.assigns[lit] if lit > 0 else -self.assigns[-lit]

    def _enqueue(self, lit: int, reason: Optional[_Clause]) -> bool:
        v = abs(lit)
        current = self.assigns[v]
        if current != 0:
            return (current > 0) == (lit > 0)
        self.assigns[v] = 1 if lit > 0 else -1
        self.levels[v] = len(self.trail_lim)
        self.reasons[v] = reason
        self.trail.append(lit)
        return True

    def _cancel_until(self, level: int) -> None:
        if len(self.trail_lim) <= level:
            return
        start = self.trail_lim[level]
        assigns, reasons = self.assigns, self.reasons
        lowest = self.cursor
        for lit in self.trail[start:]:
            v = abs(lit)
            assigns[v] = 0
            reasons[v] = None
            if v < lowest:
                lowest = v
        self.cursor = lowest
        del self.trail[start:]
        del self.trail_lim[level:]
        del self.flipped[level:]
        self.qhead = len(self.trail)

    def _reset(self) -> None:
        for lit in self.trail:
            v = abs(lit)
            self.assigns[v] = 0
            self.reasons[v] = None
        self.trail = []
        self.trail_lim = []
        self.flipped = []
        self.qhead = 0
        self.cursor = 1

    # Search

    def _propagate(self) -> Optional[_Clause]:
        assigns = self.assigns
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = -p
            wi = _widx(false_lit)
            ws = watches[wi]
            kept = []
            i = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c.removed:
                    continue
                lits = c.lits
                if lits[0] == false_lit:
                    lits[0], lits[1] = lits[1], false_lit
                first = lits[0]
                fv = assigns[first] if first > 0 else -assigns[-first]
                if fv > 0:
                    kept.append(c)
                    continue
                moved = False
                for k in range(2, len(lits)):
                    lk = lits[k]
                    if (assigns[lk] if lk > 0 else -assigns[-lk]) >= 0:
                        lits[1], lits[k] = lk, false_lit
                        watches[_widx(lk)].append(c)
                        moved = True
                        break
                if moved:
                    continue
                kept.append(c)
                if fv < 0:
                    kept.extend(ws[i:])
                    watches[wi] = kept
                    self.qhead = len(trail)
                    return c
                self.stats["propagations"] += 1
                self._enqueue(first, c)
            watches[wi] = kept
        return None

    def _pick(self) -> int:
        assigns = self.assigns
        v = self.cursor
        n = self.num_vars
        while v <= n and assigns[v] != 0:
            v += 1
        self.cursor = v
        return v if v <= n else 0

    def _decide(self, lit: int, flipped: bool = False) -> None:
        self.trail_lim.append(len(self.trail))
        self.flipped.append(flipped)
        self._enqueue(lit, None)

    def _analyze(self, confl: _Clause):
        seen = set()
        learnt = [0]
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        current = len(self.trail_lim)
        clause = confl
        levels = self.levels
        while True:
            for q in clause.lits:
                if q == p:
                    continue
                v = abs(q)
                if v in seen or levels[v] == 0:
                    continue
                seen.add(v)
                if levels[v] == current:
                    counter += 1
                else:
                    learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            clause = self.reasons[abs(p)]
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        best = 1
        for k in range(2, len(learnt)):
            if levels[abs(learnt[k])] > levels[abs(learnt[best])]:
                best = k
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, levels[abs(learnt[1])]

    def _learn(self, learnt: List[int]) -> None:
        frame = self.frames[-1]
        self.learned_count += 1
        if len(learnt) == 1:
            frame.learned_units.append(learnt[0])
            self._enqueue(learnt[0], None)
            return
        c = _Clause(learnt, self.depth, learned=True)
        frame.clauses.append(c)
        self.watches[_widx(learnt[0])].append(c)
        self.watches[_widx(learnt[1])].append(c)
        self._enqueue(learnt[0], c)

    def _start(self) -> bool:
        self._reset()
        if self.learned_count > settings.LEARNED_CLAUSE_CAP:
            logger.debug("dropping %d learned clauses", self.learned_count)
            self.drop_learned()
        for frame in self.frames:
            if frame.empty:
                return False
            for lit in frame.units + frame.learned_units:
                if not self._enqueue(lit, None):
                    return False
        return True

    def solve(self) -> bool:
        """
        Decides satisfiability of the clauses in all open frames.

        On True, `lit_value` reads a total satisfying assignment until the next
        change to the clause set.
        """
        self.stats["solves"] += 1
        if not self._start():
            return False
        if self.learning:
            return self._search_learning()
        return self._search_chronological()

    def _search_learning(self) -> bool:
        while True:
            confl = self._propagate()
            if confl is not None:
                self.stats["conflicts"] += 1
                if not self.trail_lim:
                    return False
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                self._learn(learnt)
                continue
            v = self._pick()
            if v == 0:
                return True
            self.stats["decisions"] += 1
            self._decide(v)

    def _search_chronological(self) -> bool:
        while True:
            confl = self._propagate()
            if confl is not None:
                self.stats["conflicts"] += 1
                while self.flipped and self.flipped[-1]:
                    self._cancel_until(len(self.trail_lim) - 1)
                if not self.flipped:
                    return False
                level = len(self.trail_lim) - 1
                decision = self.trail[self.trail_lim[level]]
                self._cancel_until(level)
                self._decide(-decision, flipped=True)
                continue
            v = self._pick()
            if v == 0:
                return True
            self.stats["decisions"] += 1
            self._decide(v)

    # Export

    def active_clauses(self) -> List[List[int]]:
        out = []
        for frame in self.frames:
            if frame.empty:
                out.append([])
            out.extend([lit] for lit in frame.units)
            out.extend(list(c.lits) for c in frame.clauses if not c.learned)
        return out

    def dump_dimacs(self, path: Union[str, Path]) -> Path:
        """Writes the non-learned clauses of all open frames in DIMACS CNF."""
        clauses = self.active_clauses()
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8") as f:
            f.write(f"c leakcount dump, depth {self.depth}\n")
            f.write(f"p cnf {self.num_vars} {len(clauses)}\n")
            for clause in clauses:
                f.write(" ".join(str(lit) for lit in clause) + " 0\n")
        logger.debug("wrote %d clauses to %s", len(clauses), target)
        return target
