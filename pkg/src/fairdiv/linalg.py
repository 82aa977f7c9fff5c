"""Exact rational row reduction for the answer-strategy bookkeeping.

The central object is a value-augmented tableau: a row space kept in
reduced echelon form where every row carries the scalar that the row
vector must evaluate to.  Reducing a query vector against the tableau
simultaneously tells whether its answer is already determined and, if
so, what the answer is.  Everything is Fraction arithmetic; there are
no tolerances anywhere in this module.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from fairdiv.model import ContractViolation

__all__ = ["Tableau", "solve_square"]


def _as_fractions(vec: Sequence) -> list[Fraction]:
    return [x if isinstance(x, Fraction) else Fraction(x) for x in vec]


class Tableau:
    """Rows (b, a) in reduced echelon form, meaning b . x = a for every
    consistent assignment x.  Insertion keeps full reduction: each pivot
    column is zero in every other row, so once the rank reaches the
    width the rows are standard basis vectors and the values are the
    unique solution."""

    def __init__(self, width: int):
        if width < 0:
            raise ContractViolation("tableau width must be nonnegative")
        self.width = width
        self.rows: list[list[Fraction]] = []
        self.values: list[Fraction] = []
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def copy(self) -> "Tableau":
        dup = Tableau(self.width)
        dup.rows = [row[:] for row in self.rows]
        dup.values = self.values[:]
        dup.pivots = self.pivots[:]
        return dup

    def reduce(self, vec: Sequence) -> tuple[list[Fraction], Fraction]:
        """Remainder r and accumulated value a with vec . x = a + r . x.

        A zero remainder means the vector lies in the row space and its
        evaluation is determined to be exactly a.
        """
        if len(vec) != self.width:
            raise ContractViolation("vector width disagrees with the tableau")
        r = _as_fractions(vec)
        acc = Fraction(0)
        for row, val, p in zip(self.rows, self.values, self.pivots):
            c = r[p]
            if c:
                for j in range(self.width):
                    if row[j]:
                        r[j] -= c * row[j]
                acc += c * val
        return r, acc

    def determined(self, vec: Sequence) -> Fraction | None:
        r, acc = self.reduce(vec)
        return acc if not any(r) else None

    def insert(self, vec: Sequence, value) -> bool:
        """Add the constraint vec . x = value.

        Returns True when the constraint increased the rank.  A dependent
        but contradictory constraint raises, since the callers only ever
        insert facts that must stay satisfiable.
        """
        r, acc = self.reduce(vec)
        target = (value if isinstance(value, Fraction) else Fraction(value)) - acc
        pivot = next((j for j, c in enumerate(r) if c), None)
        if pivot is None:
            if target != 0:
                raise ContractViolation("inconsistent constraint inserted into tableau")
            return False
        lead = r[pivot]
        r = [c / lead for c in r]
        target /= lead
        # keep the reduction total: clear the new pivot from existing rows
        for i, row in enumerate(self.rows):
            c = row[pivot]
            if c:
                for j in range(self.width):
                    if r[j]:
                        row[j] -= c * r[j]
                self.values[i] -= c * target
        at = next((i for i, p in enumerate(self.pivots) if p > pivot), len(self.pivots))
        self.rows.insert(at, r)
        self.values.insert(at, target)
        self.pivots.insert(at, pivot)
        return True

    def free_columns(self) -> list[int]:
        taken = set(self.pivots)
        return [j for j in range(self.width) if j not in taken]

    def null_direction(self, free_col: int) -> list[Fraction]:
        """The null-space vector with 1 at free_col and 0 at the other
        free columns; adding any multiple of it preserves every stored
        constraint."""
        if free_col in self.pivots:
            raise ContractViolation("null direction must be anchored at a free column")
        d = [Fraction(0)] * self.width
        d[free_col] = Fraction(1)
        for row, p in zip(self.rows, self.pivots):
            d[p] = -row[free_col]
        return d

    def solution(self) -> list[Fraction]:
        """The unique solution once the tableau has full rank."""
        if self.rank != self.width:
            raise ContractViolation("tableau is not full rank; no unique solution")
        out = [Fraction(0)] * self.width
        for val, p in zip(self.values, self.pivots):
            out[p] = val
        return out


def solve_square(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """Exact solution of a full-rank square system; raises when singular."""
    if len(rows) != len(rhs):
        raise ContractViolation("row and right-hand-side counts differ")
    width = len(rows[0]) if rows else 0
    tab = Tableau(width)
    for row, b in zip(rows, rhs):
        if len(row) != width:
            raise ContractViolation("ragged matrix")
        tab.insert(row, b)
    return tab.solution()
