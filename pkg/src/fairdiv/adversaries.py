"""Adaptive answer strategies realizing the query lower bounds.

Each adversary plays the oracle side of the query game: it answers value
queries without ever committing to a concrete valuation, keeping at
least two mutually incompatible completions alive for as long as the
underlying counting argument allows.  At any point it can materialize a
valuation that reproduces every answer it has given with exact rational
equality, so a driver that stops early is refuted by an explicit
instance rather than an existence claim.

All arithmetic is exact; none of the strategies owns a tolerance.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, NamedTuple, Sequence

from fairdiv.linalg import Tableau
from fairdiv.model import (
    AdditiveValuation,
    Allocation,
    BinaryValuation,
    Bundle,
    ContractViolation,
    QueryBudgetExhausted,
    TableValuation,
    Valuation,
    ValuationOracle,
    Value,
)

__all__ = [
    "AnswerRecord",
    "AdversarySession",
    "MonotonicEfAdversary",
    "AdditiveEfAdversary",
    "EfxAdversary",
    "PairsAdversary",
    "monotonic_ef_decision_adversary",
    "additive_ef_decision_adversary",
    "efx_additive_adversary",
    "pairs_ef1_adversary",
    "replay_consistency",
]


class AnswerRecord(NamedTuple):
    agent: int
    goods: frozenset
    value: Value


class AdversarySession:
    """Common plumbing: transcript, validation, oracle packaging."""

    kind = "abstract"

    def __init__(self, n: int, m: int):
        self.n = n
        self.m = m
        self.transcript: list[AnswerRecord] = []

    def answer(self, agent: int, goods: frozenset) -> Value:
        raise NotImplementedError

    def _check(self, agent: int, goods: frozenset) -> frozenset:
        if not 0 <= agent < self.n:
            raise ContractViolation(f"agent {agent} out of range")
        goods = frozenset(goods)
        if goods and (min(goods) < 0 or max(goods) >= self.m):
            raise ContractViolation("query references an out-of-range good")
        return goods

    def _record(self, agent: int, goods: frozenset, value: Value) -> Value:
        self.transcript.append(AnswerRecord(agent, goods, value))
        return value

    @property
    def full_log(self) -> list[AnswerRecord]:
        """Everything the session has asserted about the valuations."""
        return list(self.transcript)

    def oracle_for(self, agent: int) -> ValuationOracle:
        def answerer(bundle: Bundle) -> Value:
            return self.answer(agent, bundle.goods)

        return ValuationOracle(agent, self.m, answerer, monotonic=True)

    def oracles(self) -> list[ValuationOracle]:
        return [self.oracle_for(i) for i in range(self.n)]


# ---------------------------------------------------------------------------
# Envy-freeness decision, two identical monotonic agents


class MonotonicEfAdversary(AdversarySession):
    """Forces a decider to query every half-size subset.

    Subsets of size s != m/2 are worth exactly 2s.  Each newly queried
    half-size subset gets m plus a fresh offset; the offsets are distinct
    and small enough that the table stays strictly monotone, so no two
    complementary halves are ever answered equal.  Until every half-size
    subset has been queried, some complementary pair can still be set
    equal (an envy-free split exists) or left unequal (none exists).
    """

    kind = "monotonic-ef"
    TABLE_LIMIT = 16  # materialization enumerates all 2^m subsets

    def __init__(self, m: int):
        if m < 2 or m % 2:
            raise ContractViolation("this adversary needs an even number of goods, at least 2")
        super().__init__(2, m)
        self.half = m // 2
        self.total_mid = comb(m, self.half)
        self.mid_answers: dict[frozenset, Fraction] = {}

    def _offset(self, i: int) -> Fraction:
        return Fraction(i, 2 * self.total_mid)

    def answer(self, agent: int, goods: frozenset) -> Value:
        goods = self._check(agent, goods)
        s = len(goods)
        if s != self.half:
            return self._record(agent, goods, 2 * s)
        val = self.mid_answers.get(goods)
        if val is None:
            val = self.m + self._offset(len(self.mid_answers) + 1)
            self.mid_answers[goods] = val
        return self._record(agent, goods, val)

    @property
    def mids_remaining(self) -> int:
        return self.total_mid - len(self.mid_answers)

    def worlds_open(self) -> tuple[str, ...]:
        if self.mids_remaining > 0:
            return ("ef", "noef")
        return ("noef",)

    def materialize(self, world: str | None = None) -> TableValuation:
        open_worlds = self.worlds_open()
        if world is None:
            if len(open_worlds) > 1:
                raise ContractViolation("both worlds are still open; name one to materialize")
            world = open_worlds[0]
        if world not in ("ef", "noef"):
            raise ContractViolation(f"unknown world {world!r}")
        if world not in open_worlds:
            raise ContractViolation("the answers so far rule the envy-free world out")
        if self.m > self.TABLE_LIMIT:
            raise ContractViolation("table materialization is desk-scale only")

        entries: dict[frozenset, Value] = {}
        for s in range(self.m + 1):
            if s == self.half:
                continue
            for combo in itertools.combinations(range(self.m), s):
                entries[frozenset(combo)] = 2 * s
        entries.update(self.mid_answers)

        nxt = len(self.mid_answers)
        equal_pair: frozenset | None = None
        if world == "ef":
            full = frozenset(range(self.m))
            for combo in itertools.combinations(range(self.m), self.half):
                mid = frozenset(combo)
                if mid not in self.mid_answers:
                    equal_pair = mid
                    partner = entries.get(full - mid)
                    entries[mid] = partner if partner is not None else self.m
                    if partner is None:
                        entries[full - mid] = self.m
                    break
        for combo in itertools.combinations(range(self.m), self.half):
            mid = frozenset(combo)
            if mid not in entries:
                nxt += 1
                entries[mid] = self.m + self._offset(nxt)
        if equal_pair is not None:
            entries[equal_pair] = entries[frozenset(range(self.m)) - equal_pair]
        return TableValuation(self.m, entries)


# ---------------------------------------------------------------------------
# Envy-freeness decision, two identical additive agents


def _indicator(goods: frozenset, m: int) -> list[int]:
    row = [0] * m
    for g in goods:
        row[g] = 1
    return row


class AdditiveEfAdversary(AdversarySession):
    """Keeps the envy-free decision open through m-1 value queries.

    An envy-free split exists exactly when some sign vector w (+1 on one
    side, -1 on the other) satisfies w . x = 0 for the weight vector x.
    Queries whose indicator vector is spanned by earlier ones are
    answered by the determined value; independent queries are answered
    near the subset size while dodging, for every sign vector the new
    query would pin down, the one answer that would force w . x = 0.
    Materialization appends a balanced unseen sign vector with value 0
    (envy-free world) or a small nonzero value clearing every sign
    vector (no-envy-free world).
    """

    kind = "additive-ef"
    SIGN_LIMIT = 20  # sign-vector sweeps enumerate 2^(m-1) vectors

    def __init__(self, m: int):
        if m < 2 or m % 2:
            raise ContractViolation("this adversary needs an even number of goods, at least 2")
        if m > self.SIGN_LIMIT:
            raise ContractViolation("sign-vector bookkeeping is desk-scale only; refusing large m")
        super().__init__(2, m)
        self.budget = m - 1
        self.asked = 0
        self.tab = Tableau(m)
        self.delta = Fraction(1, 2 * factorial(m) * m ** ((m + 1) // 2))
        self.padding: list[AnswerRecord] = []

    # -- answering ----------------------------------------------------

    def _half_signs(self) -> Iterable[tuple[int, ...]]:
        # w and -w force the same answers, so sweep only first-entry +1
        for tail in itertools.product((1, -1), repeat=self.m - 1):
            yield (1,) + tail

    def _offsets(self) -> Iterable[Fraction]:
        yield Fraction(0)
        d = 2
        while True:
            yield self.delta / d
            yield -self.delta / d
            d += 1

    def _pick(self, center: Fraction, forbidden: set[Fraction]) -> Fraction:
        for off in self._offsets():
            t = center + off
            if t not in forbidden:
                return t
        raise AssertionError("unreachable: finitely many forbidden answers")

    def _value_for(self, vec: list[int], size: int) -> Fraction:
        r, acc = self.tab.reduce(vec)
        if not any(r):
            return acc
        pivot = next(j for j, c in enumerate(r) if c)
        forbidden: set[Fraction] = set()
        for w in self._half_signs():
            rw, accw = self.tab.reduce(w)
            if not any(rw):
                continue  # already determined, and determined nonzero
            if rw[pivot] == 0:
                continue
            lam = rw[pivot] / r[pivot]
            if all(rw[j] == lam * r[j] for j in range(self.m)):
                # w . x = accw + lam * (t - acc): dodge the root
                forbidden.add(acc - accw / lam)
        t = self._pick(Fraction(size), forbidden)
        self.tab.insert(vec, t)
        return t

    def answer(self, agent: int, goods: frozenset) -> Value:
        goods = self._check(agent, goods)
        vec = _indicator(goods, self.m)
        det = self.tab.determined(vec)
        if det is not None:
            return self._record(agent, goods, det)
        if self.asked >= self.budget:
            raise QueryBudgetExhausted(
                f"the lower-bound game grants {self.budget} independent queries; refusing more")
        self.asked += 1
        return self._record(agent, goods, self._value_for(vec, len(goods)))

    # -- materialization ----------------------------------------------

    def _pad_to_corank_one(self) -> None:
        for j in range(self.m):
            if self.tab.rank >= self.m - 1:
                return
            vec = _indicator(frozenset({j}), self.m)
            if self.tab.determined(vec) is not None:
                continue
            val = self._value_for(vec, 1)
            self.padding.append(AnswerRecord(0, frozenset({j}), val))

    def _fresh_balanced(self) -> list[int]:
        for plus in itertools.combinations(range(self.m), self.m // 2):
            w = [-1] * self.m
            for j in plus:
                w[j] = 1
            if self.tab.determined(w) is None:
                return w
        raise AssertionError("unreachable: query vectors never span the balanced space")

    def _solve_with(self, w: list[int], t: Fraction) -> list[Fraction]:
        tab = self.tab.copy()
        tab.insert(w, t)
        return tab.solution()

    def materialize(self, world: str) -> AdditiveValuation:
        if world not in ("ef", "noef"):
            raise ContractViolation(f"unknown world {world!r}")
        self._pad_to_corank_one()
        w = self._fresh_balanced()
        if world == "ef":
            x = self._solve_with(w, Fraction(0))
        else:
            x0 = self._solve_with(w, Fraction(0))
            x1 = self._solve_with(w, Fraction(1))
            drift = [b - a for a, b in zip(x0, x1)]
            forbidden = {Fraction(0)}
            for s in self._half_signs():
                a = sum(si * xi for si, xi in zip(s, x0))
                b = sum(si * di for si, di in zip(s, drift))
                if b == 0:
                    if a == 0:
                        raise AssertionError("a determined sign vector was forced to zero")
                    continue
                forbidden.add(-a / b)
            t = next(self.delta / d * sgn
                     for d in itertools.count(2) for sgn in (1, -1)
                     if self.delta / d * sgn not in forbidden)
            x = self._solve_with(w, t)
        if any(xi <= 0 for xi in x):
            raise ContractViolation("perturbation bound failed to keep the weights positive")
        return AdditiveValuation(x)

    @property
    def full_log(self) -> list[AnswerRecord]:
        return list(self.transcript) + list(self.padding)


# ---------------------------------------------------------------------------
# EFX search, two identical additive agents


class EfxAdversary(AdversarySession):
    """Refutes any EFX claim made after fewer than (m-1)/2 queries.

    Every query is answered by the subset size.  Against the committed
    allocation, the smaller bundle either has fewer than (m-1)/2 goods,
    in which case the all-ones valuation already breaks EFX, or exactly
    that many, in which case the larger bundle keeps a free variable
    under the logged constraints and a downward nudge of that variable
    leaves removable envy behind.
    """

    kind = "efx"

    def __init__(self, m: int):
        if m < 3 or m % 2 == 0:
            raise ContractViolation("this adversary needs an odd number of goods, at least 3")
        super().__init__(2, m)
        self.k = (m - 1) // 2
        self.budget = self.k - 1
        self.asked = 0

    def answer(self, agent: int, goods: frozenset) -> Value:
        goods = self._check(agent, goods)
        if self.asked >= self.budget:
            raise QueryBudgetExhausted(
                f"the lower-bound game grants {self.budget} queries; refusing more")
        self.asked += 1
        return self._record(agent, goods, len(goods))

    def refute(self, allocation: Allocation) -> AdditiveValuation:
        if allocation.n != 2:
            raise ContractViolation("the refutation targets two-agent allocations")
        allocation.validate_partition(self.m)
        g1, g2 = (b.goods for b in allocation.bundles)
        if len(g1) > len(g2):
            g1, g2 = g2, g1
        if len(g1) < self.k:
            return AdditiveValuation([1] * self.m)

        cols = sorted(g2)
        at = {g: j for j, g in enumerate(cols)}
        tab = Tableau(len(cols))
        for rec in self.transcript:
            inside = rec.goods & g2
            row = [0] * len(cols)
            for g in inside:
                row[at[g]] = 1
            tab.insert(row, len(inside))
        tab.insert([1] * len(cols), len(cols))

        free = tab.free_columns()[0]  # rank <= k constraints on k+1 variables
        d = tab.null_direction(free)
        eps = min(Fraction(1, 10), Fraction(1, 2 * max(abs(c) for c in d)))
        weights: list[Value] = [1] * self.m
        for g, j in at.items():
            weights[g] = 1 - eps * d[j]
        if any(w < 0 for w in weights):
            raise AssertionError("nudge bound failed to keep the weights nonnegative")
        return AdditiveValuation(weights)


# ---------------------------------------------------------------------------
# EF1 computation, many agents with paired binary valuations


class PairsAdversary(AdversarySession):
    """Halving adversary for paired agents valuing two hidden goods.

    Agents 2i and 2i+1 share a binary valuation that is 1 on exactly two
    goods.  While a pair's candidate set holds more than two goods, a
    query keeps whichever side of the split is at least half and answers
    as if both hidden goods were there (2) or not there (0).  The hidden
    pair is only pinned down once the candidate set reaches size two, so
    any algorithm that commits while some candidate set still overlaps a
    single output bundle twice is refuted by placing the pair there.
    """

    kind = "pairs"

    def __init__(self, n: int, m: int):
        if n < 2:
            raise ContractViolation("this adversary needs at least two agents")
        if m < 2:
            raise ContractViolation("this adversary needs at least two goods")
        super().__init__(n, m)
        self.pairs = n // 2
        self.candidates: list[frozenset] = [frozenset(range(m)) for _ in range(self.pairs)]
        self.shrink_log: list[list[tuple[int, int]]] = [[] for _ in range(self.pairs)]

    def _pair_of(self, agent: int) -> int | None:
        i = agent // 2
        return i if i < self.pairs else None  # the odd agent out values nothing

    def answer(self, agent: int, goods: frozenset) -> Value:
        goods = self._check(agent, goods)
        i = self._pair_of(agent)
        if i is None:
            return self._record(agent, goods, 0)
        cand = self.candidates[i]
        if len(cand) <= 2:
            return self._record(agent, goods, len(cand & goods))
        inside = cand & goods
        if 2 * len(inside) >= len(cand):
            val, kept = 2, inside
        else:
            val, kept = 0, cand - goods
        if 2 * len(kept) < len(cand):
            raise AssertionError("halving rule shrank a candidate set below half")
        self.candidates[i] = kept
        self.shrink_log[i].append((len(cand), len(kept)))
        return self._record(agent, goods, val)

    def determined(self, pair: int) -> bool:
        return len(self.candidates[pair]) == 2

    def min_queries_implied(self) -> int:
        """Lower bound on the queries any driver must have spent: sizes
        at most halve per query, so shrinking m to f costs at least
        ceil(log2(m / f))."""
        total = 0
        for cand in self.candidates:
            need, size = 0, len(cand)
            while size < self.m:
                size *= 2
                need += 1
            total += need
        return total

    def _pick_pair(self, cand: frozenset, allocation: Allocation | None) -> list[int]:
        if allocation is not None:
            for bundle in allocation.bundles:
                inside = sorted(cand & bundle.goods)
                if len(inside) >= 2:
                    return inside[:2]
        return sorted(cand)[:2]

    def materialize(self, allocation: Allocation | None = None) -> list[BinaryValuation]:
        """Per-agent valuations, adversarial against the given allocation:
        each pair's two unit goods land inside a single bundle whenever
        the candidate set still allows it."""
        out: list[BinaryValuation] = []
        for i in range(self.pairs):
            ones = self._pick_pair(self.candidates[i], allocation)
            val = BinaryValuation(self.m, ones)
            out.extend((val, val))
        if len(out) < self.n:
            out.append(BinaryValuation(self.m, []))
        return out


# ---------------------------------------------------------------------------
# Factories named after what the adversary decides or refutes


def monotonic_ef_decision_adversary(m: int) -> MonotonicEfAdversary:
    return MonotonicEfAdversary(m)


def additive_ef_decision_adversary(m: int) -> AdditiveEfAdversary:
    return AdditiveEfAdversary(m)


def efx_additive_adversary(m: int) -> EfxAdversary:
    return EfxAdversary(m)


def pairs_ef1_adversary(n: int, m: int) -> PairsAdversary:
    return PairsAdversary(n, m)


def replay_consistency(adversary: AdversarySession,
                       query_log: Iterable,
                       materialized: Valuation | Sequence[Valuation]) -> bool:
    """True when the materialized valuation(s) reproduce every logged
    answer exactly.  Accepts one valuation for identical-agent sessions
    or a per-agent sequence."""
    if isinstance(materialized, Valuation):
        vals: Sequence[Valuation] = [materialized] * adversary.n
    else:
        vals = list(materialized)
        if len(vals) != adversary.n:
            raise ContractViolation("per-agent materialization count disagrees with n")
    for rec in query_log:
        agent, goods, value = rec
        if isinstance(goods, Bundle):
            goods = goods.goods
        if vals[agent].evaluate(frozenset(goods)) != value:
            return False
    return True
