"""Ground types: goods, lines, bundles, exact values, valuations, counted oracles.

All values are exact rationals.  A value is represented as a plain ``int``
whenever it is integral and as a ``fractions.Fraction`` otherwise; the two
mix freely and compare exactly, so callers never see floating point.
On the wire (JSON) a value is the string ``"p/q"`` or a bare integer.

Goods are the integers ``0..m-1``.  A :class:`LineArrangement` fixes a
left-to-right order of all goods.  A :class:`Bundle` is an immutable set of
goods with three interchangeable backings:

* explicit -- a frozenset of good indices,
* interval -- disjoint position intervals on one line, so a prefix of a
  million-good line costs O(1) memory instead of O(m),
* chain -- a previously built bundle plus one new good, which lets a run
  that grows bundles one good at a time keep its query log linear in the
  number of queries.

A :class:`ValuationOracle` is the only sanctioned way for a protocol to
learn values: every call to :meth:`ValuationOracle.query` increments the
counter and appends to the log, even for repeated bundles.
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

__all__ = [
    "Value",
    "as_value",
    "parse_rational",
    "format_rational",
    "ContractViolation",
    "IncompleteSpecification",
    "BudgetExceeded",
    "QueryBudgetExhausted",
    "MonotonicityViolation",
    "LineArrangement",
    "VirtualLine",
    "Bundle",
    "EMPTY_BUNDLE",
    "Allocation",
    "QueryRecord",
    "ValuationOracle",
    "Valuation",
    "AdditiveValuation",
    "BinaryValuation",
    "TableValuation",
    "SizeDominantValuation",
    "KValuedValuation",
    "Instance",
    "build_oracle",
    "query",
    "prefix_bundle",
    "suffix_bundle",
    "replay_log",
]


# ---------------------------------------------------------------------------
# Errors


class FairdivError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(FairdivError):
    """An input broke a documented precondition (bad good index, wrong class, ...)."""


class IncompleteSpecification(FairdivError):
    """A table valuation was asked about a subset it does not define."""


class BudgetExceeded(FairdivError):
    """A brute-force search would exceed its enumeration budget."""


class QueryBudgetExhausted(FairdivError):
    """An adversary's query budget is spent; the game is over."""


class MonotonicityViolation(FairdivError):
    """An answer or predicate contradicts an implied monotone order."""


# ---------------------------------------------------------------------------
# Exact values

Value = int | Fraction


def as_value(x: int | Fraction | str) -> Value:
    """Normalise to the canonical exact representation (int when integral)."""
    if isinstance(x, bool):
        raise ContractViolation("booleans are not values")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    if isinstance(x, str):
        return parse_rational(x)
    raise ContractViolation(f"not an exact rational: {x!r}")


def parse_rational(s: str | int) -> Value:
    """Parse the wire format: ``"p/q"``, a decimal integer string, or an int.

    >>> parse_rational("3/4")
    Fraction(3, 4)
    >>> parse_rational("6/3")
    2
    >>> parse_rational(5)
    5
    """
    if isinstance(s, bool):
        raise ContractViolation("booleans are not values")
    if isinstance(s, int):
        return s
    if not isinstance(s, str):
        raise ContractViolation(f"malformed rational {s!r}")
    text = s.strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return as_value(Fraction(int(num.strip()), int(den.strip())))
        return int(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ContractViolation(f"malformed rational {s!r}") from exc


def format_rational(v: Value) -> str:
    """Inverse of :func:`parse_rational`.

    >>> format_rational(Fraction(3, 4))
    '3/4'
    >>> format_rational(7)
    '7'
    """
    v = as_value(v)
    if isinstance(v, int):
        return str(v)
    return f"{v.numerator}/{v.denominator}"


# ---------------------------------------------------------------------------
# Lines


class LineArrangement:
    """A fixed left-to-right order of all m goods.

    ``order[p]`` is the good at position ``p``; ``position_of`` inverts it.
    """

    __slots__ = ("order", "_pos", "token")

    _tokens = itertools.count(1)

    def __init__(self, order: Sequence[int]):
        order = tuple(order)
        m = len(order)
        pos = [-1] * m
        for p, g in enumerate(order):
            if not (0 <= g < m) or pos[g] != -1:
                raise ContractViolation("line order must be a permutation of 0..m-1")
            pos[g] = p
        self.order = order
        self._pos = pos
        self.token = next(LineArrangement._tokens)

    @classmethod
    def identity(cls, m: int) -> "LineArrangement":
        return cls(range(m))

    @property
    def m(self) -> int:
        return len(self.order)

    def good_at(self, position: int) -> int:
        if not 0 <= position < len(self.order):
            raise ContractViolation(f"position {position} out of range")
        return self.order[position]

    def position_of(self, good: int) -> int:
        if not 0 <= good < len(self.order):
            raise ContractViolation(f"good {good} out of range")
        return self._pos[good]

    def __repr__(self) -> str:
        return f"LineArrangement({list(self.order)!r})"


# ---------------------------------------------------------------------------
# Interval algebra (positions on a line, half-open [lo, hi))

Intervals = tuple  # tuple[tuple[int, int], ...]


def normalize_intervals(pairs: Iterable[tuple[int, int]]) -> Intervals:
    """Sort, drop empties, and merge touching/overlapping intervals."""
    items = sorted((lo, hi) for lo, hi in pairs if hi > lo)
    out: list[tuple[int, int]] = []
    for lo, hi in items:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return tuple(out)


def intervals_len(ivals: Intervals) -> int:
    return sum(hi - lo for lo, hi in ivals)


def intervals_contain(ivals: Intervals, p: int) -> bool:
    lo, hi = 0, len(ivals)
    while lo < hi:
        mid = (lo + hi) // 2
        a, b = ivals[mid]
        if p < a:
            hi = mid
        elif p >= b:
            lo = mid + 1
        else:
            return True
    return False


# ---------------------------------------------------------------------------
# Bundles

_SET, _IV, _CHAIN = 0, 1, 2
_serials = itertools.count(1)


class Bundle:
    """An immutable set of goods.  Construct via the classmethods."""

    __slots__ = ("sid", "_kind", "_data", "_len", "_goods", "_max")

    def __init__(self, kind: int, data, length: int):
        self.sid = next(_serials)
        self._kind = kind
        self._data = data
        self._len = length
        self._goods: frozenset | None = data if kind == _SET else None
        self._max: int | None = None

    @classmethod
    def from_goods(cls, goods: Iterable[int]) -> "Bundle":
        fs = frozenset(goods)
        for g in fs:
            if not isinstance(g, int) or g < 0:
                raise ContractViolation(f"bad good index {g!r}")
        return cls(_SET, fs, len(fs))

    @classmethod
    def from_intervals(cls, line: LineArrangement, pairs: Iterable[tuple[int, int]]) -> "Bundle":
        ivals = normalize_intervals(pairs)
        if ivals and (ivals[0][0] < 0 or ivals[-1][1] > line.m):
            raise ContractViolation("interval out of the line's range")
        return cls(_IV, (line, ivals), intervals_len(ivals))

    def plus(self, good: int) -> "Bundle":
        """This bundle with one more good.  The good must not already be present."""
        return Bundle(_CHAIN, (self, good), self._len + 1)

    # -- inspection

    def __len__(self) -> int:
        return self._len

    def __bool__(self) -> bool:
        return self._len > 0

    def __contains__(self, good: int) -> bool:
        if self._kind == _IV:
            line, ivals = self._data
            return intervals_contain(ivals, line.position_of(good))
        return good in self.goods

    @property
    def goods(self) -> frozenset:
        """The explicit good set.  Materialised lazily; cheap except for chains."""
        if self._goods is None:
            if self._kind == _IV:
                line, ivals = self._data
                order = line.order
                self._goods = frozenset(
                    order[p] for lo, hi in ivals for p in range(lo, hi)
                )
            else:  # chain
                added = []
                node = self
                while node._kind == _CHAIN and node._goods is None:
                    added.append(node._data[1])
                    node = node._data[0]
                base = node.goods
                self._goods = base.union(added)
        return self._goods

    def sorted_goods(self) -> list[int]:
        return sorted(self.goods)

    def chain_parts(self) -> tuple["Bundle", int] | None:
        return self._data if self._kind == _CHAIN else None

    def interval_parts(self) -> tuple[LineArrangement, Intervals] | None:
        return self._data if self._kind == _IV else None

    def max_index(self) -> int:
        """Largest good index, -1 when empty.  Cached; chains walk iteratively."""
        if self._max is None:
            if self._len == 0:
                self._max = -1
            elif self._kind == _IV:
                line, ivals = self._data
                self._max = max(max(line.order[lo:hi]) for lo, hi in ivals)
            elif self._kind == _CHAIN:
                pending = []
                node = self
                while node._kind == _CHAIN and node._max is None:
                    pending.append(node)
                    node = node._data[0]
                best = node.max_index()
                while pending:
                    node = pending.pop()
                    best = max(best, node._data[1])
                    node._max = best
            else:
                self._max = max(self._goods)
        return self._max

    def key(self):
        """A hashable identity for memo tables; cheap, never materialises chains."""
        if self._kind == _IV:
            line, ivals = self._data
            return (line.token, ivals)
        if self._kind == _CHAIN:
            return ("c", self.sid)
        return self._goods

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Bundle):
            return NotImplemented
        if len(self) != len(other):
            return False
        if self._kind == _IV and other._kind == _IV:
            sl, si = self._data
            ol, oi = other._data
            if sl is ol:
                return si == oi
        return self.goods == other.goods

    def __hash__(self) -> int:
        return hash(self.goods)

    def __repr__(self) -> str:
        if self._len > 12:
            return f"Bundle(<{self._len} goods>)"
        return f"Bundle({self.sorted_goods()!r})"


EMPTY_BUNDLE = Bundle.from_goods(())


# ---------------------------------------------------------------------------
# Virtual lines: an ordered view assembled from directed segments of a base line.
# Protocols that rearrange goods (ends pinned, blocks mirrored, goods set aside)
# work on these, so their query bundles stay interval-backed on the base line.


class VirtualLine:
    """An ordered sequence of positions of a base line.

    ``segments`` is a tuple of ``(lo, hi, step)`` with half-open base position
    range [lo, hi) traversed left-to-right when step == 1 and right-to-left
    when step == -1.
    """

    __slots__ = ("line", "segments", "size")

    def __init__(self, line: LineArrangement, segments: Iterable[tuple[int, int, int]]):
        segs = tuple((lo, hi, st) for lo, hi, st in segments if hi > lo)
        self.line = line
        self.segments = segs
        self.size = sum(hi - lo for lo, hi, _ in segs)

    @classmethod
    def whole(cls, line: LineArrangement) -> "VirtualLine":
        return cls(line, ((0, line.m, 1),))

    @classmethod
    def from_positions(cls, line: LineArrangement, positions: Sequence[int]) -> "VirtualLine":
        """Compress an explicit position sequence into directed runs."""
        segs: list[tuple[int, int, int]] = []
        i, k = 0, len(positions)
        while i < k:
            j = i + 1
            while j < k and positions[j] == positions[j - 1] + 1:
                j += 1
            if j > i + 1:
                segs.append((positions[i], positions[j - 1] + 1, 1))
            else:
                while j < k and positions[j] == positions[j - 1] - 1:
                    j += 1
                if j > i + 1:
                    segs.append((positions[j - 1], positions[i] + 1, -1))
                else:
                    segs.append((positions[i], positions[i] + 1, 1))
            i = j
        return cls(line, segs)

    def base_position(self, vpos: int) -> int:
        if not 0 <= vpos < self.size:
            raise ContractViolation(f"virtual position {vpos} out of range")
        for lo, hi, st in self.segments:
            span = hi - lo
            if vpos < span:
                return lo + vpos if st == 1 else hi - 1 - vpos
            vpos -= span
        raise AssertionError("unreachable")

    def good_at(self, vpos: int) -> int:
        return self.line.good_at(self.base_position(vpos))

    def subview_positions(self, vpositions: Sequence[int]) -> "VirtualLine":
        """A view visiting the given virtual positions of this view, in order."""
        return VirtualLine.from_positions(self.line, [self.base_position(p) for p in vpositions])

    def range_intervals(self, a: int, b: int) -> list[tuple[int, int]]:
        """Base-line position intervals covering virtual positions [a, b)."""
        a = max(a, 0)
        b = min(b, self.size)
        out: list[tuple[int, int]] = []
        offset = 0
        for lo, hi, st in self.segments:
            span = hi - lo
            s = max(a - offset, 0)
            e = min(b - offset, span)
            if s < e:
                if st == 1:
                    out.append((lo + s, lo + e))
                else:
                    out.append((hi - e, hi - s))
            offset += span
            if offset >= b:
                break
        return out

    def bundle_range(self, a: int, b: int) -> Bundle:
        return Bundle.from_intervals(self.line, self.range_intervals(a, b))

    def bundle_prefix(self, k: int) -> Bundle:
        return self.bundle_range(0, k)

    def bundle_suffix(self, k: int) -> Bundle:
        """Goods at virtual positions k..size-1."""
        return self.bundle_range(k, self.size)

    def reversed(self) -> "VirtualLine":
        return VirtualLine(self.line, tuple((lo, hi, -st) for lo, hi, st in reversed(self.segments)))

    def slice(self, a: int, b: int) -> "VirtualLine":
        a = max(a, 0)
        b = min(b, self.size)
        segs: list[tuple[int, int, int]] = []
        offset = 0
        for lo, hi, st in self.segments:
            span = hi - lo
            s = max(a - offset, 0)
            e = min(b - offset, span)
            if s < e:
                if st == 1:
                    segs.append((lo + s, lo + e, 1))
                else:
                    segs.append((hi - e, hi - s, -1))
            offset += span
        return VirtualLine(self.line, segs)

    def concat(self, *others: "VirtualLine") -> "VirtualLine":
        segs = list(self.segments)
        for other in others:
            if other.line is not self.line:
                raise ContractViolation("cannot concatenate views over different lines")
            segs.extend(other.segments)
        return VirtualLine(self.line, segs)

    def __len__(self) -> int:
        return self.size


def prefix_bundle(line: LineArrangement, k: int) -> Bundle:
    """The first k goods of the line as a bundle (contiguous by construction)."""
    if not 0 <= k <= line.m:
        raise ContractViolation(f"prefix length {k} out of range")
    return Bundle.from_intervals(line, ((0, k),))


def suffix_bundle(line: LineArrangement, position: int) -> Bundle:
    """The goods strictly after the first ``position``: prefix's complement."""
    if not 0 <= position <= line.m:
        raise ContractViolation(f"suffix position {position} out of range")
    return Bundle.from_intervals(line, ((position, line.m),))


# ---------------------------------------------------------------------------
# Allocations


class Allocation:
    """An ordered partition of the goods into one bundle per agent."""

    __slots__ = ("bundles",)

    def __init__(self, bundles: Iterable[Bundle]):
        self.bundles = tuple(bundles)

    @property
    def n(self) -> int:
        return len(self.bundles)

    def validate_partition(self, m: int) -> None:
        """Raise unless the bundles partition 0..m-1 exactly."""
        total = 0
        seen: set[int] = set()
        for b in self.bundles:
            total += len(b)
            seen.update(b.goods)
        if total != m or len(seen) != m or (seen and (min(seen) < 0 or max(seen) >= m)):
            raise ContractViolation("bundles do not partition the goods")

    def as_index_lists(self) -> list[list[int]]:
        return [b.sorted_goods() for b in self.bundles]

    def bundle_sets(self) -> set[frozenset]:
        return {b.goods for b in self.bundles}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Allocation):
            return NotImplemented
        return len(self.bundles) == len(other.bundles) and all(
            a == b for a, b in zip(self.bundles, other.bundles)
        )

    def __repr__(self) -> str:
        return f"Allocation({self.as_index_lists()!r})"


# ---------------------------------------------------------------------------
# Valuations (ground truth, evaluated outside the counted channel)


class Valuation:
    """Abstract valuation over subsets of 0..m-1.  Subclasses are immutable."""

    kind = "abstract"
    monotonic = True
    additive = False

    def __init__(self, m: int):
        self.m = m

    def evaluate(self, goods: frozenset) -> Value:
        raise NotImplementedError

    def make_answerer(self, line_hint: LineArrangement | None = None) -> Callable[[Bundle], Value]:
        """An optimised bundle evaluator for oracle use."""
        return lambda bundle: self.evaluate(bundle.goods)

    def to_json(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.to_json() == other.to_json()

    def __hash__(self) -> int:
        return hash(json.dumps(self.to_json(), sort_keys=True))


def _check_weights(weights: Sequence[Value]) -> tuple[Value, ...]:
    out = []
    for w in weights:
        v = as_value(w)
        if v < 0:
            raise ContractViolation("weights must be nonnegative")
        out.append(v)
    return tuple(out)


class _AdditiveAnswerer:
    """Evaluates bundles against one weight vector.

    Keeps two caches: per-line prefix sums for interval bundles, and a
    per-bundle memo so a chain bundle is answered from its parent in O(1).
    """

    __slots__ = ("weights", "_prefix", "_memo")

    def __init__(self, weights: Sequence[Value]):
        self.weights = weights
        self._prefix: dict[int, list[Value]] = {}
        self._memo: dict[int, Value] = {EMPTY_BUNDLE.sid: 0}

    def _line_prefix(self, line: LineArrangement) -> list[Value]:
        sums = self._prefix.get(line.token)
        if sums is None:
            w = self.weights
            acc = 0
            sums = [0] * (line.m + 1)
            for p, g in enumerate(line.order):
                acc = acc + w[g]
                sums[p + 1] = acc
            self._prefix[line.token] = sums
        return sums

    def __call__(self, bundle: Bundle) -> Value:
        memo = self._memo
        got = memo.get(bundle.sid)
        if got is not None:
            return got
        parts = bundle.chain_parts()
        if parts is not None:
            stack = []
            node = bundle
            while parts is not None and node.sid not in memo:
                stack.append(parts[1])
                node = parts[0]
                parts = node.chain_parts()
            val = memo[node.sid] if node.sid in memo else self._flat(node)
            w = self.weights
            for good in reversed(stack):
                val = val + w[good]
            memo[bundle.sid] = val
            return val
        val = self._flat(bundle)
        memo[bundle.sid] = val
        return val

    def _flat(self, bundle: Bundle) -> Value:
        iv = bundle.interval_parts()
        if iv is not None:
            line, ivals = iv
            sums = self._line_prefix(line)
            total = 0
            for lo, hi in ivals:
                total = total + sums[hi] - sums[lo]
            return total
        w = self.weights
        total = 0
        for g in bundle.goods:
            total = total + w[g]
        return total


class AdditiveValuation(Valuation):
    """u(S) = sum of per-good weights over S."""

    kind = "additive"
    additive = True

    def __init__(self, weights: Sequence[Value]):
        weights = _check_weights(weights)
        super().__init__(len(weights))
        self.weights = weights

    def evaluate(self, goods: frozenset) -> Value:
        w = self.weights
        total = 0
        for g in goods:
            total = total + w[g]
        return total

    def make_answerer(self, line_hint: LineArrangement | None = None) -> Callable[[Bundle], Value]:
        return _AdditiveAnswerer(self.weights)

    def integral(self) -> bool:
        return all(isinstance(w, int) for w in self.weights)

    def to_json(self) -> dict:
        return {"type": "additive", "weights": [format_rational(w) for w in self.weights]}


class BinaryValuation(AdditiveValuation):
    """Additive with 0/1 weights; serialised by the positions of the ones."""

    kind = "binary"

    def __init__(self, m: int, ones: Iterable[int]):
        ones = frozenset(ones)
        for g in ones:
            if not 0 <= g < m:
                raise ContractViolation("one-position out of range")
        super().__init__([1 if g in ones else 0 for g in range(m)])
        self.ones = ones

    def to_json(self) -> dict:
        return {"type": "binary", "m": self.m, "ones": sorted(self.ones)}


class TableValuation(Valuation):
    """Explicit subset table.  Must contain the empty set at 0 and be monotone."""

    kind = "table"

    def __init__(self, m: int, entries: dict[frozenset, Value], validate: bool = True):
        super().__init__(m)
        self.entries = {frozenset(s): as_value(v) for s, v in entries.items()}
        if validate:
            self._validate()

    def _validate(self) -> None:
        empty = self.entries.get(frozenset())
        if empty is None or empty != 0:
            raise ContractViolation("table must map the empty set to 0")
        for s, v in self.entries.items():
            if v < 0:
                raise ContractViolation("table values must be nonnegative")
            for g in s:
                smaller = s - {g}
                if smaller in self.entries and self.entries[smaller] > v:
                    raise ContractViolation("table is not monotone")

    def evaluate(self, goods: frozenset) -> Value:
        try:
            return self.entries[goods]
        except KeyError:
            raise IncompleteSpecification(f"table has no entry for {sorted(goods)}") from None

    def to_json(self) -> dict:
        rows = sorted(
            ({"subset": sorted(s), "value": format_rational(v)} for s, v in self.entries.items()),
            key=lambda row: (len(row["subset"]), row["subset"]),
        )
        return {"type": "table", "m": self.m, "entries": rows}


class SizeDominantValuation(Valuation):
    """u(S) = base * |S| + tiebreak(S), with sum(tiebreak) <= base.

    The condition makes any larger bundle weakly better, so the valuation is
    additive with effective weights base + tiebreak[g].
    """

    kind = "size_dominant"
    additive = True

    def __init__(self, base: Value, tiebreak: Sequence[Value]):
        tiebreak = _check_weights(tiebreak)
        base = as_value(base)
        if base < 0:
            raise ContractViolation("base must be nonnegative")
        if sum(tiebreak) > base:
            raise ContractViolation("tiebreak weights must sum to at most the base")
        super().__init__(len(tiebreak))
        self.base = base
        self.tiebreak = tiebreak
        self.weights = tuple(as_value(base + t) for t in tiebreak)

    def evaluate(self, goods: frozenset) -> Value:
        total = self.base * len(goods)
        for g in goods:
            total = total + self.tiebreak[g]
        return total

    def make_answerer(self, line_hint: LineArrangement | None = None) -> Callable[[Bundle], Value]:
        return _AdditiveAnswerer(self.weights)

    def integral(self) -> bool:
        return isinstance(self.base, int) and all(isinstance(t, int) for t in self.tiebreak)

    def to_json(self) -> dict:
        return {
            "type": "size_dominant",
            "base": format_rational(self.base),
            "tiebreak": [format_rational(t) for t in self.tiebreak],
        }


class KValuedValuation(Valuation):
    """A monotone quantisation of an inner valuation to at most k output levels.

    The inner value range [0, inner(G)] is cut into k equal bands and the
    answer is the band index, so the result takes at most k distinct values
    (0 on the empty set) and stays monotone.
    """

    kind = "kvalued"

    def __init__(self, k: int, inner: Valuation):
        if k < 1:
            raise ContractViolation("k must be at least 1")
        super().__init__(inner.m)
        self.k = k
        self.inner = inner
        self._total = inner.evaluate(frozenset(range(inner.m)))

    def quantize(self, v: Value) -> int:
        if self._total == 0:
            return 0
        level = (v * self.k) // self._total
        return min(int(level), self.k - 1)

    def evaluate(self, goods: frozenset) -> Value:
        return self.quantize(self.inner.evaluate(goods))

    def make_answerer(self, line_hint: LineArrangement | None = None) -> Callable[[Bundle], Value]:
        inner_answer = self.inner.make_answerer(line_hint)
        return lambda bundle: self.quantize(inner_answer(bundle))

    def to_json(self) -> dict:
        return {"type": "kvalued", "k": self.k, "inner": self.inner.to_json()}


def valuation_from_json(obj: dict, m: int | None = None) -> Valuation:
    kind = obj.get("type")
    if kind == "additive":
        return AdditiveValuation([parse_rational(w) for w in obj["weights"]])
    if kind == "binary":
        mm = obj.get("m", m)
        return BinaryValuation(mm, obj["ones"])
    if kind == "table":
        mm = obj.get("m", m)
        entries = {}
        for row in obj["entries"]:
            if isinstance(row, dict):
                entries[frozenset(row["subset"])] = parse_rational(row["value"])
            else:
                s, v = row
                entries[frozenset(s)] = parse_rational(v)
        return TableValuation(mm, entries)
    if kind == "size_dominant":
        return SizeDominantValuation(parse_rational(obj["base"]), [parse_rational(t) for t in obj["tiebreak"]])
    if kind == "kvalued":
        return KValuedValuation(int(obj["k"]), valuation_from_json(obj["inner"], m))
    raise ContractViolation(f"unknown valuation type {kind!r}")


# ---------------------------------------------------------------------------
# Instances


class Instance:
    """m goods, n agents, one valuation per agent."""

    __slots__ = ("m", "n", "goods", "valuations")

    def __init__(self, valuations: Sequence[Valuation], goods: Sequence[str] | None = None):
        valuations = tuple(valuations)
        if not valuations:
            raise ContractViolation("an instance needs at least one agent")
        m = valuations[0].m
        for v in valuations:
            if v.m != m:
                raise ContractViolation("all valuations must cover the same goods")
        if goods is None:
            goods = tuple(f"g{i + 1}" for i in range(m))
        else:
            goods = tuple(goods)
            if len(goods) != m:
                raise ContractViolation("label count must equal m")
        self.m = m
        self.n = len(valuations)
        self.goods = goods
        self.valuations = valuations

    def identical(self) -> bool:
        return all(v == self.valuations[0] for v in self.valuations[1:])

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "goods": list(self.goods),
            "agents": [
                {"name": f"a{i + 1}", "valuation": v.to_json()}
                for i, v in enumerate(self.valuations)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Instance":
        m = obj.get("m")
        vals = [valuation_from_json(a["valuation"], m) for a in obj["agents"]]
        inst = cls(vals, obj.get("goods"))
        if m is not None and inst.m != m:
            raise ContractViolation("declared m does not match the valuations")
        if "n" in obj and obj["n"] != inst.n:
            raise ContractViolation("declared n does not match the agent list")
        return inst

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Instance":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def __repr__(self) -> str:
        kinds = ",".join(v.kind for v in self.valuations)
        return f"Instance(m={self.m}, n={self.n}, [{kinds}])"


# ---------------------------------------------------------------------------
# Counted oracles


class QueryRecord:
    __slots__ = ("agent", "bundle", "value")

    def __init__(self, agent: int, bundle: Bundle, value: Value):
        self.agent = agent
        self.bundle = bundle
        self.value = value

    def __iter__(self) -> Iterator:
        return iter((self.agent, self.bundle, self.value))

    def __repr__(self) -> str:
        return f"QueryRecord(a{self.agent + 1}, {self.bundle!r}, {self.value!r})"


class ValuationOracle:
    """The counted value-query channel for one agent.

    Every :meth:`query` call costs one unit and is logged, including repeats;
    callers that want to avoid paying twice must keep their own memo.
    """

    def __init__(
        self,
        agent: int,
        m: int,
        answerer: Callable[[Bundle], Value],
        *,
        monotonic: bool = True,
    ):
        self.agent = agent
        self.m = m
        self.monotonic = monotonic
        self._answerer = answerer
        self._count = 0
        self.log: list[QueryRecord] = []

    @property
    def query_count(self) -> int:
        return self._count

    def _validate(self, bundle: Bundle) -> None:
        iv = bundle.interval_parts()
        if iv is not None:
            if iv[0].m != self.m:
                raise ContractViolation("bundle's line does not match the oracle's goods")
            return
        if bundle.max_index() >= self.m:
            raise ContractViolation("bundle references an out-of-range good")

    def query(self, bundle: Bundle) -> Value:
        if not isinstance(bundle, Bundle):
            raise ContractViolation("queries take Bundle objects")
        self._validate(bundle)
        value = self._answerer(bundle)
        self._count += 1
        self.log.append(QueryRecord(self.agent, bundle, value))
        return value


def query(oracle: ValuationOracle, bundle: Bundle) -> Value:
    """Functional alias for :meth:`ValuationOracle.query`."""
    return oracle.query(bundle)


def build_oracle(instance: Instance, agent: int, line_hint: LineArrangement | None = None) -> ValuationOracle:
    """A fresh counted oracle answering from the instance's ground truth."""
    if not 0 <= agent < instance.n:
        raise ContractViolation(f"agent {agent} out of range")
    v = instance.valuations[agent]
    return ValuationOracle(agent, instance.m, v.make_answerer(line_hint), monotonic=v.monotonic)


def build_oracles(instance: Instance, line_hint: LineArrangement | None = None) -> list[ValuationOracle]:
    return [build_oracle(instance, i, line_hint) for i in range(instance.n)]


def replay_log(instance: Instance, log: Iterable[QueryRecord]) -> bool:
    """Re-answer every logged query from a fresh oracle; True iff all match exactly."""
    fresh: dict[int, ValuationOracle] = {}
    for rec in log:
        oracle = fresh.get(rec.agent)
        if oracle is None:
            oracle = build_oracle(instance, rec.agent)
            fresh[rec.agent] = oracle
        if oracle.query(rec.bundle) != rec.value:
            return False
    return True
