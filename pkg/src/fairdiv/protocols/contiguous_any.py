"""Contiguous EF1 for any number of identical monotonic agents.

Values are integers in {0..K}.  The protocol binary-searches a level x such
that the line splits into n contiguous blocks G_i with w(G_i) <= x <= u(G_i),
where w is the block's value after dropping its cheaper endpoint.  Any such
partition is EF1: envy toward a block dies with one of its endpoint goods.

Feasibility of a level is tested by tracking, block by block, the interval
of line positions where that many valid blocks can end.  The interval is
exact: its low edge takes the shortest block from the lowest reachable
start, its high edge the longest block from the highest start whose suffix
still carries enough value, and consecutive windows cannot leave gaps.
Construction then walks the line placing each block end inside the window
where the block itself is valid and the remainder stays coverable,
certified by the same intervals computed from the right.
"""

from __future__ import annotations

from fractions import Fraction

from fairdiv.model import (
    Allocation,
    Bundle,
    ContractViolation,
    EMPTY_BUNDLE,
    LineArrangement,
    VirtualLine,
)
from fairdiv.machine import Memo, ceil_log2, leftmost_true, rightmost_true

# Documented constant for the ceiling C' * n * log2(m) * (n*log2(m) + log2(K)).
CEILING_CONSTANT = 6

_DOWN, _UP, _FOUND = -1, 1, 0


def _as_level(value, K: int) -> int:
    if isinstance(value, Fraction):
        if value.denominator != 1:
            raise ContractViolation("values must be integers in this protocol")
        value = value.numerator
    if not isinstance(value, int):
        raise ContractViolation("values must be integers in this protocol")
    if not 0 <= value <= K:
        raise ContractViolation(f"value {value} outside 0..{K}")
    return value


class _Line:
    """Query helpers for one orientation of the line."""

    def __init__(self, memo: Memo, view: VirtualLine, K: int):
        self.memo = memo
        self.view = view
        self.K = K
        self.size = len(view)

    def u(self, lo: int, hi: int):
        val = yield from self.memo.ask(0, self.view.bundle_range(lo, hi))
        return _as_level(val, self.K)

    def w(self, lo: int, hi: int):
        # value after dropping the cheaper endpoint; empty and singleton
        # blocks cost nothing and no queries
        if hi - lo <= 1:
            return 0
        a = yield from self.u(lo + 1, hi)
        b = yield from self.u(lo, hi - 1)
        return min(a, b)

    def longest_end(self, s: int, x: int):
        """Largest e in [s, size] with w(s, e) <= x (e = s always works)."""

        def fits(e: int):
            val = yield from self.w(s, e)
            return val <= x

        e = yield from rightmost_true(s + 1, self.size + 1, fits)
        return s if e is None else e

    def shortest_end(self, s: int, x: int):
        """Smallest e in [s, size] with u(s, e) >= x, or None."""

        def reaches(e: int):
            val = yield from self.u(s, e)
            return val >= x

        e = yield from leftmost_true(s, self.size + 1, reaches)
        return e


def _frontier(ln: _Line, n: int, x: int):
    """Reachable block-end windows: entry j is the (low, high) interval of
    positions where j valid blocks can end, or None once the remaining
    value cannot feed another block.

    The window is exact.  Any start s in the previous window with
    u(s, size) >= x admits the shortest block ending at its u-threshold,
    which automatically satisfies the w cap (one good fewer sits below the
    level).  The high edge comes from the largest such start, where the
    w-capped longest block reaches furthest.  Windows of consecutive
    starts overlap, so the union stays an interval.
    """
    spans: list = [(0, 0)]
    for _ in range(n):
        prev = spans[-1]
        if prev is None:
            spans.append(None)
            continue
        a, b = prev
        left = yield from ln.u(a, ln.size)
        if left < x:
            spans.append(None)
            continue
        na = yield from ln.shortest_end(a, x)
        if na is None:
            raise ContractViolation("suffix reaches the level but no block end does")

        def suffix_reaches(s: int):
            v = yield from ln.u(s, ln.size)
            return v >= x

        sstar = yield from rightmost_true(a + 1, b + 1, suffix_reaches)
        if sstar is None:
            sstar = a
        nb = yield from ln.longest_end(sstar, x)
        if nb < na:
            raise ContractViolation("block-end window collapsed; is the oracle honest?")
        spans.append((na, nb))
    return spans


def _decide(ln: _Line, n: int, x: int):
    spans = yield from _frontier(ln, n, x)
    if spans[n] is None:
        return _DOWN
    return _FOUND if spans[n][1] == ln.size else _UP


def steps(n: int, m: int, line: LineArrangement, seed: int, options: dict):
    if "K" not in options:
        raise ContractViolation("requires a 'K' option bounding the integer values")
    K = int(options["K"])
    if K < 0:
        raise ContractViolation("K must be nonnegative")
    if m == 0:
        return Allocation((EMPTY_BUNDLE,) * n), {"x": 0}
    memo = Memo()
    fwd = _Line(memo, VirtualLine.whole(line), K)

    lo, hi = 0, K
    x = None
    while lo <= hi:
        mid = (lo + hi) // 2
        verdict = yield from _decide(fwd, n, mid)
        if verdict == _FOUND:
            x = mid
            break
        if verdict == _UP:
            lo = mid + 1
        else:
            hi = mid - 1
    if x is None:
        raise ContractViolation("no feasible level found; is the oracle honest?")

    rev = _Line(memo, fwd.view.reversed(), K)
    rev_spans = yield from _frontier(rev, n, x)

    ends = [0]
    s = 0
    for j in range(1, n + 1):
        t = n - j  # blocks that must still fit after this one
        if rev_spans[t] is None:
            raise ContractViolation("remainder is not coverable at the found level")
        rev_a, rev_b = rev_spans[t]
        e_short = yield from fwd.shortest_end(s, x)
        e_long = yield from fwd.longest_end(s, x)
        if e_short is None:
            raise ContractViolation("level feasibility lied: block cannot reach x")
        lo_bound = max(e_short, m - rev_b)
        hi_bound = min(e_long, m - rev_a)
        if lo_bound > hi_bound:
            raise ContractViolation("empty placement window at the found level")
        e = lo_bound
        ends.append(e)
        s = e

    if ends[n] != m:
        raise ContractViolation("block placement did not cover the line")

    # belt and braces: re-verify every block's inequalities (mostly cached)
    for j in range(n):
        blo, bhi = ends[j], ends[j + 1]
        uv = yield from fwd.u(blo, bhi)
        wv = yield from fwd.w(blo, bhi)
        if not (wv <= x <= uv):
            raise ContractViolation("constructed block violates its level window")

    bundles = tuple(fwd.view.bundle_range(ends[j], ends[j + 1]) for j in range(n))
    return Allocation(bundles), {"x": x}


def ceiling(n: int, m: int, K: int = 1, **_opts) -> int:
    lm = max(1, ceil_log2(m))
    lk = max(1, ceil_log2(K + 1))
    return CEILING_CONSTANT * n * lm * (n * lm + lk)
