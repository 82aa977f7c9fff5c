"""EF1 for three agents with distinct additive values, logarithmic queries.

Agent 1's values drive a contiguous three-way split.  If agents 2 and 3
favor different blocks everyone is happy up to one good.  Otherwise the
shared favorite is trimmed: a prefix A' kept small in agent 2's eyes, a
remainder T whose goods migrate to A' until either agent 3 is content with
A' (then T is split three ways under agent 2's values and picked in order)
or at most three "large" goods remain to be placed one per bundle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from fairdiv.model import (
    Allocation,
    Bundle,
    ContractViolation,
    EMPTY_BUNDLE,
    LineArrangement,
    VirtualLine,
)
from fairdiv.machine import Memo, ceil_log2, leftmost_true
from fairdiv.protocols.identical3 import separate_goods, three_blocks

# Documented constant for the query ceiling C * ceil(log2 m); measured runs
# stay well under it (see the benchmark harness).
CEILING_CONSTANT = 40


# --- small toolkit over sorted disjoint half-open interval lists -----------
# These track virtual positions inside the trimmed block, so every set the
# protocol queries stays a union of a few line intervals.


def _count(ivs) -> int:
    return sum(hi - lo for lo, hi in ivs)


def _normalize(ivs):
    out = []
    for lo, hi in sorted(ivs):
        if lo >= hi:
            continue
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def _take(ivs, k):
    """Split off the first k positions: (head, tail)."""
    head, tail = [], []
    for lo, hi in ivs:
        span = hi - lo
        if k >= span:
            head.append((lo, hi))
            k -= span
        elif k > 0:
            head.append((lo, lo + k))
            tail.append((lo + k, hi))
            k = 0
        else:
            tail.append((lo, hi))
    return head, tail

def _at(ivs, idx) -> int:
    for lo, hi in ivs:
        span = hi - lo
        if idx < span:
            return lo + idx
        idx -= span
    raise ContractViolation("index out of interval range")


def _rank(ivs, pos) -> int:
    """How many listed positions precede pos (pos must be listed)."""
    seen = 0
    for lo, hi in ivs:
        if pos < lo:
            break
        if pos < hi:
            return seen + (pos - lo)
        seen += hi - lo
    raise ContractViolation("position not in interval list")


def _minus_points(ivs, points):
    out = list(ivs)
    for p in sorted(points, reverse=True):
        nxt = []
        for lo, hi in out:
            if lo <= p < hi:
                nxt.extend([(lo, p), (p + 1, hi)])
            else:
                nxt.append((lo, hi))
        out = [iv for iv in nxt if iv[0] < iv[1]]
    return out


def _bundle(view: VirtualLine, ivs) -> Bundle:
    pairs = []
    for lo, hi in ivs:
        pairs.extend(view.range_intervals(lo, hi))
    return Bundle.from_intervals(view.line, pairs)


def _subline(view: VirtualLine, ivs) -> VirtualLine:
    parts = [view.slice(lo, hi) for lo, hi in ivs]
    if not parts:
        return VirtualLine(view.line, ())
    return parts[0].concat(*parts[1:])


def _union_bundles(line: LineArrangement, *bundles: Bundle) -> Bundle:
    pairs = []
    for b in bundles:
        if len(b) == 0:
            continue
        parts = b.interval_parts()
        if parts is not None:
            pairs.extend(parts[1])
        else:
            pairs.extend((p, p + 1) for p in map(line.position_of, b.goods))
    return Bundle.from_intervals(line, pairs)


def _argmax_first(values) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


@dataclass
class LargeGoodLedger:
    """Trim-phase bookkeeping: the kept prefix, the floating set, the deficit.

    ``a_prime`` and ``t`` are interval lists of virtual positions on the
    trimmed block's view; ``large`` holds up to three virtual positions, in
    identification order, each of solo value at least the deficit recorded
    when it was identified.
    """

    a_prime: list = field(default_factory=list)
    t: list = field(default_factory=list)
    d: object = 0
    large: list = field(default_factory=list)


def steps(n: int, m: int, line: LineArrangement, seed: int, options: dict):
    if n != 3:
        raise ContractViolation("this protocol is defined for exactly three agents")
    if m == 0:
        return Allocation((EMPTY_BUNDLE,) * 3), {}
    memo = Memo()
    view = VirtualLine.whole(line)

    work, ra, rb, rc = yield from three_blocks(memo, 0, view)
    ranges = (ra, rb, rc)
    blocks = tuple(work.bundle_range(*r) for r in ranges)

    v2 = []
    v3 = []
    for b in blocks:
        x = yield from memo.ask(1, b)
        v2.append(x)
    for b in blocks:
        x = yield from memo.ask(2, b)
        v3.append(x)
    fav2 = _argmax_first(v2)
    fav3 = _argmax_first(v3)

    if fav2 != fav3:
        rest = next(i for i in range(3) if i not in (fav2, fav3))
        out = [None, None, None]
        out[1] = blocks[fav2]
        out[2] = blocks[fav3]
        out[0] = blocks[rest]
        return Allocation(tuple(out)), {"branch": "distinct-favorites"}

    # shared favorite: relabel blocks so A is the favorite and B is the one
    # agent 2 weakly prefers of the other two
    f = fav2
    rest_idx = sorted((i for i in range(3) if i != f), key=lambda i: (-v2[i], i))
    b_idx, c_idx = rest_idx
    bundle_b = blocks[b_idx]
    bundle_c = blocks[c_idx]
    u2b = v2[b_idx]
    u3b, u3c = v3[b_idx], v3[c_idx]
    a_view = work.slice(*ranges[f])
    size_a = len(a_view)

    def over_budget(p: int):
        x = yield from memo.ask(1, a_view.bundle_prefix(p + 1))
        return x > u2b

    h = yield from leftmost_true(0, size_a, over_budget)

    led = LargeGoodLedger()
    if h is None:
        led.a_prime = [(0, size_a)]
        led.t = []
        u2ap = v2[f]
    else:
        led.a_prime = [(0, h)] if h > 0 else []
        led.t = [(h, size_a)]
        led.large = [h]
        u2ap = yield from memo.ask(1, a_view.bundle_prefix(h))
    led.d = u2b - u2ap

    while True:
        u3ap = yield from memo.ask(2, _bundle(a_view, led.a_prime))
        if u3ap >= u3b and u3ap >= u3c:
            alloc = yield from _content_exit(
                memo, line, a_view, led, bundle_b, bundle_c
            )
            return alloc, {"branch": "third-agent-content"}
        floating = _minus_points(led.t, led.large)
        if not floating or len(led.large) == 3:
            break
        q = yield from memo.ask(1, _bundle(a_view, floating))
        if q < led.d:
            led.a_prime = _normalize(led.a_prime + floating)
            led.t = [(p, p + 1) for p in sorted(led.large)]
            led.d = led.d - q
            continue

        cnt = _count(floating)

        def reaches_deficit(idx: int):
            head, _ = _take(floating, idx + 1)
            x = yield from memo.ask(1, _bundle(a_view, head))
            return x >= led.d

        # the whole floating set reaches the deficit, so the last index is a
        # known hit and probing [0, cnt-1) suffices
        e = yield from leftmost_true(0, cnt - 1, reaches_deficit)
        if e is None:
            e = cnt - 1
        g_pos = _at(floating, e)
        moved, _ = _take(floating, e)
        mv = yield from memo.ask(1, _bundle(a_view, moved))
        led.a_prime = _normalize(led.a_prime + moved)
        led.t = _subtract(led.t, moved)
        led.d = led.d - mv
        led.large.append(g_pos)

    # place the large goods, one per final bundle
    alloc = yield from _large_goods_exit(
        memo, line, a_view, led, bundle_b, bundle_c, u3b, u3c
    )
    return alloc, {"branch": "large-goods", "larges": len(led.large)}


def _subtract(ivs, minus):
    """Interval-list difference (minus is a subset union of ivs)."""
    out = list(ivs)
    for mlo, mhi in minus:
        nxt = []
        for lo, hi in out:
            if mhi <= lo or hi <= mlo:
                nxt.append((lo, hi))
            else:
                if lo < mlo:
                    nxt.append((lo, mlo))
                if mhi < hi:
                    nxt.append((mhi, hi))
        out = nxt
    return out


def _content_exit(memo: Memo, line, a_view, led: LargeGoodLedger, bundle_b, bundle_c):
    """Agent 3 is happy with A': split T under agent 2, pick in order 3, 1, 2."""
    t_view = _subline(a_view, led.t)
    tw, t_ra, t_rb, t_rc = yield from three_blocks(memo, 1, t_view)
    parts = [tw.bundle_range(*r) for r in (t_ra, t_rb, t_rc)]

    vals3 = []
    for p in parts:
        x = yield from memo.ask(2, p)
        vals3.append(x)
    pick3 = _argmax_first(vals3)
    remaining = [i for i in range(3) if i != pick3]
    vals1 = []
    for i in remaining:
        x = yield from memo.ask(0, parts[i])
        vals1.append(x)
    pick1 = remaining[_argmax_first(vals1)]
    pick2 = next(i for i in range(3) if i not in (pick3, pick1))

    ap_bundle = _bundle(a_view, led.a_prime)
    return Allocation((
        _union_bundles(line, bundle_c, parts[pick1]),
        _union_bundles(line, bundle_b, parts[pick2]),
        _union_bundles(line, ap_bundle, parts[pick3]),
    ))


def _large_goods_exit(memo: Memo, line, a_view, led: LargeGoodLedger, bundle_b, bundle_c, u3b, u3c):
    """T holds at most three large goods (plus nothing else unless three)."""
    ap_bundle = _bundle(a_view, led.a_prime)
    s3_is_b = u3b >= u3c
    s3 = bundle_b if s3_is_b else bundle_c
    s1 = bundle_c if s3_is_b else bundle_b

    if len(led.large) == 3:
        t_view = _subline(a_view, led.t)
        ranks = tuple(_rank(led.t, p) for p in led.large)
        parts = yield from separate_goods(memo, 2, t_view, ranks)
        large_goods = [a_view.good_at(p) for p in led.large]
        part_large = []
        for part in parts:
            inside = [g for g in large_goods if g in part]
            if len(inside) != 1:
                raise ContractViolation("large goods were not separated")
            part_large.append(inside[0])
        vals2 = []
        for part, lg in zip(parts, part_large):
            x = yield from memo.ask(1, _minus_good(line, part, lg))
            vals2.append(x)
        pick2 = _argmax_first(vals2)
        remaining = [i for i in range(3) if i != pick2]
        vals1 = []
        for i in remaining:
            x = yield from memo.ask(0, parts[i])
            vals1.append(x)
        pick1 = remaining[_argmax_first(vals1)]
        pick3 = next(i for i in range(3) if i not in (pick2, pick1))
        return Allocation((
            _union_bundles(line, s1, parts[pick1]),
            _union_bundles(line, ap_bundle, parts[pick2]),
            _union_bundles(line, s3, parts[pick3]),
        ))

    extras = [EMPTY_BUNDLE, EMPTY_BUNDLE]
    for i, p in enumerate(led.large[:2]):
        extras[i] = _bundle(a_view, [(p, p + 1)])
    return Allocation((
        _union_bundles(line, s1, extras[1]),
        _union_bundles(line, ap_bundle, extras[0]),
        s3,
    ))


def _minus_good(line, bundle: Bundle, good: int) -> Bundle:
    pos = line.position_of(good)
    parts = bundle.interval_parts()
    if parts is None:
        return Bundle.from_goods(bundle.goods - {good})
    pairs = []
    for lo, hi in parts[1]:
        if lo <= pos < hi:
            pairs.extend([(lo, pos), (pos + 1, hi)])
        else:
            pairs.append((lo, hi))
    return Bundle.from_intervals(line, [p for p in pairs if p[0] < p[1]])


def ceiling(n: int, m: int, **_opts) -> int:
    return CEILING_CONSTANT * max(1, ceil_log2(m))
