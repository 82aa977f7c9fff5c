"""Contiguous EF1 for three agents with identical additive values.

Everything here works on a :class:`VirtualLine` so rearranged lines (mirror
images, goods pinned to the ends, subset lines) still issue interval-backed
query bundles.  The three-block routine returns position ranges on the view
it settled on, letting callers keep slicing the result.
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


def balanced_cut(memo: Memo, agent: int, view: VirtualLine):
    """Cut position splitting the view into halves of nearly equal value.

    Returns ``(cut, total)``; the left part is positions [0, cut).  Among
    cuts minimizing the half difference, prefers one leaving both sides
    nonempty, then the lowest position.  With two or more goods the chosen
    cut always leaves both sides nonempty.
    """
    size = len(view)
    if size == 0:
        return 0, 0
    total = yield from memo.ask(agent, view.bundle_range(0, size))

    def heavy_prefix(p: int):
        v = yield from memo.ask(agent, view.bundle_prefix(p + 1))
        return 2 * v >= total

    # the full prefix always satisfies the predicate, so probe [0, size-1)
    g = yield from leftmost_true(0, size - 1, heavy_prefix)
    if g is None:
        g = size - 1
    candidates = []
    for cut in (g, g + 1):
        left = yield from memo.ask(agent, view.bundle_prefix(cut))
        diff = abs(total - 2 * left)
        one_sided = 1 if (cut == 0 or cut == size) else 0
        candidates.append((diff, one_sided, cut))
    candidates.sort()
    return candidates[0][2], total


def three_blocks(memo: Memo, agent: int, view: VirtualLine):
    """Split the view into three contiguous blocks, each EF1 against the rest.

    Returns ``(work, (a0, a1), (b0, b1), (c0, c1))`` where ``work`` is the
    view the blocks are ranges on: either ``view`` itself or its mirror
    image when the left end carries less weight than the right.  Blocks read
    left to right on ``work``.
    """
    size = len(view)
    if size == 0:
        return view, (0, 0), (0, 0), (0, 0)
    total = yield from memo.ask(agent, view.bundle_range(0, size))
    if total == 0:
        return view, (0, 0), (0, size), (size, size)

    work = view
    for attempt in range(2):
        res = yield from _three_blocks_oriented(memo, agent, work, total)
        if res is not None:
            return (work,) + res
        if attempt == 1:
            raise ContractViolation("mirrored pass must satisfy the end-weight ordering")
        work = view.reversed()
    raise AssertionError("unreachable")


def _three_blocks_oriented(memo: Memo, agent: int, view: VirtualLine, total):
    """One orientation attempt; None when the right end outweighs the left."""
    size = len(view)

    def prefix_heavy(p: int):
        v = yield from memo.ask(agent, view.bundle_prefix(p + 1))
        return 3 * v > total

    def suffix_heavy(p: int):
        v = yield from memo.ask(agent, view.bundle_suffix(p))
        return 3 * v > total

    # first position whose closed prefix exceeds a third; the full prefix
    # qualifies, so probing [0, size-1) suffices
    g1 = yield from leftmost_true(0, size - 1, prefix_heavy)
    if g1 is None:
        g1 = size - 1
    # last position whose closed suffix exceeds a third; position 0 qualifies
    g2 = yield from rightmost_true(1, size, suffix_heavy)
    if g2 is None:
        g2 = 0

    left_open = yield from memo.ask(agent, view.bundle_prefix(g1))
    right_open = yield from memo.ask(agent, view.bundle_suffix(g2 + 1))
    if left_open < right_open:
        return None

    # A = shortest prefix worth at least the right remainder (empty if the
    # open left side is empty); never reaches g1 itself
    if g1 == 0:
        a_end = 0
    else:
        def covers_right(p: int):
            v = yield from memo.ask(agent, view.bundle_prefix(p + 1))
            return v >= right_open

        g3 = yield from leftmost_true(0, g1 - 1, covers_right)
        if g3 is None:
            g3 = g1 - 1
        a_end = g3 + 1

    b_wo_last = yield from memo.ask(agent, view.bundle_range(a_end, g2))
    if right_open >= b_wo_last:
        return (0, a_end), (a_end, g2 + 1), (g2 + 1, size)

    # middle too heavy: give the suffix block its boundary good and rebalance
    # everything left of it
    head = view.slice(0, g2)
    cut, _ = yield from balanced_cut(memo, agent, head)
    return (0, cut), (cut, g2), (g2, size)


def separate_goods(memo: Memo, agent: int, view: VirtualLine, picked: tuple[int, int, int]):
    """Three contiguous-after-rearrangement blocks, one per picked good.

    ``picked`` holds distinct positions on ``view``.  Each returned bundle
    is EF1 against the others under the agent's values and contains exactly
    one of the picked goods.  Needs at least three goods.
    """
    size = len(view)
    if size < 3 or len(set(picked)) != 3:
        raise ContractViolation("need three distinct goods on a line of three or more")
    total = yield from memo.ask(agent, view.bundle_range(0, size))

    singles = []
    for pos in picked:
        v = yield from memo.ask(agent, view.bundle_range(pos, pos + 1))
        singles.append((v, pos))
    # heaviest first; ties by position keep the run deterministic
    singles.sort(key=lambda t: (-t[0], t[1]))
    (v1, p1), (v2, p2), (v3, p3) = singles

    others = [q for q in range(size) if q not in (p1, p2, p3)]

    if 3 * v1 >= total:
        # the top pick alone is a third; rebalance the rest between the
        # other two picks pinned to opposite ends
        rest = view.subview_positions([p2] + others + [p3])
        cut, _ = yield from balanced_cut(memo, agent, rest)
        return (
            view.bundle_range(p1, p1 + 1),
            rest.bundle_prefix(cut),
            rest.bundle_suffix(cut),
        )

    # a non-picked good worth a third can only sit where the running prefix
    # or suffix first crosses a third, so two probes find it if it exists
    def prefix_heavy(p: int):
        v = yield from memo.ask(agent, view.bundle_prefix(p + 1))
        return 3 * v > total

    def suffix_heavy(p: int):
        v = yield from memo.ask(agent, view.bundle_suffix(p))
        return 3 * v > total

    gl = yield from leftmost_true(0, size - 1, prefix_heavy)
    if gl is None:
        gl = size - 1
    gr = yield from rightmost_true(1, size, suffix_heavy)
    if gr is None:
        gr = 0
    heavy = None
    for q in (gl, gr):
        if q in (p1, p2, p3):
            continue
        v = yield from memo.ask(agent, view.bundle_range(q, q + 1))
        if 3 * v >= total:
            heavy = q
            break
    if heavy is not None:
        rest = view.subview_positions([p1] + [q for q in others if q != heavy] + [p2])
        cut, _ = yield from balanced_cut(memo, agent, rest)
        return (
            _union(view, [(p3, p3 + 1), (heavy, heavy + 1)]),
            rest.bundle_prefix(cut),
            rest.bundle_suffix(cut),
        )

    # every single good is now below a third; line up the two heaviest picks
    # at the ends and find where the prefix crosses a third
    base_order = [p1] + others + [p2]
    base = view.subview_positions(base_order)

    def base_heavy(p: int):
        v = yield from memo.ask(agent, base.bundle_prefix(p + 1))
        return 3 * v > total

    # position 0 is p1 (below a third) and the prefix through all of
    # ``others`` is total - v2 - v3 > total/3, so a crossing exists inside
    last_other = len(others)
    cross = yield from leftmost_true(1, last_other, base_heavy)
    if cross is None:
        cross = last_other
    left_v = yield from memo.ask(agent, base.bundle_prefix(cross + 1))

    if 3 * (left_v + v3) <= 2 * total:
        # insert the light pick right after the crossing and run the
        # three-block split on the rearranged full line
        arranged = base.slice(0, cross + 1).concat(
            view.subview_positions([p3]),
            base.slice(cross + 1, len(base)),
        )
        work, ra, rb, rc = yield from three_blocks(memo, agent, arranged)
        return (
            work.bundle_range(*ra),
            work.bundle_range(*rb),
            work.bundle_range(*rc),
        )

    # otherwise the crossing good plus the light pick clear a third together
    g_pos = base_order[cross]
    rest = view.subview_positions([p1] + [q for q in others if q != g_pos] + [p2])
    cut, _ = yield from balanced_cut(memo, agent, rest)
    return (
        _union(view, [(p3, p3 + 1), (g_pos, g_pos + 1)]),
        rest.bundle_prefix(cut),
        rest.bundle_suffix(cut),
    )


def _union(view: VirtualLine, ranges) -> Bundle:
    pairs = []
    for lo, hi in ranges:
        pairs.extend(view.range_intervals(lo, hi))
    return Bundle.from_intervals(view.line, pairs)


def steps(n: int, m: int, line: LineArrangement, seed: int, options: dict):
    """Protocol entry: three agents, identical values, contiguous EF1."""
    if n != 3:
        raise ContractViolation("this protocol is defined for exactly three agents")
    if m == 0:
        return Allocation((EMPTY_BUNDLE, EMPTY_BUNDLE, EMPTY_BUNDLE)), {}
    memo = Memo()
    view = VirtualLine.whole(line)
    work, ra, rb, rc = yield from three_blocks(memo, 0, view)
    bundles = (
        work.bundle_range(*ra),
        work.bundle_range(*rb),
        work.bundle_range(*rc),
    )
    if work is not view:
        # mirror back so agent 0 holds the leftmost block of the real line
        bundles = tuple(reversed(bundles))
    return Allocation(bundles), {"mirrored": work is not view}


def separate_steps(n: int, m: int, line: LineArrangement, seed: int, options: dict):
    """Protocol entry: place three designated goods in three EF1 blocks."""
    if n != 3:
        raise ContractViolation("this protocol is defined for exactly three agents")
    picked = options.get("designated")
    if picked is None:
        raise ContractViolation("requires a 'designated' option of three good ids")
    picked = tuple(int(g) for g in picked)
    view = VirtualLine.whole(line)
    positions = tuple(line.position_of(g) for g in picked)
    memo = Memo()
    bundles = yield from separate_goods(memo, 0, view, positions)
    # hand agent i the block holding designated good i
    ordered = []
    for g in picked:
        hold = [b for b in bundles if g in b.goods]
        if len(hold) != 1:
            raise ContractViolation("designated goods were not separated")
        ordered.append(hold[0])
    if len({id(b) for b in ordered}) != 3:
        raise ContractViolation("designated goods were not separated")
    return Allocation(tuple(ordered)), {}


def ceiling(n: int, m: int, **_opts) -> int:
    return 6 * ceil_log2(m) + 16


def separate_ceiling(n: int, m: int, **_opts) -> int:
    return 10 * ceil_log2(m) + 30
