"""Two-agent EF1 with a logarithmic number of value queries.

Agent 1 locates, by binary search over cut positions, the rightmost point
where the left prefix is still worth no more than the rest, then hands agent
2 the choice between the two sides.  The non-chooser keeps the other side;
EF1 for the chooser is immediate and for the cutter it holds up to the one
good straddling the cut.
"""

from __future__ import annotations

from fairdiv.model import Allocation, ContractViolation, EMPTY_BUNDLE, LineArrangement, VirtualLine
from fairdiv.machine import Memo, rightmost_true


def steps(n: int, m: int, line: LineArrangement, seed: int, options: dict):
    if n != 2:
        raise ContractViolation("this protocol is defined for exactly two agents")
    if m == 0:
        return Allocation((EMPTY_BUNDLE, EMPTY_BUNDLE)), {}
    view = VirtualLine.whole(line)
    memo = Memo()

    def balanced_at(p: int):
        # left = goods strictly before p, right = goods from p on
        left = yield from memo.ask(0, view.bundle_prefix(p))
        right = yield from memo.ask(0, view.bundle_suffix(p))
        return left <= right

    # p = 0 satisfies the predicate for free (empty prefix), so only
    # positions 1..m-1 need probing.
    hit = yield from rightmost_true(1, m, balanced_at)
    p = hit if hit is not None else 0

    # The good at p goes to whichever side keeps the cutter's halves closer:
    # left takes it only while the left side is still the lighter one.
    left_v = yield from memo.ask(0, view.bundle_prefix(p))
    right_rest = yield from memo.ask(0, view.bundle_suffix(p + 1))
    cut = p + 1 if left_v <= right_rest else p

    left = view.bundle_prefix(cut)
    right = view.bundle_suffix(cut)
    chooser_left = yield from memo.ask(1, left)
    chooser_right = yield from memo.ask(1, right)
    if chooser_left >= chooser_right:
        bundles = (right, left)
    else:
        bundles = (left, right)
    return Allocation(bundles), {"cut": cut}


def ceiling(n: int, m: int, **_opts) -> int:
    from fairdiv.machine import ceil_log2

    return 2 * ceil_log2(m) + 4
