"""EF1 in at most n*n queries when bigger sets are always weakly better.

Goods are chunked into n equal contiguous bundles plus r leftovers.  The
first n-r agents pick their favorite remaining bundle in agent order; the
last r agents each take a remaining bundle (lowest position first) plus one
distinct leftover good, so their one-good-larger bundles absorb the envy.
"""

from __future__ import annotations

from fairdiv.model import Allocation, Bundle, ContractViolation, LineArrangement
from fairdiv.machine import Memo


def steps(n: int, m: int, line: LineArrangement, seed: int, options: dict):
    q, r = divmod(m, n)
    chunks = [(j * q, (j + 1) * q) for j in range(n)]
    memo = Memo()

    remaining = list(range(n))
    assign: list[Bundle | None] = [None] * n
    for agent in range(n - r):
        if len(remaining) == 1:
            pick = remaining[0]
        else:
            best, best_val = None, None
            for j in remaining:
                v = yield from memo.ask(agent, Bundle.from_intervals(line, [chunks[j]]))
                if best is None or v > best_val:
                    best, best_val = j, v
            pick = best
        assign[agent] = Bundle.from_intervals(line, [chunks[pick]])
        remaining.remove(pick)

    for i, agent in enumerate(range(n - r, n)):
        j = remaining[i]
        extra = n * q + i  # leftover position
        assign[agent] = Bundle.from_intervals(line, [chunks[j], (extra, extra + 1)])

    if any(b is None for b in assign):
        raise ContractViolation("assignment incomplete")
    return Allocation(tuple(assign)), {"chunk_size": q, "leftovers": r}


def ceiling(n: int, m: int, **_opts) -> int:
    return n * n
