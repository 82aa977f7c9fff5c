"""Envy cycle elimination, plain and batched.

Goods arrive in line order.  Before each placement any envy cycles are
resolved by rotating bundles along the cycle (no queries), then the good
goes to an unenvied agent; among those, the one who values her own bundle
least, lowest index on ties.  Only the changed bundle is re-queried, one
query per agent, and a final rotation pass cleans up remaining cycles.

The batched variant serves valuations taking at most k distinct values:
instead of placing one good it binary-searches, per agent, the first
position whose inclusion changes that agent's view of the source's bundle,
and hands the source everything before the earliest change.  Same
tie-breaking, so it reproduces the plain variant's output.
"""

from __future__ import annotations

from fairdiv.model import Allocation, Bundle, ContractViolation, EMPTY_BUNDLE, LineArrangement
from fairdiv.audit import EnvyGraph
from fairdiv.machine import Memo, Query, ceil_log2, leftmost_true


def _resolve_cycles(values: list[list], bundles: list[Bundle]) -> None:
    """Rotate bundles along envy cycles until the graph is acyclic.  In a
    rotation each cycle member takes the bundle of the agent she envies;
    values move by column permutation, costing no queries."""
    while True:
        cycle = EnvyGraph(values).find_cycle()
        if cycle is None:
            return
        n = len(cycle)
        old_bundles = [bundles[j] for j in cycle]
        old_cols = [[values[i][j] for i in range(len(values))] for j in cycle]
        for t, agent in enumerate(cycle):
            src = (t + 1) % n
            bundles[agent] = old_bundles[src]
            for i in range(len(values)):
                values[i][agent] = old_cols[src][i]


def _pick_source(values: list[list]) -> int:
    sources = EnvyGraph(values).sources()
    if not sources:
        raise ContractViolation("acyclic envy graph must have an unenvied agent")
    return min(sources, key=lambda s: (values[s][s], s))


def steps(n: int, m: int, line: LineArrangement, seed: int, options: dict):
    bundles: list[Bundle] = [EMPTY_BUNDLE] * n
    values = [[0] * n for _ in range(n)]
    for pos in range(m):
        _resolve_cycles(values, bundles)
        s = _pick_source(values)
        grown = bundles[s].plus(line.good_at(pos))
        bundles[s] = grown
        for i in range(n):
            values[i][s] = yield Query(i, grown)
    _resolve_cycles(values, bundles)
    return Allocation(tuple(bundles)), {}


def ceiling(n: int, m: int, **_opts) -> int:
    return n * m + n


def batched_steps(n: int, m: int, line: LineArrangement, seed: int, options: dict):
    if m <= 1:
        # a single good is EF1 wherever it lands and the plain variant
        # provably hands it to agent 0, so no queries are needed
        bundles = [EMPTY_BUNDLE] * n
        if m == 1:
            bundles[0] = Bundle.from_intervals(line, [(0, 1)])
        return Allocation(tuple(bundles)), {"batches": m, "k": options.get("k")}
    bundles: list[Bundle] = [EMPTY_BUNDLE] * n
    ivals: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    values = [[0] * n for _ in range(n)]
    memo = Memo()
    batches = 0
    t = 0
    while t < m:
        _resolve_cycles_iv(values, bundles, ivals)
        s = _pick_source(values)

        def grown_bundle(p: int) -> Bundle:
            # source's bundle plus goods at positions t..p
            return Bundle.from_intervals(line, ivals[s] + [(t, p + 1)])

        first_change = m
        for i in range(n):
            if first_change == t:
                break
            base_val = values[i][s]

            def changes(p: int, i=i, base_val=base_val):
                v = yield from memo.ask(i, grown_bundle(p))
                return v > base_val

            hit = yield from leftmost_true(t, min(first_change + 1, m), changes)
            if hit is not None:
                first_change = min(first_change, hit)

        end = first_change if first_change < m else m - 1
        ivals[s] = ivals[s] + [(t, end + 1)]
        grown = Bundle.from_intervals(line, ivals[s])
        bundles[s] = grown
        t = end + 1
        batches += 1
        if first_change < m:
            for i in range(n):
                values[i][s] = yield from memo.ask(i, grown)
        # otherwise no agent's value moved: the matrix is already correct
    _resolve_cycles_iv(values, bundles, ivals)
    return Allocation(tuple(bundles)), {"batches": batches, "k": options.get("k")}


def _resolve_cycles_iv(values, bundles, ivals) -> None:
    while True:
        cycle = EnvyGraph(values).find_cycle()
        if cycle is None:
            return
        k = len(cycle)
        old_bundles = [bundles[j] for j in cycle]
        old_ivals = [ivals[j] for j in cycle]
        old_cols = [[values[i][j] for i in range(len(values))] for j in cycle]
        for t, agent in enumerate(cycle):
            src = (t + 1) % k
            bundles[agent] = old_bundles[src]
            ivals[agent] = old_ivals[src]
            for i in range(len(values)):
                values[i][agent] = old_cols[src][i]


def batched_ceiling(n: int, m: int, k: int = 2, **_opts) -> int:
    return 4 * n ** 3 * k * ceil_log2(m)
