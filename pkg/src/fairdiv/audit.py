"""Ground-truth fairness predicates and brute-force reference searches.

Everything here evaluates valuations directly (outside any counted query
channel) and compares exact rationals.  The additive integer fast path is
delegated to the kernel backend; every other class takes the generic route.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

from fairdiv._backend import kernels
from fairdiv.model import (
    AdditiveValuation,
    Allocation,
    BudgetExceeded,
    Bundle,
    ContractViolation,
    Instance,
    KValuedValuation,
    LineArrangement,
    Value,
    Valuation,
)

__all__ = [
    "fairness_report",
    "is_envy_free",
    "is_ef1",
    "is_efx",
    "is_proportional",
    "brute_force_ef_exists",
    "brute_force_contiguous_ef1",
    "EnvyGraph",
    "envy_graph",
    "envy_graph_from",
    "dp_feasible_block_ends",
]

DEFAULT_BUDGET = 20_000_000

_I64_CAP = 1 << 60


def _additive_weights(v: Valuation) -> tuple[Value, ...] | None:
    """Per-good weights when the valuation is additive in disguise or not."""
    if isinstance(v, AdditiveValuation):
        return v.weights
    weights = getattr(v, "weights", None)
    if v.additive and weights is not None:
        return weights
    return None


def _kernel_ready(instance: Instance) -> list[list[int]] | None:
    """Integer weight rows when every agent is additive with int weights."""
    rows = []
    for v in instance.valuations:
        w = _additive_weights(v)
        if w is None or not all(isinstance(x, int) for x in w):
            return None
        if sum(w) >= _I64_CAP // max(instance.n, 1):
            return None
        rows.append(list(w))
    return rows


def _pair_flags(own: Value, vij: Value, removal_min: Value, removal_max: Value):
    """(ef, efx, ef1) contributions of one ordered agent pair with envy."""
    ef = vij <= own
    if ef:
        return True, True, True
    return False, removal_max <= own, removal_min <= own


def fairness_report(instance: Instance, allocation: Allocation) -> dict[str, bool]:
    """Exact {"ef", "efx", "ef1", "proportional"} for one allocation."""
    if allocation.n != instance.n:
        raise ContractViolation("allocation size does not match the instance")
    allocation.validate_partition(instance.m)

    rows = _kernel_ready(instance)
    if rows is not None:
        owner = [0] * instance.m
        for j, b in enumerate(allocation.bundles):
            for g in b.goods:
                owner[g] = j
        flat = [w for row in rows for w in row]
        ef, efx, ef1, prop = kernels.additive_fairness_flags(flat, owner, instance.n, instance.m)
        return {"ef": bool(ef), "efx": bool(efx), "ef1": bool(ef1), "proportional": bool(prop)}

    bundles = [b.goods for b in allocation.bundles]
    ef = efx = ef1 = prop = True
    everything = frozenset(range(instance.m))
    for i, vi in enumerate(instance.valuations):
        own = vi.evaluate(bundles[i])
        total = vi.evaluate(everything)
        if instance.n * own < total:
            prop = False
        for j in range(instance.n):
            if j == i or not bundles[j]:
                continue
            vij = vi.evaluate(bundles[j])
            if vij <= own:
                continue
            ef = False
            rmin, rmax = _removal_extremes(vi, bundles[j], vij)
            if rmin > own:
                ef1 = False
            if rmax > own:
                efx = False
    return {"ef": ef, "efx": efx, "ef1": ef1, "proportional": prop}


def _removal_extremes(v: Valuation, goods: frozenset, full: Value) -> tuple[Value, Value]:
    """(min, max) over g in goods of v(goods - {g}).  goods is nonempty."""
    w = _additive_weights(v)
    if w is not None:
        ws = [w[g] for g in goods]
        return full - max(ws), full - min(ws)
    if isinstance(v, KValuedValuation):
        inner_w = _additive_weights(v.inner)
        if inner_w is not None:
            inner_full = sum(inner_w[g] for g in goods)
            ws = [inner_w[g] for g in goods]
            return v.quantize(inner_full - max(ws)), v.quantize(inner_full - min(ws))
    vals = [v.evaluate(goods - {g}) for g in goods]
    return min(vals), max(vals)


def is_envy_free(instance: Instance, allocation: Allocation) -> bool:
    return fairness_report(instance, allocation)["ef"]


def is_efx(instance: Instance, allocation: Allocation) -> bool:
    return fairness_report(instance, allocation)["efx"]


def is_ef1(instance: Instance, allocation: Allocation) -> bool:
    return fairness_report(instance, allocation)["ef1"]


def is_proportional(instance: Instance, allocation: Allocation) -> bool:
    return fairness_report(instance, allocation)["proportional"]


# ---------------------------------------------------------------------------
# Brute-force searches


def brute_force_ef_exists(instance: Instance, budget: int = DEFAULT_BUDGET) -> bool:
    """Does ANY envy-free allocation exist?  Exhaustive over n^m assignments."""
    n, m = instance.n, instance.m
    if n**m > budget:
        raise BudgetExceeded(f"{n}^{m} assignments exceed the budget {budget}")
    if m == 0:
        return True

    rows = _kernel_ready(instance)
    if rows is not None:
        flat = [w for row in rows for w in row]
        if n == 2:
            return bool(kernels.ef_exists_additive_2(rows[0], rows[1], m))
        return bool(kernels.ef_exists_additive_n(flat, n, m))

    weights = [_additive_weights(v) for v in instance.valuations]
    if n == 2 and all(w is not None for w in weights):
        return _ef_exists_2_additive_exact(weights[0], weights[1], m)
    return _ef_exists_generic(instance)


def _ef_exists_2_additive_exact(w1: Sequence[Value], w2: Sequence[Value], m: int) -> bool:
    t1, t2 = sum(w1), sum(w2)
    s1: Value = 0
    s2: Value = 0
    if 2 * s1 >= t1 and 2 * s2 <= t2:
        return True
    prev = 0
    for x in range(1, 1 << m):
        gray = x ^ (x >> 1)
        diff = gray ^ prev
        g = diff.bit_length() - 1
        if gray & diff:
            s1, s2 = s1 + w1[g], s2 + w2[g]
        else:
            s1, s2 = s1 - w1[g], s2 - w2[g]
        prev = gray
        if 2 * s1 >= t1 and 2 * s2 <= t2:
            return True
    return False


def _ef_exists_generic(instance: Instance) -> bool:
    n, m = instance.n, instance.m
    owner = [0] * m
    while True:
        bundles = [frozenset(g for g in range(m) if owner[g] == j) for j in range(n)]
        ok = True
        for i, vi in enumerate(instance.valuations):
            own = vi.evaluate(bundles[i])
            if any(vi.evaluate(bundles[j]) > own for j in range(n) if j != i):
                ok = False
                break
        if ok:
            return True
        g = 0
        while g < m and owner[g] == n - 1:
            owner[g] = 0
            g += 1
        if g == m:
            return False
        owner[g] += 1


def brute_force_contiguous_ef1(
    instance: Instance,
    line: LineArrangement | None = None,
    budget: int = DEFAULT_BUDGET,
) -> Allocation | None:
    """First contiguous EF1 allocation on the line, or None.

    Blocks may be empty (cuts range over 0..m with repetition), so the
    enumeration size is C(m+n-1, n-1).
    """
    n, m = instance.n, instance.m
    if line is None:
        line = LineArrangement.identity(m)
    if math.comb(m + n - 1, n - 1) > budget:
        raise BudgetExceeded("too many cut vectors for the budget")
    if n == 1:
        alloc = Allocation([Bundle.from_intervals(line, ((0, m),))])
        return alloc if is_ef1(instance, alloc) else None

    rows = _kernel_ready(instance)
    if rows is not None:
        reordered = [[row[g] for g in line.order] for row in rows]
        flat = [w for row in reordered for w in row]
        cuts = kernels.contiguous_ef1_additive(flat, n, m)
        if cuts is None:
            return None
        return _cuts_to_allocation(line, cuts, n, m)

    cuts = _contiguous_generic(instance, line)
    if cuts is None:
        return None
    return _cuts_to_allocation(line, cuts, n, m)


def _cuts_to_allocation(line: LineArrangement, cuts: Sequence[int], n: int, m: int) -> Allocation:
    bounds = [0, *cuts, m]
    return Allocation(
        Bundle.from_intervals(line, ((bounds[i], bounds[i + 1]),)) for i in range(n)
    )


def _contiguous_generic(instance: Instance, line: LineArrangement) -> tuple[int, ...] | None:
    n, m = instance.n, instance.m
    for cuts in combinations(range(m + n - 1), n - 1):
        cuts = tuple(c - k for k, c in enumerate(cuts))
        alloc = _cuts_to_allocation(line, cuts, n, m)
        if fairness_report(instance, alloc)["ef1"]:
            return cuts
    return None


# ---------------------------------------------------------------------------
# Envy graphs


class EnvyGraph:
    """Directed envy relation over agents: i -> j when i strictly envies j.

    Built from an exact value matrix ``values[i][j] = u_i(bundle_j)``.
    """

    def __init__(self, values: Sequence[Sequence[Value]]):
        self.n = len(values)
        self.values = values

    def envies(self, i: int, j: int) -> bool:
        return self.values[i][j] > self.values[i][i]

    def edges(self) -> list[tuple[int, int]]:
        return [
            (i, j)
            for i in range(self.n)
            for j in range(self.n)
            if i != j and self.envies(i, j)
        ]

    def sources(self) -> list[int]:
        """Agents nobody envies, in index order."""
        return [
            j
            for j in range(self.n)
            if all(not self.envies(i, j) for i in range(self.n) if i != j)
        ]

    def find_cycle(self) -> list[int] | None:
        """Some envy cycle, deterministically: DFS in agent-index order.

        Returns the cycle as a list where each member envies the next and
        the last envies the first, or None when the graph is acyclic.
        """
        color = [0] * self.n  # 0 fresh, 1 on stack, 2 done
        for start in range(self.n):
            if color[start] != 0:
                continue
            path = [start]
            at = {start: 0}
            color[start] = 1
            stack = [(start, iter(range(self.n)))]
            while stack:
                v, out = stack[-1]
                pushed = False
                for j in out:
                    if j == v or not self.envies(v, j):
                        continue
                    if color[j] == 1:
                        return path[at[j]:]
                    if color[j] == 0:
                        color[j] = 1
                        at[j] = len(path)
                        path.append(j)
                        stack.append((j, iter(range(self.n))))
                        pushed = True
                        break
                if not pushed:
                    stack.pop()
                    color[v] = 2
                    path.pop()
        return None


def envy_graph(values: Sequence[Sequence[Value]]) -> EnvyGraph:
    return EnvyGraph(values)


def envy_graph_from(instance: Instance, allocation: Allocation) -> EnvyGraph:
    bundles = [b.goods for b in allocation.bundles]
    values = [
        [vi.evaluate(bundles[j]) for j in range(instance.n)]
        for vi in instance.valuations
    ]
    return EnvyGraph(values)


# ---------------------------------------------------------------------------
# Contiguous-block feasibility oracle (reference DP for tests)


def dp_feasible_block_ends(
    block_value: Callable[[int, int], Value],
    m: int,
    n: int,
    x: Value,
) -> list[set[int]]:
    """ends[k] = positions where block k can end in a valid k-block prefix cover.

    A block over positions [lo, hi) is valid when w <= x <= u, where u is its
    value and w is the smaller of the two one-endpoint removals.  O(n * m^2)
    evaluations; test-scale only.
    """

    def valid(lo: int, hi: int) -> bool:
        if lo == hi:
            return x == 0
        u = block_value(lo, hi)
        if u < x:
            return False
        if hi - lo == 1:
            w: Value = 0
        else:
            w = min(block_value(lo + 1, hi), block_value(lo, hi - 1))
        return w <= x

    ends: list[set[int]] = [{0}]
    for _ in range(n):
        nxt: set[int] = set()
        for s in ends[-1]:
            for e in range(s, m + 1):
                if e not in nxt and valid(s, e):
                    nxt.add(e)
        ends.append(nxt)
    return ends
