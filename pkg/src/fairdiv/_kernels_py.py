"""Pure-Python kernels: exact fairness flags and brute-force enumerations.

Same API as the compiled module `fairdiv._kernels`; `fairdiv._backend`
picks whichever is available.  All arithmetic is exact (Python ints).
"""

from __future__ import annotations


def additive_fairness_flags(weights, owner, n, m):
    """Fairness of an allocation under additive integer weights.

    weights: flat list of n*m ints, agent-major (weights[i*m + g]).
    owner: list of m ints, owner[g] = agent holding good g (must be 0..n-1).
    Returns (ef, efx, ef1, prop) booleans.
    """
    totals = [0] * n
    values = [0] * (n * n)  # values[i*n + j] = u_i(bundle_j)
    for g in range(m):
        j = owner[g]
        for i in range(n):
            w = weights[i * m + g]
            totals[i] += w
            values[i * n + j] += w
    ef = efx = ef1 = prop = True
    for i in range(n):
        if totals[i] > n * values[i * n + i]:
            prop = False
            break
    for i in range(n):
        base = i * m
        own = values[i * n + i]
        for j in range(n):
            if j == i:
                continue
            vij = values[i * n + j]
            if vij <= own:
                continue
            ef = False
            wmin = -1
            wmax = 0
            for g in range(m):
                if owner[g] == j:
                    w = weights[base + g]
                    if w > wmax:
                        wmax = w
                    if wmin < 0 or w < wmin:
                        wmin = w
            if wmin < 0:
                wmin = 0
            if vij - wmin > own:
                efx = False
            if vij - wmax > own:
                ef1 = False
                efx = False
        if not efx and not ef1:
            break
    return ef, efx, ef1, prop


def ef_exists_additive_2(w1, w2, m):
    """Does any envy-free split of 0..m-1 between two additive agents exist?

    Scans all 2^m bundles for agent 1 with Gray-code incremental sums.
    """
    t1 = sum(w1)
    t2 = sum(w2)
    s1 = 0
    s2 = 0
    if 2 * s1 >= t1 and 2 * s2 <= t2:
        return True
    prev = 0
    for x in range(1, 1 << m):
        gray = x ^ (x >> 1)
        diff = gray ^ prev
        g = diff.bit_length() - 1
        if gray & diff:
            s1 += w1[g]
            s2 += w2[g]
        else:
            s1 -= w1[g]
            s2 -= w2[g]
        prev = gray
        if 2 * s1 >= t1 and 2 * s2 <= t2:
            return True
    return False


def ef_exists_additive_n(weights, n, m):
    """Does any envy-free allocation exist?  Enumerates all n^m assignments.

    weights: flat n*m ints.  The caller enforces the enumeration budget.
    """
    if m == 0:
        return True
    owner = [0] * m
    values = [[0] * n for _ in range(n)]
    for i in range(n):
        row = values[i]
        base = i * m
        row[0] = sum(weights[base:base + m])

    def envy_free():
        for i in range(n):
            row = values[i]
            own = row[i]
            for j in range(n):
                if row[j] > own:
                    return False
        return True

    while True:
        if envy_free():
            return True
        g = 0
        while g < m:
            j = owner[g]
            for i in range(n):
                values[i][j] -= weights[i * m + g]
            if j + 1 < n:
                owner[g] = j + 1
                for i in range(n):
                    values[i][j + 1] += weights[i * m + g]
                break
            owner[g] = 0
            for i in range(n):
                values[i][0] += weights[i * m + g]
            g += 1
        if g == m:
            return False


def contiguous_ef1_additive(weights, n, m):
    """First contiguous EF1 allocation under additive integer weights.

    Enumerates cut vectors 0 <= c1 <= ... <= c_{n-1} <= m in lexicographic
    order (empty blocks allowed) and returns the first cut tuple whose
    blocks are EF1, or None.
    """
    prefix = [[0] * (m + 1) for _ in range(n)]
    for i in range(n):
        row = prefix[i]
        base = i * m
        acc = 0
        for g in range(m):
            acc += weights[base + g]
            row[g + 1] = acc

    def block_val(i, lo, hi):
        return prefix[i][hi] - prefix[i][lo]

    def ef1_ok(cuts):
        bounds = [0, *cuts, m]
        for i in range(n):
            own = block_val(i, bounds[i], bounds[i + 1])
            base = i * m
            for j in range(n):
                if j == i:
                    continue
                lo, hi = bounds[j], bounds[j + 1]
                vij = prefix[i][hi] - prefix[i][lo]
                if vij <= own:
                    continue
                wmax = 0
                for g in range(lo, hi):
                    w = weights[base + g]
                    if w > wmax:
                        wmax = w
                if vij - wmax > own:
                    return False
        return True

    cuts = [0] * (n - 1)
    while True:
        if ef1_ok(cuts):
            return tuple(cuts)
        k = n - 2
        while k >= 0 and cuts[k] == m:
            k -= 1
        if k < 0:
            return None
        cuts[k] += 1
        for j in range(k + 1, n - 1):
            cuts[j] = cuts[k]
