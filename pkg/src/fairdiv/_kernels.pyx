# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled integer kernels; see _kernels_py.py for the reference semantics.

Inputs are Python lists of ints; each function copies them into C buffers
and works in int64.  Callers guarantee the magnitudes fit (weights are
nonnegative and n * m * max_weight stays far below 2^62).
"""

from libc.stdlib cimport free, malloc


cdef long long* _to_i64(object seq, Py_ssize_t size) except NULL:
    cdef long long* buf = <long long*> malloc(size * sizeof(long long))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(size):
        buf[i] = seq[i]
    return buf


def additive_fairness_flags(weights, owner, Py_ssize_t n, Py_ssize_t m):
    cdef long long* w = _to_i64(weights, n * m)
    cdef long long* values = <long long*> malloc(n * n * sizeof(long long))
    cdef long long* totals = <long long*> malloc(n * sizeof(long long))
    cdef long long* own_of = <long long*> malloc(m * sizeof(long long))
    if values == NULL or totals == NULL or own_of == NULL:
        free(w); free(values); free(totals); free(own_of)
        raise MemoryError()
    cdef Py_ssize_t i, j, g
    cdef long long wv, vij, own, wmin, wmax
    cdef bint ef = True, efx = True, ef1 = True, prop = True
    try:
        for g in range(m):
            own_of[g] = owner[g]
        for i in range(n):
            totals[i] = 0
            for j in range(n):
                values[i * n + j] = 0
        for g in range(m):
            j = <Py_ssize_t> own_of[g]
            for i in range(n):
                wv = w[i * m + g]
                totals[i] += wv
                values[i * n + j] += wv
        for i in range(n):
            if totals[i] > n * values[i * n + i]:
                prop = False
                break
        for i in range(n):
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
                    if own_of[g] == j:
                        wv = w[i * m + g]
                        if wv > wmax:
                            wmax = wv
                        if wmin < 0 or wv < wmin:
                            wmin = wv
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
    finally:
        free(w); free(values); free(totals); free(own_of)


def ef_exists_additive_2(w1, w2, Py_ssize_t m):
    cdef long long* a = _to_i64(w1, m)
    cdef long long* b = _to_i64(w2, m)
    cdef long long t1 = 0, t2 = 0, s1 = 0, s2 = 0
    cdef unsigned long long x, gray, prev = 0, diff
    cdef Py_ssize_t g
    cdef bint found = False
    try:
        for g in range(m):
            t1 += a[g]
            t2 += b[g]
        if 2 * s1 >= t1 and 2 * s2 <= t2:
            return True
        for x in range(1, <unsigned long long> 1 << m):
            gray = x ^ (x >> 1)
            diff = gray ^ prev
            g = 0
            while (diff >> (g + 1)) != 0:
                g += 1
            if gray & diff:
                s1 += a[g]
                s2 += b[g]
            else:
                s1 -= a[g]
                s2 -= b[g]
            prev = gray
            if 2 * s1 >= t1 and 2 * s2 <= t2:
                found = True
                break
        return found
    finally:
        free(a); free(b)


def ef_exists_additive_n(weights, Py_ssize_t n, Py_ssize_t m):
    cdef long long* w = _to_i64(weights, n * m)
    cdef long long* values = <long long*> malloc(n * n * sizeof(long long))
    cdef long long* owner = <long long*> malloc((m if m > 0 else 1) * sizeof(long long))
    if values == NULL or owner == NULL:
        free(w); free(values); free(owner)
        raise MemoryError()
    cdef Py_ssize_t i, j, g
    cdef bint ok
    try:
        if m == 0:
            return True
        for g in range(m):
            owner[g] = 0
        for i in range(n):
            for j in range(n):
                values[i * n + j] = 0
            for g in range(m):
                values[i * n] += w[i * m + g]
        while True:
            ok = True
            for i in range(n):
                for j in range(n):
                    if values[i * n + j] > values[i * n + i]:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return True
            g = 0
            while g < m:
                j = <Py_ssize_t> owner[g]
                for i in range(n):
                    values[i * n + j] -= w[i * m + g]
                if j + 1 < n:
                    owner[g] = j + 1
                    for i in range(n):
                        values[i * n + j + 1] += w[i * m + g]
                    break
                owner[g] = 0
                for i in range(n):
                    values[i * n] += w[i * m + g]
                g += 1
            if g == m:
                return False
    finally:
        free(w); free(values); free(owner)


def contiguous_ef1_additive(weights, Py_ssize_t n, Py_ssize_t m):
    cdef long long* prefix = <long long*> malloc(n * (m + 1) * sizeof(long long))
    cdef long long* w = _to_i64(weights, n * m)
    cdef long long* cuts = <long long*> malloc((n - 1 if n > 1 else 1) * sizeof(long long))
    cdef long long* bounds = <long long*> malloc((n + 1) * sizeof(long long))
    if prefix == NULL or cuts == NULL or bounds == NULL:
        free(prefix); free(w); free(cuts); free(bounds)
        raise MemoryError()
    cdef Py_ssize_t i, j, g, k
    cdef long long acc, own, vij, wmax, lo, hi
    cdef bint ok
    try:
        for i in range(n):
            acc = 0
            prefix[i * (m + 1)] = 0
            for g in range(m):
                acc += w[i * m + g]
                prefix[i * (m + 1) + g + 1] = acc
        for k in range(n - 1):
            cuts[k] = 0
        while True:
            bounds[0] = 0
            for k in range(n - 1):
                bounds[k + 1] = cuts[k]
            bounds[n] = m
            ok = True
            for i in range(n):
                own = prefix[i * (m + 1) + bounds[i + 1]] - prefix[i * (m + 1) + bounds[i]]
                for j in range(n):
                    if j == i:
                        continue
                    lo = bounds[j]
                    hi = bounds[j + 1]
                    vij = prefix[i * (m + 1) + hi] - prefix[i * (m + 1) + lo]
                    if vij <= own:
                        continue
                    wmax = 0
                    for g in range(lo, hi):
                        if w[i * m + g] > wmax:
                            wmax = w[i * m + g]
                    if vij - wmax > own:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return tuple(cuts[k] for k in range(n - 1))
            k = n - 2
            while k >= 0 and cuts[k] == m:
                k -= 1
            if k < 0:
                return None
            cuts[k] += 1
            for j in range(k + 1, n - 1):
                cuts[j] = cuts[k]
    finally:
        free(prefix); free(w); free(cuts); free(bounds)
