# cython: language_level=3, boundscheck=False, wraparound=False
"""Sparse exact row echelon over Z[zeta_n] (compiled backend).

Step-for-step twin of _elim.py: same representation, same minimum-degree
pivot choices and tie-breaks, same primitive-row normalization, so the two
backends are interchangeable and even their intermediate rows agree.
Coefficients are arbitrary-precision Python ints; the speedup comes from
typed index loops and dict plumbing, not from bounded machine arithmetic.
"""

from math import gcd

BACKEND = "cython"


cpdef tuple vec_mul(tuple a, tuple b, tuple red, Py_ssize_t deg):
    cdef Py_ssize_t i, j, k
    if deg == 1:
        return (a[0] * b[0],)
    cdef list prod = [0] * (2 * deg - 1)
    cdef object ai, bj, c, rj
    for i in range(deg):
        ai = a[i]
        if ai:
            for j in range(deg):
                bj = b[j]
                if bj:
                    prod[i + j] = prod[i + j] + ai * bj
    cdef list out = prod[:deg]
    cdef tuple row
    for k in range(deg - 1):
        c = prod[deg + k]
        if c:
            row = red[k]
            for j in range(deg):
                rj = row[j]
                if rj:
                    out[j] = out[j] + c * rj
    return tuple(out)


cdef dict _combine(dict rd, tuple w, dict prow, tuple pval, tuple red,
                   Py_ssize_t deg):
    """pval*rd - w*prow as a primitive column dict (pivot column removed)."""
    cdef object g0 = 0, g, x, d, v, cur
    cdef tuple wv, s
    for x in w:
        g0 = gcd(g0, x)
    for x in pval:
        if g0 == 1:
            break
        g0 = gcd(g0, x)
    if g0 > 1:
        w = tuple([x // g0 for x in w])
        pval = tuple([x // g0 for x in pval])
    cdef dict new = {}
    for d, v in rd.items():
        new[d] = vec_mul(pval, <tuple> v, red, deg)
    for d, v in prow.items():
        wv = vec_mul(w, <tuple> v, red, deg)
        cur = new.get(d)
        if cur is None:
            new[d] = tuple([-x for x in wv])
        else:
            s = tuple([x - y for x, y in zip(<tuple> cur, wv)])
            if any(s):
                new[d] = s
            else:
                del new[d]
    g = 0
    for v in new.values():
        for x in <tuple> v:
            if x:
                g = gcd(g, x)
                if g == 1:
                    return new
    if g > 1:
        for d in new:
            new[d] = tuple([x // g for x in <tuple> new[d]])
    return new


cdef dict _combine_q(dict rd, object w, dict prow, object pval):
    """Rational (deg 1) combine on plain ints: pval*rd - w*prow, primitive."""
    cdef object g0 = gcd(w, pval), g, x, d, v, cur
    if g0 > 1:
        w //= g0
        pval //= g0
    cdef dict new = {}
    for d, v in rd.items():
        new[d] = pval * v
    for d, v in prow.items():
        cur = new.get(d)
        x = -w * v if cur is None else cur - w * v
        if x:
            new[d] = x
        elif cur is not None:
            del new[d]
    g = 0
    for x in new.values():
        g = gcd(g, x)
        if g == 1:
            return new
    if g > 1:
        for d in new:
            new[d] = new[d] // g
    return new


def echelon_rank(list rows, Py_ssize_t deg, tuple red):
    """Rank of the sparse integer-vector matrix given as [(cols, vals), ...].

    Deterministic: the pivot column is the live column with the fewest
    entries (ties: smallest index); the pivot row is its shortest member
    (ties: smallest original position).  deg 1 runs on plain ints.

    Column sizes live in a bucket queue (buckets[s] = columns with s live
    entries, a cursor at the smallest nonempty bucket): every size change
    is one set move, where a heap would accumulate a stale entry per
    update and spend most of its time popping them.
    """
    cdef list row_map = []
    cdef list cols, vals
    cdef dict rd, new, prow, col_rows = {}
    cdef set rs, s
    cdef Py_ssize_t i, j, r, rank = 0, n, cur, top
    cdef object c, d, w, pval, key, best
    for cols, vals in rows:
        rd = {}
        if deg == 1:
            for j in range(len(cols)):
                rd[cols[j]] = (<tuple> vals[j])[0]
        else:
            for j in range(len(cols)):
                rd[cols[j]] = vals[j]
        row_map.append(rd)
    for i in range(len(row_map)):
        for c in <dict> row_map[i]:
            s = <set> col_rows.get(c)
            if s is None:
                col_rows[c] = s = set()
            s.add(i)
    top = len(row_map)
    cdef list buckets = [set() for _ in range(top + 1)]
    for c, rs in col_rows.items():
        (<set> buckets[len(rs)]).add(c)
    cur = 1
    cdef list members
    while True:
        while cur <= top and not <set> buckets[cur]:
            cur += 1
        if cur > top:
            break
        c = min(<set> buckets[cur])
        (<set> buckets[cur]).remove(c)
        rs = <set> col_rows.pop(c)
        members = sorted(rs)
        r = members[0]
        best = (len(<dict> row_map[r]), r)
        for j in range(1, len(members)):
            i = members[j]
            key = (len(<dict> row_map[i]), i)
            if key < best:
                best = key
                r = i
        prow = <dict> row_map[r]
        pval = prow.pop(c)
        rank += 1
        row_map[r] = None
        for d in prow:
            s = <set> col_rows[d]
            n = len(s)
            s.remove(r)
            (<set> buckets[n]).remove(d)
            if n == 1:
                del col_rows[d]
            else:
                (<set> buckets[n - 1]).add(d)
                if n - 1 < cur:
                    cur = n - 1
        for j in range(len(members)):
            i = members[j]
            if i == r:
                continue
            rd = <dict> row_map[i]
            w = rd.pop(c)
            if deg == 1:
                new = _combine_q(rd, w, prow, pval)
            else:
                new = _combine(rd, w, prow, pval, red, deg)
            row_map[i] = new
            for d in rd:
                if d not in new:
                    s = <set> col_rows[d]
                    n = len(s)
                    s.remove(i)
                    (<set> buckets[n]).remove(d)
                    if n == 1:
                        del col_rows[d]
                    else:
                        (<set> buckets[n - 1]).add(d)
                        if n - 1 < cur:
                            cur = n - 1
            for d in new:
                if d not in rd:
                    s = <set> col_rows.get(d)
                    if s is None:
                        col_rows[d] = {i}
                        (<set> buckets[1]).add(d)
                        cur = 1
                    else:
                        n = len(s)
                        s.add(i)
                        (<set> buckets[n]).remove(d)
                        (<set> buckets[n + 1]).add(d)
    return rank
