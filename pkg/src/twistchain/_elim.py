"""Sparse exact row echelon over Z[zeta_n] (pure-Python backend).

Rows are parallel lists (cols, vals): strictly increasing column indices and
integer coefficient vectors of length deg in the power basis.  Rank is
computed by fraction-free elimination with greedy minimum-degree pivoting:
always clear the column with the fewest live entries, using its shortest row
as the pivot.  Pivot order only controls fill-in, never the result.  Every
combined row is stripped to primitive content, so no rational arithmetic
ever happens in the inner loop.  The Cython twin in _elim_c.pyx implements
the identical algorithm step for step; both must make the same pivot choices
so results and intermediate states match exactly.
"""

from math import gcd

BACKEND = "python"


def vec_mul(a, b, red, deg):
    if deg == 1:
        return (a[0] * b[0],)
    prod = [0] * (2 * deg - 1)
    for i in range(deg):
        ai = a[i]
        if ai:
            for j in range(deg):
                bj = b[j]
                if bj:
                    prod[i + j] += ai * bj
    out = prod[:deg]
    for k in range(deg - 1):
        c = prod[deg + k]
        if c:
            row = red[k]
            for j in range(deg):
                rj = row[j]
                if rj:
                    out[j] += c * rj
    return tuple(out)


def _content(vals):
    g = 0
    for v in vals:
        for x in v:
            if x:
                g = gcd(g, x)
                if g == 1:
                    return 1
    return g


def _combine(rd, w, prow, pval, red, deg):
    """pval*rd - w*prow as a primitive column dict (pivot column removed)."""
    g0 = 0
    for x in w:
        g0 = gcd(g0, x)
    for x in pval:
        if g0 == 1:
            break
        g0 = gcd(g0, x)
    if g0 > 1:
        w = tuple(x // g0 for x in w)
        pval = tuple(x // g0 for x in pval)
    new = {}
    for d, v in rd.items():
        new[d] = vec_mul(pval, v, red, deg)
    for d, v in prow.items():
        wv = vec_mul(w, v, red, deg)
        cur = new.get(d)
        if cur is None:
            new[d] = tuple(-x for x in wv)
        else:
            s = tuple(x - y for x, y in zip(cur, wv))
            if any(s):
                new[d] = s
            else:
                del new[d]
    g = _content(new.values())
    if g > 1:
        for d in new:
            new[d] = tuple(x // g for x in new[d])
    return new


def _combine_q(rd, w, prow, pval):
    """Rational (deg 1) combine on plain ints: pval*rd - w*prow, primitive."""
    g0 = gcd(w, pval)
    if g0 > 1:
        w //= g0
        pval //= g0
    new = {}
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
            new[d] //= g
    return new


def echelon_rank(rows, deg, red):
    """Rank of the sparse integer-vector matrix given as [(cols, vals), ...].

    Deterministic: the pivot column is the live column with the fewest
    entries (ties: smallest index); the pivot row is its shortest member
    (ties: smallest original position).  deg 1 runs on plain ints.

    Column sizes live in a bucket queue (buckets[s] = columns with s live
    entries, a cursor at the smallest nonempty bucket): every size change
    is one set move, where a heap would accumulate a stale entry per
    update and spend most of its time popping them.
    """
    if deg == 1:
        row_map = [
            {c: v[0] for c, v in zip(cols, vals)} for cols, vals in rows
        ]
    else:
        row_map = [dict(zip(cols, vals)) for cols, vals in rows]
    col_rows = {}
    for i, rd in enumerate(row_map):
        for c in rd:
            col_rows.setdefault(c, set()).add(i)
    buckets = [set() for _ in range(len(row_map) + 1)]
    for c, rs in col_rows.items():
        buckets[len(rs)].add(c)
    cur = 1
    top = len(row_map)
    rank = 0
    while True:
        while cur <= top and not buckets[cur]:
            cur += 1
        if cur > top:
            break
        c = min(buckets[cur])
        buckets[cur].remove(c)
        rs = col_rows.pop(c)
        members = sorted(rs)
        r = members[0]
        best = (len(row_map[r]), r)
        for i in members[1:]:
            key = (len(row_map[i]), i)
            if key < best:
                best = key
                r = i
        prow = row_map[r]
        pval = prow.pop(c)
        rank += 1
        row_map[r] = None
        for d in prow:
            s = col_rows[d]
            n = len(s)
            s.remove(r)
            buckets[n].remove(d)
            if n == 1:
                del col_rows[d]
            else:
                buckets[n - 1].add(d)
                if n - 1 < cur:
                    cur = n - 1
        for i in members:
            if i == r:
                continue
            rd = row_map[i]
            w = rd.pop(c)
            if deg == 1:
                new = _combine_q(rd, w, prow, pval)
            else:
                new = _combine(rd, w, prow, pval, red, deg)
            row_map[i] = new
            for d in rd:
                if d not in new:
                    s = col_rows[d]
                    n = len(s)
                    s.remove(i)
                    buckets[n].remove(d)
                    if n == 1:
                        del col_rows[d]
                    else:
                        buckets[n - 1].add(d)
                        if n - 1 < cur:
                            cur = n - 1
            for d in new:
                if d not in rd:
                    s = col_rows.get(d)
                    if s is None:
                        col_rows[d] = {i}
                        buckets[1].add(d)
                        cur = 1
                    else:
                        n = len(s)
                        s.add(i)
                        buckets[n].remove(d)
                        buckets[n + 1].add(d)
    return rank
