"""Equivariant cyclic complexes of twisted convolution algebras.

Chains in degree k are elements of Fun(G) x Atilde x A^(x k) spanned by
(g, (s0, s1, .., sk)) with s0 either an algebra basis index or the formal
unit slot (UNIT), and s1..sk algebra basis indices.  Degree 0 uses the
bare algebra in its single slot; the formal unit enters only from degree
1 up.  The group acts on chains on the right by

    (Phi . k)(g) = Phi(k g k^-1) . k      (diagonal action on the slots)

and the complex is the invariant part, realized concretely on the basis
of orbit sums.  The two differentials (writing a . g for the right action
standing in for g^-1 a):

    b(phi ox a0 ox .. ox ak)(g) =
        sum_{i<k} (-1)^i  a0 ox .. ox (a_i a_{i+1}) ox .. ox ak
        + (-1)^k (ak . g) a0 ox a1 ox .. ox a_{k-1}

    B(phi ox a0 ox .. ox ak)(g) =
        sum_{i=0..k} (-1)^{ki} 1 ox (a_{k-i+1} . g) ox .. ox (ak . g)
                                  ox a0 ox .. ox a_{k-i}

with b = 0 in degree 0 and B = 0 on chains whose first slot is the formal
unit.  b^2 = B^2 = bB + Bb = 0 hold as matrix identities on the invariant
basis (the degree-0 corner of bB + Bb needs exactly the invariance
condition, so the identities are stated there and not on bare chains).

Periodic homology truncates at tensor degree k_max and totalizes per
total degree (all CC_k with k <= n of one parity), dropping B only out
of the top column, where its image would leave the window.  That single
omission is what makes the truncated differentials square to zero
exactly; a flat two-periodic truncation always leaks at the corner.  A
stabilization flag compares the answer with the window two degrees down
instead of pretending the truncation is the full theory.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .extensions import TwistedConvolutionAlgebra
from .linalg import SparseMatrix, homology_dimension
from .scalars import Scalar, get_field

UNIT = -1


def _intern(scalar: Scalar, cache: dict) -> Scalar:
    key = (scalar.field.order, scalar.coeffs)
    hit = cache.get(key)
    if hit is None:
        cache[key] = scalar
        return scalar
    return hit


def _group_elements(algebra):
    if algebra.group is None:
        return (None,)
    return tuple(algebra.group.arrows)


def _act_slot(algebra, slot, k):
    if k is None or slot == UNIT:
        return slot
    return algebra.act_idx(slot, k)


def _conjugate(algebra, g, k):
    if k is None or g is None:
        return g
    grp = algebra.group
    return grp.compose(grp.compose(k, g), grp.inverse[k])


class CyclicChain:
    """One chain: degree k plus coefficients on (g, slots) basis keys."""

    __slots__ = ("k", "data")

    def __init__(self, k: int, data: dict):
        self.k = k
        clean = {}
        for (g, slots), v in data.items():
            if len(slots) != k + 1:
                raise ValueError("slot tuple %r has wrong arity for degree %d"
                                 % (slots, k))
            if k == 0 and slots[0] == UNIT:
                raise ValueError("degree 0 chains live in the bare algebra")
            if any(s == UNIT for s in slots[1:]):
                raise ValueError("formal unit is only allowed in the first slot")
            if not v.is_zero():
                clean[(g, slots)] = v
        self.data = clean

    def __eq__(self, other):
        return isinstance(other, CyclicChain) and self.k == other.k \
            and self.data == other.data

    def __repr__(self):
        return "CyclicChain(k=%d, %d terms)" % (self.k, len(self.data))


def chain_star(algebra, chain: CyclicChain, k) -> CyclicChain:
    """The right action of a group element on a chain."""
    out = {}
    for (g, slots), v in chain.data.items():
        g2 = _conjugate(algebra, g, algebra.group.inverse[k]) if g is not None else None
        key = (g2, tuple(_act_slot(algebra, s, k) for s in slots))
        out[key] = out.get(key, get_field(1).zero) + v
    return CyclicChain(chain.k, out)


def project_invariant(algebra, chain: CyclicChain) -> CyclicChain:
    """Average over the group; identity when no group is attached."""
    els = _group_elements(algebra)
    if els == (None,):
        return chain
    acc = {}
    for k in els:
        moved = chain_star(algebra, chain, k)
        for key, v in moved.data.items():
            acc[key] = acc.get(key, get_field(1).zero) + v
    w = Fraction(1, len(els))
    return CyclicChain(chain.k, {key: v * w for key, v in acc.items()})


def is_invariant(algebra, chain: CyclicChain) -> bool:
    for k in _group_elements(algebra):
        if k is None:
            continue
        if chain_star(algebra, chain, k) != chain:
            return False
    return True


def _b_terms(algebra, g, slots, drop=None):
    """Yield ((g, slots'), coeff) for b applied to one basis chain.

    drop, when set, is the basis index spanning the algebra unit: merge
    results equal to it in an interior slot are zero in the normalized
    complex and are skipped.  Position 0 keeps everything (the first slot
    is the full unitization either way).
    """
    k = len(slots) - 1
    if k == 0:
        return
    sign = 1
    for i in range(k):
        left, right = slots[i], slots[i + 1]
        if left == UNIT:
            merged, coeff = right, get_field(1).one
        else:
            hit = algebra.mul_basis(left, right)
            if hit is None:
                sign = -sign
                continue
            merged, coeff = hit
        if i > 0 and merged == drop:
            sign = -sign
            continue
        out = slots[:i] + (merged,) + slots[i + 2:]
        yield (g, out), coeff if sign == 1 else -coeff
        sign = -sign
    last = _act_slot(algebra, slots[k], g)
    first = slots[0]
    if first == UNIT:
        merged, coeff = last, get_field(1).one
    else:
        hit = algebra.mul_basis(last, first)
        if hit is None:
            return
        merged, coeff = hit
    out = (merged,) + slots[1:k]
    yield (g, out), coeff if k % 2 == 0 else -coeff


def _B_terms(algebra, g, slots, drop=None):
    """Yield ((g, slots'), coeff) for B applied to one basis chain.

    In the reduced complex (drop set) the inserted unit is the actual unit
    basis vector, carried with the unit's coefficient, and chains whose
    first slot is that vector are killed: their rotations all park the
    unit in an interior slot.  That early exit is also what makes B^2 = 0
    term-by-term there.
    """
    k = len(slots) - 1
    if slots[0] == UNIT:
        return
    if drop is None:
        head, coeff = UNIT, get_field(1).one
    else:
        if slots[0] == drop:
            return
        head, coeff = drop, algebra.unit_vector()[drop]
    for i in range(k + 1):
        tail = tuple(_act_slot(algebra, s, g) for s in slots[k - i + 1:])
        out = (head,) + tail + slots[:k - i + 1]
        yield (g, out), coeff if (k * i) % 2 == 0 else -coeff


def operator_b(algebra, chain: CyclicChain) -> CyclicChain:
    """Twisted Hochschild boundary; zero in degree 0."""
    if chain.k == 0:
        return CyclicChain(0, {})
    out = {}
    for (g, slots), v in chain.data.items():
        for key, c in _b_terms(algebra, g, slots):
            out[key] = out.get(key, get_field(1).zero) + v * c
    return CyclicChain(chain.k - 1, out)


def operator_B(algebra, chain: CyclicChain) -> CyclicChain:
    """Connes-style boundary into the formal-unit slot."""
    out = {}
    for (g, slots), v in chain.data.items():
        for key, c in _B_terms(algebra, g, slots):
            out[key] = out.get(key, get_field(1).zero) + v * c
    return CyclicChain(chain.k + 1, out)


def unit_basis_index(algebra):
    """The basis index spanning the algebra unit, or None when there is no
    such index.

    Returns the index only when multiplication by that basis vector is the
    same scalar on every basis element from both sides; the unit-reduced
    complex quotients by words carrying it in an interior slot, and the
    adjacent-merge cancellations behind that quotient need the uniform
    coefficient.  Multi-object groupoid algebras fail the single-vector
    test already (their unit spreads over one loop per object)."""
    u = algebra.unit_vector()
    if len(u) != 1:
        return None
    idx = next(iter(u))
    c = None
    for i in range(algebra.dim):
        left = algebra.mul_basis(idx, i)
        right = algebra.mul_basis(i, idx)
        if left is None or right is None or left[0] != i or right[0] != i:
            return None
        if c is None:
            c = left[1]
        if left[1] != c or right[1] != c:
            return None
    return idx


def _degree_basis(algebra, k, drop=None):
    """All (g, slots) keys in degree k, in deterministic order.

    In the reduced complex (drop set) the formal unit slot disappears: the
    first slot is the bare algebra and interior slots skip the unit index.
    """
    els = _group_elements(algebra)
    n = algebra.dim
    first = range(n) if (k == 0 or drop is not None) else [UNIT] + list(range(n))
    inner = [j for j in range(n) if j != drop]
    for g in els:
        for s0 in first:
            for rest in itertools.product(inner, repeat=k):
                yield (g, (s0,) + rest)


class EquivariantCyclicComplex:
    """Invariant cyclic complex on the orbit-sum basis, degrees <= k_max.

    orbits[k] is the list of orbit representatives in degree k; the b and
    B matrices are expressed on orbit sums.  Orbits are singletons when no
    group is attached.  With normalized=True the formal unit slot is gone
    (the first slot is the bare algebra) and interior slots run over A
    modulo its unit line, which needs the unit on a single basis vector
    with uniform products; the result is a quotient mixed complex with
    the same window homology in every degree, at a fraction of the size.
    """

    __slots__ = ("algebra", "k_max", "normalized", "drop",
                 "orbits", "orbit_index", "b_mats", "B_mats")

    def __init__(self, algebra, k_max: int, normalized: bool = False):
        self.algebra = algebra
        self.k_max = k_max
        self.normalized = bool(normalized)
        self.drop = None
        if normalized:
            self.drop = unit_basis_index(algebra)
            if self.drop is None:
                raise ValueError(
                    "normalized complex needs the unit on a single basis vector")
        self.orbits = {}
        self.orbit_index = {}
        els = _group_elements(algebra)
        trivial = els == (None,)
        for k in range(k_max + 1):
            reps = []
            rep_of = None
            if trivial:
                reps = list(_degree_basis(algebra, k, self.drop))
            else:
                rep_of = {}
                seen = set()
                for key in _degree_basis(algebra, k, self.drop):
                    if key in seen:
                        continue
                    orbit = set()
                    g, slots = key
                    for u in els:
                        moved = (_conjugate(algebra, g, algebra.group.inverse[u]),
                                 tuple(_act_slot(algebra, s, u) for s in slots))
                        orbit.add(moved)
                    rep = min(orbit)
                    for member in orbit:
                        rep_of[member] = rep
                    seen |= orbit
                    reps.append(rep)
                reps.sort()
            self.orbits[k] = reps
            self.orbit_index[k] = ({r: i for i, r in enumerate(reps)}, rep_of)
        cache = {}
        self.b_mats = {}
        self.B_mats = {}
        for k in range(1, k_max + 1):
            self.b_mats[k] = self._assemble(k, k - 1, _b_terms, cache)
        for k in range(0, k_max):
            self.B_mats[k] = self._assemble(k, k + 1, _B_terms, cache)

    def _members(self, key):
        els = _group_elements(self.algebra)
        if els == (None,):
            return (key,)
        g, slots = key
        out = set()
        for u in els:
            out.add((_conjugate(self.algebra, g, self.algebra.group.inverse[u]),
                     tuple(_act_slot(self.algebra, s, u) for s in slots)))
        return out

    def _assemble(self, k_src, k_dst, terms, cache):
        src_reps = self.orbits[k_src]
        dst_index, dst_rep_of = self.orbit_index[k_dst]
        entries = {}
        for j, rep in enumerate(src_reps):
            for member in self._members(rep):
                g, slots = member
                for (g2, out), c in terms(self.algebra, g, slots, self.drop):
                    target = (g2, out)
                    if dst_rep_of is not None and dst_rep_of[target] != target:
                        continue
                    i = dst_index[target]
                    cur = entries.get((i, j))
                    s = c if cur is None else cur + c
                    if s.is_zero():
                        entries.pop((i, j), None)
                    else:
                        entries[(i, j)] = _intern(s, cache)
        return SparseMatrix(len(self.orbits[k_dst]), len(src_reps), entries)

    def dims(self):
        return {k: len(self.orbits[k]) for k in range(self.k_max + 1)}

    def verify_identities(self) -> list[str]:
        """b^2 = B^2 = bB + Bb = 0 wherever both factors exist (k <= k_max - 1)."""
        errors = []
        for k in range(2, self.k_max + 1):
            if not (self.b_mats[k - 1] @ self.b_mats[k]).is_zero():
                errors.append("b^2 != 0 out of degree %d" % k)
        for k in range(0, self.k_max - 1):
            if not (self.B_mats[k + 1] @ self.B_mats[k]).is_zero():
                errors.append("B^2 != 0 out of degree %d" % k)
        for k in range(0, self.k_max):
            if k == 0:
                anti = self.b_mats[1] @ self.B_mats[0]
            else:
                anti = self.b_mats[k + 1] @ self.B_mats[k] + \
                    self.B_mats[k - 1] @ self.b_mats[k]
            if not anti.is_zero():
                errors.append("bB + Bb != 0 in degree %d" % k)
        return errors

    def total_matrix(self, n: int) -> SparseMatrix:
        """The differential b + B out of total degree n into total degree n - 1.

        Total degree n collects CC_k for k <= n, k = n mod 2.  B is kept
        except out of the top column k = n, whose image would leave the
        window; with that one omission every component of the square
        cancels, so consecutive total matrices compose to zero exactly.
        A flat two-periodic truncation has no such property: the corner
        term B b out of the top degree loses its partner b B, which is
        why homology is taken per total degree here.
        """
        if not (0 <= n <= self.k_max):
            raise ValueError("total degree outside the window")
        src_ks = list(range(n, -1, -2))
        dst_ks = list(range(n - 1, -1, -2))

        def offsets(ks):
            out, total = {}, 0
            for k in sorted(ks):
                out[k] = total
                total += len(self.orbits[k])
            return out, total

        soff, ssize = offsets(src_ks)
        doff, dsize = offsets(dst_ks)
        entries = {}
        for k in src_ks:
            if k >= 1:
                for (i, j), v in self.b_mats[k].entries.items():
                    entries[(doff[k - 1] + i, soff[k] + j)] = v
            if k <= n - 2:
                for (i, j), v in self.B_mats[k].entries.items():
                    key = (doff[k + 1] + i, soff[k] + j)
                    cur = entries.get(key)
                    s = v if cur is None else cur + v
                    if s.is_zero():
                        entries.pop(key, None)
                    else:
                        entries[key] = s
        return SparseMatrix(dsize, ssize, entries)

    def window_homology(self, n: int) -> int:
        """Homology dimension at total degree n (needs n + 1 <= k_max)."""
        if n + 1 > self.k_max:
            raise ValueError("image side of the window exceeds k_max")
        return homology_dimension(self.total_matrix(n + 1), self.total_matrix(n))


def periodic_dims(algebra, k_max: int, normalized=None):
    """(hp_even, hp_odd, stabilized) from the truncated cyclic complex.

    hp_even and hp_odd are the homology dimensions at the largest even
    and odd total degrees whose image side still fits in the window
    (k <= k_max).  stabilized reports whether the same dimensions already
    appear two total degrees down, i.e. whether the answer agrees between
    the k_max and k_max - 2 windows; a False flag means the truncation
    has not settled and the numbers must not be quoted as the periodic
    homology.

    normalized defaults to using the unit-reduced complex whenever the
    algebra unit sits on a single basis vector; pass False to force the
    full complex (same dimensions, larger matrices).
    """
    if k_max < 4:
        raise ValueError("k_max must be at least 4 for a stabilization check")
    if normalized is None:
        normalized = unit_basis_index(algebra) is not None
    cx = EquivariantCyclicComplex(algebra, k_max, normalized=normalized)
    errs = cx.verify_identities()
    if errs:
        raise ValueError("; ".join(errs))
    top = k_max - 1
    n_even = top if top % 2 == 0 else top - 1
    n_odd = top if top % 2 == 1 else top - 1
    now = (cx.window_homology(n_even), cx.window_homology(n_odd))
    prev = (cx.window_homology(n_even - 2), cx.window_homology(n_odd - 2))
    return now[0], now[1], now == prev


class CrossedProductAlgebra:
    """A x| G on the basis (algebra index, group element).

    (a x| g)(b x| h) = a (b . g^-1) x| gh, which is associative because
    the stored right action is by algebra automorphisms.  Products are
    group-like whenever the underlying algebra's are, so the same cyclic
    machinery applies with no equivariance (group None).
    """

    __slots__ = ("base", "basis", "index", "group", "_mul")

    def __init__(self, algebra):
        if algebra.group is None:
            raise ValueError("algebra carries no group action to cross with")
        self.base = algebra
        grp = algebra.group
        self.basis = tuple((i, g) for i in range(algebra.dim) for g in grp.arrows)
        self.index = {key: n for n, key in enumerate(self.basis)}
        self.group = None
        self._mul = {}
        for n1, (i, g) in enumerate(self.basis):
            ginv = grp.inverse[g]
            for n2, (j, h) in enumerate(self.basis):
                hit = algebra.mul_basis(i, algebra.act_idx(j, ginv))
                if hit is None:
                    continue
                kidx, coeff = hit
                self._mul[(n1, n2)] = (self.index[(kidx, grp.compose(g, h))], coeff)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def mul_basis(self, i: int, j: int):
        return self._mul.get((i, j))

    def unit_vector(self) -> dict:
        grp = self.base.group
        e = grp.unit[next(iter(grp.objects))]
        return {self.index[(i, e)]: c for i, c in self.base.unit_vector().items()}


def crossed_product(algebra) -> CrossedProductAlgebra:
    return CrossedProductAlgebra(algebra)


def crossed_product_comparison(algebra, k_max: int) -> dict:
    """Equivariant HP of the algebra next to plain HP of A x| G."""
    equi = periodic_dims(algebra, k_max)
    crossed = periodic_dims(crossed_product(algebra), k_max)
    return {
        "equivariant": equi,
        "crossed": crossed,
        "agree": equi[:2] == crossed[:2],
    }
