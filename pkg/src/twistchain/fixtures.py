"""Desk-scale fixtures shared by the tests and the command line tools.

Three families live here.  Group-action convolution algebras: the
symmetric group on a point, the Klein group twisted by its bicharacter,
the Klein group permuting two points, and a coboundary-twisted pair
cover of the symmetric group.  Curved matrix algebras: 2x2 matrices
over a truncated algebra of contractible pairs, flat or with a chosen
connection form, giving nilpotent curvature that is genuinely
noncentral in one fixture and central with a nonzero contraction in
another.  Graded-commutative models: the odd-sphere exterior algebra
and the circle with rotating or trivial torus action, the inputs of the
equivariant cohomology checks.
"""

import itertools

from .cartan import CDGAModel, TwistData, el_add
from .extensions import (
    TwistedConvolutionAlgebra,
    coboundary_of,
    klein_bicharacter_cocycle,
    pair_cover_algebra,
    trivial_cocycle,
    twisted_algebra,
)
from .groupoids import (
    GroupAction,
    action_groupoid,
    cyclic_group,
    klein_four,
    right_translation_action,
    symmetric_3,
    trivial_action,
)
from .hkr import CurvedDGA, GradedTarget, HKRFixture, TraceData
from .scalars import get_field, root_of_unity


def _one():
    return get_field(1).one


def _sc(c):
    return get_field(1).scalar(c)


# -- convolution algebra fixtures --------------------------------------------


def ground_field_algebra(group=None):
    """The one-dimensional algebra, optionally carrying a trivial group
    action so it can seed the equivariant complexes."""
    triv = cyclic_group(1)
    theta = trivial_cocycle(triv)
    if group is None:
        return TwistedConvolutionAlgebra(theta)
    basis_action = {(a, g): a for a in triv.arrows for g in group.arrows}
    return TwistedConvolutionAlgebra(theta, None, group=group,
                                     basis_action=basis_action)


def s3_point():
    """Untwisted S3 acting on a point: (algebra, action)."""
    s3 = symmetric_3()
    action = trivial_action(s3)
    theta = trivial_cocycle(action_groupoid(action))
    return twisted_algebra(theta, None, action), action


def k4_twisted_point():
    """Klein group on a point with the bicharacter twist: the smallest
    algebra whose twisted sectors differ from the untwisted ones."""
    action = trivial_action(klein_four())
    theta = klein_bicharacter_cocycle(action)
    return twisted_algebra(theta, None, action), action


def k4_two_points():
    """Klein group on two points, the first generator swapping them."""
    k4 = klein_four()
    pts = ("a", "b")
    swap = {"a": "b", "b": "a"}
    table = {}
    for x in pts:
        for g in k4.arrows:
            table[(x, g)] = swap[x] if g[0] == 1 else x
    action = GroupAction(k4, pts, table)
    assert not action.validate()
    theta = trivial_cocycle(action_groupoid(action))
    return twisted_algebra(theta, None, action), action


def s3_pair_cover():
    """Pair groupoid over S3 with a coboundary twist, right translation.

    The twist is exact, so every invariant must agree with the untwisted
    cover; the phases still exercise all cocycle plumbing.
    """
    s3 = symmetric_3()
    e = s3.unit[s3.objects[0]]
    c = {a: root_of_unity(4, i % 4) if a != e else _one()
         for i, a in enumerate(s3.arrows)}
    c[e] = _one()
    theta = coboundary_of(s3, c)
    algebra = pair_cover_algebra(s3, theta)
    return algebra, right_translation_action(s3)


# -- contractible pairs and curved matrix algebras ---------------------------


class ContractiblePairs:
    """Truncated tensor product of pairs (z_i, q_i) with d z_i = q_i.

    Degrees 0 and 1, relations z^2 = zq = q^2 = 0 per pair, so a state
    is 0 (absent), 1 (z) or 2 (q) in each slot and letters multiply only
    on disjoint support.  The contraction sends q_i to w_i z_i; then
    d iota + iota d multiplies a monomial by the sum of the weights of
    its occupied pairs, which is exactly the stored torus weight.
    """

    __slots__ = ("pair_weights", "states", "index", "degree", "weight", "unit")

    def __init__(self, pair_weights):
        self.pair_weights = tuple(pair_weights)
        n = len(self.pair_weights)
        self.states = tuple(itertools.product((0, 1, 2), repeat=n))
        self.index = {s: i for i, s in enumerate(self.states)}
        self.degree = {s: sum(1 for a in s if a == 2) for s in self.states}
        self.weight = {s: sum(w for a, w in zip(s, self.pair_weights) if a)
                       for s in self.states}
        self.unit = (0,) * n

    def mul(self, s, t):
        """(product state, Koszul sign), or None on overlapping support."""
        out = []
        for a, b in zip(s, t):
            if a and b:
                return None
            out.append(a + b)
        sign = 1
        for i, b in enumerate(t):
            if b != 2:
                continue
            # the odd letter of t at slot i crosses the odd letters of s
            # sitting at later slots
            for j in range(i + 1, len(s)):
                if s[j] == 2:
                    sign = -sign
        return tuple(out), sign

    def delta(self, s) -> dict:
        """z -> q, extended as an odd derivation: state -> {state: sign}."""
        out = {}
        sign = 1
        for i, a in enumerate(s):
            if a == 1:
                out[s[:i] + (2,) + s[i + 1:]] = sign
            elif a == 2:
                sign = -sign
        return out

    def iota(self, s) -> dict:
        """q -> w z, extended as an odd derivation."""
        out = {}
        sign = 1
        for i, a in enumerate(s):
            if a == 2:
                w = self.pair_weights[i]
                if w:
                    out[s[:i] + (1,) + s[i + 1:]] = sign * w
                sign = -sign
        return out


def matrix_curved_omega(nmat, pair_weights, conn=None, curv=None):
    """Matrix algebra over contractible pairs as a curved algebra.

    conn, when given, is an odd element {(p, q, state): int}; the
    derivation becomes d + [conn, .] and the curvature d(conn) + conn^2,
    which squares the derivation to the right commutator by construction.
    Without conn, curv may supply a central curvature element directly.
    Returns (omega, pairs, basis, index).
    """
    pairs = ContractiblePairs(pair_weights)
    one = _one()
    basis = [(p, q, s) for p in range(nmat) for q in range(nmat)
             for s in pairs.states]
    index = {b: i for i, b in enumerate(basis)}
    degrees = [pairs.degree[s] for (_, _, s) in basis]
    weights = [(pairs.weight[s],) for (_, _, s) in basis]
    mul = {}
    for i, (p1, q1, s) in enumerate(basis):
        for j, (p2, q2, t) in enumerate(basis):
            if q1 != p2:
                continue
            hit = pairs.mul(s, t)
            if hit is None:
                continue
            u, sign = hit
            mul[(i, j)] = {index[(p1, q2, u)]: one if sign == 1 else -one}
    delta_table = {}
    iota_table = {}
    for i, (p, q, s) in enumerate(basis):
        img = {index[(p, q, t)]: _sc(c) for t, c in pairs.delta(s).items()}
        if img:
            delta_table[i] = img
        img = {index[(p, q, t)]: _sc(c) for t, c in pairs.iota(s).items()}
        if img:
            iota_table[i] = img
    unit = {index[(p, p, pairs.unit)]: one for p in range(nmat)}
    base = CurvedDGA(degrees, mul, delta_table, unit, theta=None,
                     iota=[iota_table], weights=weights)
    a_el = {index[key]: _sc(c) for key, c in (conn or {}).items()}
    if a_el:
        assert base.el_degree(a_el) == 1
        nabla = {}
        for i in range(base.dim):
            img = el_add(dict(delta_table.get(i) or {}),
                         base.commutator(a_el, {i: one}, degrees[i]))
            if img:
                nabla[i] = img
        theta = el_add(base.apply(delta_table, a_el),
                       base.el_mul(a_el, a_el))
    else:
        nabla = delta_table
        theta = {index[key]: _sc(c) for key, c in (curv or {}).items()}
    omega = CurvedDGA(degrees, mul, nabla, unit, theta=theta,
                      iota=[iota_table], weights=weights)
    return omega, pairs, basis, index


def _scalar_matrix_part(basis, nmat, el) -> dict:
    """Split lambda * identity into lambda over the pair algebra."""
    if not el:
        return {}
    per = [dict() for _ in range(nmat)]
    for i, c in el.items():
        p, q, s = basis[i]
        assert p == q, "element is not diagonal"
        per[p][s] = c
    for d in per[1:]:
        assert d == per[0], "element is not a scalar matrix"
    return per[0]


def _left_mul_op(pairs, lam) -> dict:
    """Left multiplication by lam on the pair algebra, as a label table."""
    op = {}
    for t in pairs.states:
        img = {}
        for s, c in lam.items():
            hit = pairs.mul(s, t)
            if hit is None:
                continue
            u, sign = hit
            img = el_add(img, {u: c if sign == 1 else -c})
        if img:
            op[t] = img
    return op


class DegreeZeroAlgebra:
    """Degree-zero part of a monomial curved algebra, exposed with the
    convolution-algebra interface the cyclic operators expect."""

    __slots__ = ("omega", "basis", "index", "dim", "group", "_unit")

    def __init__(self, omega: CurvedDGA):
        self.omega = omega
        self.basis = tuple(i for i in range(omega.dim)
                           if omega.degrees[i] == 0)
        self.index = {b: i for i, b in enumerate(self.basis)}
        self.dim = len(self.basis)
        self.group = omega.group
        self._unit = {self.index[i]: c for i, c in omega.unit.items()}

    def mul_basis(self, i, j):
        prod = self.omega.mul.get((self.basis[i], self.basis[j]))
        if not prod:
            return None
        assert len(prod) == 1, "ambient algebra is not monomial"
        ((k, c),) = prod.items()
        return self.index[k], c

    def unit_vector(self) -> dict:
        return dict(self._unit)

    def act_idx(self, i, g):
        img = self.omega.act_tables[g].get(self.basis[i]) or {}
        assert len(img) == 1
        ((k, c),) = img.items()
        assert (c - _one()).is_zero(), "action is not a basis permutation"
        return self.index[k]


def matrix_fixture(name, nmat, pair_weights, conn=None, curv=None,
                   N=3, k_cap=3) -> HKRFixture:
    """Chain-map fixture over a curved matrix algebra; the trace is the
    matrix trace onto the pair algebra, plainly cyclic since the entries
    graded-commute."""
    omega, pairs, basis, index = matrix_curved_omega(
        nmat, pair_weights, conn=conn, curv=curv)
    labels = pairs.states
    degrees = [pairs.degree[s] for s in labels]
    weights = {s: (pairs.weight[s],) for s in labels}
    d_table = {}
    iota_t = {}
    for s in labels:
        img = {t: _sc(c) for t, c in pairs.delta(s).items()}
        if img:
            d_table[s] = img
        img = {t: _sc(c) for t, c in pairs.iota(s).items()}
        if img:
            iota_t[s] = img
    target = GradedTarget(labels, degrees, d_table, iota_tables=[iota_t],
                          weights=weights)
    table = [({s: _one()} if p == q else {}) for (p, q, s) in basis]
    big = omega.nabla_el(omega.theta)
    eta_omega_op = _left_mul_op(pairs, _scalar_matrix_part(basis, nmat, big))
    eta_x = omega.iota_el(0, omega.theta)
    eta_x_ops = [_left_mul_op(pairs, _scalar_matrix_part(basis, nmat, eta_x))]
    trace = TraceData(omega, target, table, g=None,
                      eta_omega_op=eta_omega_op, eta_x_ops=eta_x_ops)
    adapter = DegreeZeroAlgebra(omega)
    return HKRFixture(name, adapter, list(adapter.basis), trace,
                      N=N, k_cap=k_cap)


def curved_fixture_flat() -> HKRFixture:
    """2x2 matrices, no connection, zero curvature."""
    return matrix_fixture("matrix-flat", 2, (1, -1))


def curved_fixture_noncentral() -> HKRFixture:
    """Connection with nilpotent noncentral curvature.

    conn pairs the weight +1 and -1 generators in one corner and puts
    the weight-0 odd generator in the other; its square lands on the
    diagonal with opposite signs, so the curvature fails to commute with
    the off-diagonal matrix units while staying square-zero.  The
    contraction kills conn, keeping the derivation/contraction bracket
    equal to the stored weights.
    """
    conn = {
        (0, 1, (1, 2, 0)): 1,
        (0, 1, (2, 1, 0)): 1,
        (1, 0, (0, 0, 2)): 1,
    }
    return matrix_fixture("matrix-noncentral", 2, (1, -1, 0), conn=conn)


def curved_fixture_central_eta() -> HKRFixture:
    """Central curvature whose contraction is nonzero.

    curv = (q_0 q_1) * identity is closed, central, and square-zero; its
    contraction (w_0 z_0 q_1 + q_0 w_1 z_1) * identity is a nonzero odd
    central element, so the localized coboundary picks up a genuine
    multiplication term in the torus direction.
    """
    curv = {(0, 0, (2, 2)): 1, (1, 1, (2, 2)): 1}
    return matrix_fixture("matrix-central-eta", 2, (1, -1), curv=curv)


# -- graded-commutative models ------------------------------------------------


def odd_sphere_model() -> CDGAModel:
    """Exterior algebra on one degree-3 generator, zero differential."""
    return CDGAModel([("x", 3, 2)])


def odd_sphere_twist(k) -> TwistData:
    """k times the degree-3 generator as the twisting term."""
    return TwistData(eta_hat={((), (1,)): k})


def circle_rotation_model() -> CDGAModel:
    """Invariant forms on the circle with the rotation contraction: one
    odd degree-1 generator w, d w = 0, iota w = 1."""
    return CDGAModel([("w", 1, 2)], r=1,
                     iota_gen=[{"w": {(0,): _one()}}])


def circle_trivial_model() -> CDGAModel:
    """Same forms with the zero contraction: the trivial circle action."""
    return CDGAModel([("w", 1, 2)], r=1)


def two_torus_half_rotation_model() -> CDGAModel:
    """Forms on a 2-torus with the circle rotating the first factor only.

    The product w1 w2 is an even degree-2 element whose equivariant
    differential u w2 is nonzero, so it drives the conjugation check
    with a genuinely shifted twist.
    """
    return CDGAModel([("w1", 1, 2), ("w2", 1, 2)], r=1,
                     iota_gen=[{"w1": {(0, 0): _one()}}])
