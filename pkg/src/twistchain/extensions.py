"""Central extensions of finite groupoids and twisted convolution algebras.

A discrete S1-central extension is recorded by its normalized 2-cocycle
theta with root-of-unity values: theta(g1, g2) theta(g1 g2, g3) =
theta(g1, g2 g3) theta(g2, g3) on composable triples, theta(unit, g) =
theta(g, unit) = 1.  The twisted convolution algebra has the arrows as
basis and

    e_a * e_b = w(a) theta(a, b) e_(a b)      when source(a) = target(b),

zero otherwise; w is a left-invariant Haar weight system (counting measure
by default), so the unit is sum_x w(unit_x)^-1 e_(unit_x).

When a group acts on the groupoid by automorphisms preserving theta and w,
the induced basis permutation is an algebra action; for an action groupoid
the canonical choice is (x, g).k = (x.k, k^-1 g k).
"""

from __future__ import annotations

import math
from fractions import Fraction

from .groupoids import (
    FiniteGroupoid,
    GroupAction,
    GroupoidCochain,
    action_groupoid,
    arrow_action,
    pair_groupoid,
    pullback_groupoid,
)
from .linalg import SparseMatrix
from .scalars import Scalar, get_field, root_of_unity


class HaarWeights:
    """Positive rational weights on arrows, constant under left translation."""

    __slots__ = ("groupoid", "weights")

    def __init__(self, groupoid: FiniteGroupoid, weights):
        self.groupoid = groupoid
        self.weights = {a: Fraction(w) for a, w in dict(weights).items()}

    @classmethod
    def counting(cls, groupoid: FiniteGroupoid) -> "HaarWeights":
        return cls(groupoid, {a: Fraction(1) for a in groupoid.arrows})

    def weight(self, arrow) -> Fraction:
        return self.weights[arrow]

    def validate(self) -> list[str]:
        errors = []
        G = self.groupoid
        for a in G.arrows:
            w = self.weights.get(a)
            if w is None or w <= 0:
                errors.append("weight of %r missing or not positive" % (a,))
        if errors:
            return errors
        # left invariance: w(gamma * h) = w(h) whenever composable, which is
        # equivalent to w depending on the source object only
        for (a, b), c in G._compose.items():
            if self.weights[c] != self.weights[b]:
                errors.append(
                    "left invariance fails: w(%r * %r) != w(%r)" % (a, b, b)
                )
        return errors


class ExtensionCocycle:
    """A normalized 2-cocycle on a finite groupoid with Z/n phase values."""

    __slots__ = ("groupoid", "theta", "order")

    def __init__(self, groupoid: FiniteGroupoid, theta, order: int):
        if order < 1:
            raise ValueError("phase order must be >= 1")
        self.groupoid = groupoid
        self.theta = dict(theta)
        self.order = order

    def value(self, a, b) -> Scalar:
        try:
            return self.theta[(a, b)]
        except KeyError:
            raise ValueError(
                "cocycle queried on non-composable pair (%r, %r)" % (a, b)
            ) from None

    def as_cochain(self) -> GroupoidCochain:
        return GroupoidCochain(self.groupoid, 2, self.theta, "multiplicative")

    def validate(self) -> list[str]:
        errors = []
        G = self.groupoid
        pairs = set()
        for pair in G.composable_tuples(2):
            pairs.add(pair)
            v = self.theta.get(pair)
            if v is None:
                errors.append("missing value on composable pair %r" % (pair,))
            elif not (v ** self.order == 1):
                errors.append("value on %r is not a root of unity of order %d" % (pair, self.order))
        for key in self.theta:
            if key not in pairs:
                errors.append("value on non-composable pair %r" % (key,))
        if errors:
            return errors
        for a in G.arrows:
            u_t, u_s = G.unit[G.target[a]], G.unit[G.source[a]]
            if not self.theta[(u_t, a)] == 1:
                errors.append("normalization fails on (unit, %r)" % (a,))
            if not self.theta[(a, u_s)] == 1:
                errors.append("normalization fails on (%r, unit)" % (a,))
        for (g1, g2, g3) in G.composable_tuples(3):
            lhs = self.theta[(g1, g2)] * self.theta[(G.compose(g1, g2), g3)]
            rhs = self.theta[(g1, G.compose(g2, g3))] * self.theta[(g2, g3)]
            if not lhs == rhs:
                errors.append("cocycle identity fails on (%r, %r, %r)" % (g1, g2, g3))
        return errors


def trivial_cocycle(groupoid: FiniteGroupoid) -> ExtensionCocycle:
    one = get_field(1).one
    theta = {pair: one for pair in groupoid.composable_tuples(2)}
    return ExtensionCocycle(groupoid, theta, 1)


def klein_bicharacter_cocycle(action: GroupAction) -> ExtensionCocycle:
    """theta((x,(a,b)), (y,(c,d))) = (-1)^(b c) on an action groupoid of K4."""
    G = action_groupoid(action)
    theta = {}
    for (p, q) in G.composable_tuples(2):
        b = p[1][1]
        c = q[1][0]
        theta[(p, q)] = root_of_unity(2, b * c)
    return ExtensionCocycle(G, theta, 2)


def is_invariant(theta: ExtensionCocycle, action: GroupAction) -> bool:
    """theta((a).k, (b).k) = theta(a, b) for the arrow action of every k."""
    G = theta.groupoid
    for k in action.elements():
        for (a, b) in G.composable_tuples(2):
            ak, bk = arrow_action(action, a, k), arrow_action(action, b, k)
            if not theta.value(ak, bk) == theta.value(a, b):
                return False
    return True


def validate_extension(theta: ExtensionCocycle, action: GroupAction | None = None) -> list[str]:
    """Full validation report; includes G-invariance when an action is given."""
    errors = theta.validate()
    if errors:
        return errors
    if action is not None and not is_invariant(theta, action):
        errors.append("cocycle is not invariant under the group action on arrows")
    return errors


def apply_coboundary(theta: ExtensionCocycle, c: dict) -> ExtensionCocycle:
    """theta'(a, b) = theta(a, b) c(a) c(b) c(ab)^-1 for unit-scalar c.

    c must take the value 1 on unit arrows so normalization survives.  The
    declared order of the result grows to absorb the orders of the phases
    in c.
    """
    G = theta.groupoid
    for x in G.objects:
        if not c[G.unit[x]] == 1:
            raise ValueError("coboundary cochain must be 1 on unit arrows")
    order = theta.order
    for a in G.arrows:
        if isinstance(c[a], Scalar):
            order = math.lcm(order, c[a].field.order)
    for a in G.arrows:
        if not (c[a] ** order == 1):
            raise ValueError("coboundary value on %r is not a root of unity" % (a,))
    new = {}
    for (a, b), v in theta.theta.items():
        new[(a, b)] = v * c[a] * c[b] * c[G.compose(a, b)].inverse()
    return ExtensionCocycle(G, new, order)


def coboundary_of(groupoid: FiniteGroupoid, c: dict) -> ExtensionCocycle:
    """The pure coboundary cocycle d(c) with trivial underlying theta."""
    return apply_coboundary(trivial_cocycle(groupoid), c)


def pullback_extension(theta: ExtensionCocycle, projection: dict, cover):
    """Pull the cocycle back along a finite cover of the objects.

    Returns (pullback cocycle, functor); theta''((x, g, y), (y, h, z)) =
    theta(g, h).
    """
    pb, functor = pullback_groupoid(theta.groupoid, projection, cover)
    new = {}
    for (a, b) in pb.composable_tuples(2):
        new[(a, b)] = theta.value(functor[a], functor[b])
    return ExtensionCocycle(pb, new, theta.order), functor


class TwistedConvolutionAlgebra:
    """Finite-dimensional algebra with arrow basis and group-like products.

    Every product of basis vectors is a phase times a single basis vector
    (or zero), so structure constants are stored as one (index, Scalar) pair
    per composable basis pair.  An optional right group action permutes the
    basis by groupoid automorphisms.
    """

    __slots__ = ("groupoid", "theta", "weights", "group", "basis", "index",
                 "_mul", "_act")

    def __init__(self, theta: ExtensionCocycle, weights: HaarWeights | None = None,
                 group: FiniteGroupoid | None = None, basis_action: dict | None = None):
        G = theta.groupoid
        self.groupoid = G
        self.theta = theta
        self.weights = weights or HaarWeights.counting(G)
        self.group = group
        self.basis = tuple(G.arrows)
        self.index = {a: i for i, a in enumerate(self.basis)}
        self._mul = {}
        for (a, b), ab in G._compose.items():
            coeff = theta.value(a, b) * Fraction(self.weights.weight(a))
            self._mul[(self.index[a], self.index[b])] = (self.index[ab], coeff)
        self._act = None
        if basis_action is not None:
            self._act = {
                (self.index[a], g): self.index[b]
                for (a, g), b in basis_action.items()
            }

    @property
    def dim(self) -> int:
        return len(self.basis)

    def mul_basis(self, i: int, j: int):
        """(index, Scalar) for e_i e_j, or None when not composable."""
        return self._mul.get((i, j))

    def multiply(self, u: dict, v: dict) -> dict:
        out = {}
        for i, x in u.items():
            for j, y in v.items():
                hit = self._mul.get((i, j))
                if hit is None:
                    continue
                k, c = hit
                w = x * y * c
                cur = out.get(k)
                out[k] = w if cur is None else cur + w
        return {k: v for k, v in out.items() if not v.is_zero()}

    def unit_vector(self) -> dict:
        out = {}
        for x in self.groupoid.objects:
            u = self.groupoid.unit[x]
            out[self.index[u]] = get_field(1).scalar(
                Fraction(1) / self.weights.weight(u)
            )
        return out

    def act_idx(self, i: int, g) -> int:
        """Basis index of e_i . g under the stored right action."""
        if self._act is None:
            raise ValueError("algebra carries no group action")
        return self._act[(i, g)]

    def act_vector(self, v: dict, g) -> dict:
        return {self.act_idx(i, g): c for i, c in v.items()}

    def validate_action(self) -> list[str]:
        """The stored action must permute the basis by algebra automorphisms."""
        errors = []
        if self._act is None or self.group is None:
            return ["no action attached"]
        els = self.group.arrows
        e = self.group.unit[self.group.objects[0]]
        n = self.dim
        for i in range(n):
            if self._act[(i, e)] != i:
                errors.append("identity does not fix basis %d" % i)
        for g in els:
            perm = [self._act[(i, g)] for i in range(n)]
            if sorted(perm) != list(range(n)):
                errors.append("action of %r is not a permutation" % (g,))
                continue
            for h in els:
                gh = self.group.compose(g, h)
                for i in range(n):
                    if self._act[(self._act[(i, g)], h)] != self._act[(i, gh)]:
                        errors.append("action compatibility fails at (%d, %r, %r)" % (i, g, h))
                        break
        if errors:
            return errors
        for g in els:
            for (i, j), (k, c) in self._mul.items():
                hit = self._mul.get((self._act[(i, g)], self._act[(j, g)]))
                if hit is None or hit[0] != self._act[(k, g)] or not hit[1] == c:
                    errors.append(
                        "action of %r is not an algebra automorphism on (%d, %d)" % (g, i, j)
                    )
                    break
        return errors

    def commutator_matrix(self) -> SparseMatrix:
        """Matrix of x -> ([x, e_b])_b used for the center dimension."""
        n = self.dim
        entries = {}
        for b in range(n):
            for i in range(n):
                hit = self._mul.get((i, b))
                if hit is not None:
                    k, c = hit
                    key = (b * n + k, i)
                    entries[key] = entries.get(key, get_field(1).zero) + c
                hit = self._mul.get((b, i))
                if hit is not None:
                    k, c = hit
                    key = (b * n + k, i)
                    entries[key] = entries.get(key, get_field(1).zero) - c
        return SparseMatrix(n * n, n, entries)

    def center_dimension(self) -> int:
        return self.commutator_matrix().nullity()


def twisted_algebra(theta: ExtensionCocycle, weights: HaarWeights | None = None,
                    action: GroupAction | None = None) -> TwistedConvolutionAlgebra:
    """Build the twisted convolution algebra, wiring the canonical arrow
    action when the groupoid is the action groupoid of the given action."""
    basis_action = None
    group = None
    if action is not None:
        group = action.group
        basis_action = {
            (a, k): arrow_action(action, a, k)
            for a in theta.groupoid.arrows
            for k in action.elements()
        }
    return TwistedConvolutionAlgebra(theta, weights, group, basis_action)


def pair_cover_algebra(group: FiniteGroupoid, theta_group: ExtensionCocycle):
    """The pair-groupoid model of a group extension, with translation action.

    H1 is the pair groupoid on the element set of the group; the cocycle is
    pulled back along nu(x, y) = x y^-1 and the group acts by simultaneous
    right translation (x, y).k = (xk, yk), under which the pulled-back
    cocycle is invariant by construction.
    """
    if not group.is_group():
        raise ValueError("expected a one-object groupoid")
    H = pair_groupoid(group.arrows)

    def nu(arrow):
        x, y = arrow
        return group.compose(x, group.inverse[y])

    theta = {}
    for (a, b) in H.composable_tuples(2):
        theta[(a, b)] = theta_group.value(nu(a), nu(b))
    ext = ExtensionCocycle(H, theta, theta_group.order)
    basis_action = {
        ((x, y), k): (group.compose(x, k), group.compose(y, k))
        for (x, y) in H.arrows
        for k in group.arrows
    }
    return TwistedConvolutionAlgebra(ext, None, group, basis_action)


def group_algebra(group: FiniteGroupoid) -> TwistedConvolutionAlgebra:
    """The plain group algebra as a twisted algebra with trivial phase."""
    return TwistedConvolutionAlgebra(trivial_cocycle(group))
