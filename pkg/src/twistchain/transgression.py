"""Transgression of extension cocycles to flat line-bundle families.

A loop tau at x and an arrow gamma out of x satisfy, inside the twisted
algebra, e_tau e_gamma = c e_gamma e_(gamma^-1 tau gamma) for a single
scalar c; that scalar is the parallel transport

    c = theta(tau, gamma) theta(gamma, gamma^-1 tau gamma)^-1.

On an action groupoid M x| G with loop (x, g), x in M^g, and gamma =
(x, h) this reads

    tau_theta(g; x, h) = theta((x,g), (x,h)) theta((x,h), (x.h, h^-1gh))^-1

and carries the line at x in the g-sector to the line at x.h in the
h^-1gh-sector.  Restricted to h in the centralizer G^g it stays in the
sector and composes as a multiplicative 1-cocycle on M^g x| G^g: that is
the flat equivariant structure.  Two cocycle identities come for free
from associativity of the extension groupoid and are checked here anyway:
composition tau(x, h k) = tau(x, h) tau(x.h, k), and tau(x, g) = 1 (g
acts as the identity on its own sector).
"""

from __future__ import annotations

from fractions import Fraction

from .extensions import ExtensionCocycle
from .groupoids import (
    FiniteGroupoid,
    GroupAction,
    centralizer,
    conjugacy_classes,
    fixed_point_set,
)
from .scalars import Scalar, get_field


class InertiaData:
    """Closed loops of a finite groupoid with the conjugation action.

    conjugation maps (tau, gamma) to gamma^-1 tau gamma whenever the base
    of the loop tau equals target(gamma); it is a partial right action of
    the arrows on the loop set.
    """

    __slots__ = ("groupoid", "loops", "conjugation")

    def __init__(self, groupoid: FiniteGroupoid):
        self.groupoid = groupoid
        self.loops = tuple(g for g in groupoid.arrows
                           if groupoid.source[g] == groupoid.target[g])
        conj = {}
        for tau in self.loops:
            base = groupoid.target[tau]
            for gamma in groupoid.arrows:
                if groupoid.target[gamma] == base:
                    conj[(tau, gamma)] = groupoid.conjugate_loop(tau, gamma)
        self.conjugation = conj

    def validate(self) -> list[str]:
        errors = []
        G = self.groupoid
        for tau in self.loops:
            u = G.unit[G.target[tau]]
            if self.conjugation[(tau, u)] != tau:
                errors.append("unit does not act trivially on loop %r" % (tau,))
        for (tau, gamma), mid in self.conjugation.items():
            for delta in G.arrows:
                if G.target[delta] != G.source[gamma]:
                    continue
                once_more = self.conjugation[(mid, delta)]
                joint = self.conjugation[(tau, G.compose(gamma, delta))]
                if once_more != joint:
                    errors.append(
                        "conjugation is not an action at (%r, %r, %r)" % (tau, gamma, delta)
                    )
        return errors


def inertia(groupoid: FiniteGroupoid) -> InertiaData:
    """Loops with their conjugation action; for M x| G the loop set is
    the disjoint union of the fixed sets M^g."""
    return InertiaData(groupoid)


def loop_transport(theta: ExtensionCocycle, loop, gamma) -> Scalar:
    """The scalar c with e_loop e_gamma = c e_gamma e_(gamma^-1 loop gamma)."""
    G = theta.groupoid
    conj = G.conjugate_loop(loop, gamma)
    return theta.value(loop, gamma) * theta.value(gamma, conj).inverse()


class FlatLineFamily:
    """One transgressed sector: a line per point of M^g with G^g-transport.

    transport[(x, h)] carries the line at x to the line at x.h; it is a
    multiplicative 1-cocycle on M^g x| G^g and equals 1 at h = g.  theta
    and action are kept so the family can be pushed to conjugate sectors;
    hand-built families may pass None for both.
    """

    __slots__ = ("theta", "action", "element", "points", "centralizer_elements",
                 "transport", "order")

    def __init__(self, action: GroupAction | None, element, points, transport,
                 order: int = 1, theta: ExtensionCocycle | None = None):
        self.theta = theta
        self.action = action
        self.element = element
        self.points = tuple(points)
        if action is not None:
            self.centralizer_elements = tuple(
                centralizer(action.group, element).arrows)
        else:
            seen = []
            for (_, h) in transport:
                if h not in seen:
                    seen.append(h)
            self.centralizer_elements = tuple(seen)
        self.transport = dict(transport)
        self.order = order

    def _act(self, x, h):
        if self.action is not None:
            return self.action.act(x, h)
        # hand-built families live on a single point
        return x

    def transport_value(self, x, h) -> Scalar:
        return self.transport[(x, h)]

    def validate(self) -> list[str]:
        errors = []
        keys = set(self.transport)
        wanted = {(x, h) for x in self.points for h in self.centralizer_elements}
        if keys != wanted:
            return ["transport keys do not cover M^g x G^g exactly"]
        one = get_field(1).one
        for x in self.points:
            for h in self.centralizer_elements:
                v = self.transport[(x, h)]
                if not v ** self.order == one:
                    errors.append("transport at (%r, %r) is not an order-%d phase"
                                  % (x, h, self.order))
        if self.action is not None:
            e = self.action.identity()
            for x in self.points:
                if not self.transport[(x, e)] == one:
                    errors.append("unit transport at %r is not 1" % (x,))
            for x in self.points:
                if not self.transport[(x, self.element)] == one:
                    errors.append("g does not act as the identity at %r" % (x,))
            for x in self.points:
                for h in self.centralizer_elements:
                    for k in self.centralizer_elements:
                        hk = self.action.group.compose(h, k)
                        lhs = self.transport[(x, hk)]
                        rhs = self.transport[(x, h)] * self.transport[(self._act(x, h), k)]
                        if not lhs == rhs:
                            errors.append(
                                "transport does not compose at (%r, %r, %r)" % (x, h, k))
        return errors

    def character(self) -> dict:
        """Trace of each h in G^g on the section space of the family."""
        zero = get_field(1).zero
        out = {}
        for h in self.centralizer_elements:
            total = zero
            for x in self.points:
                if self._act(x, h) == x:
                    total = total + self.transport[(x, h)]
            out[h] = total
        return out

    def invariant_dimension(self) -> Fraction:
        """Dimension of the G^g-invariant sections, by character averaging."""
        n = len(self.centralizer_elements)
        if n == 0 or not self.points:
            return Fraction(0)
        total = get_field(1).zero
        for v in self.character().values():
            total = total + v
        avg = total * Fraction(1, n)
        if not avg.is_rational():
            raise ValueError("character average is not rational")
        return avg.as_rational()

    def isomorphism_class(self):
        """Orbit-plus-character data classifying the equivariant family.

        For each G^g-orbit of M^g: the sorted orbit and the character of
        the stabilizer of its minimal point (transport around stabilizer
        loops there).  Two families are isomorphic iff these agree.
        """
        out = []
        seen = set()
        group = self.action.group if self.action is not None else None
        for x in sorted(self.points, key=repr):
            if x in seen:
                continue
            orbit = {x}
            frontier = [x]
            while frontier:
                y = frontier.pop()
                for h in self.centralizer_elements:
                    z = self._act(y, h)
                    if z not in orbit:
                        orbit.add(z)
                        frontier.append(z)
            seen |= orbit
            x0 = sorted(orbit, key=repr)[0]
            stab = [h for h in self.centralizer_elements if self._act(x0, h) == x0]
            char = tuple((h, self.transport[(x0, h)]) for h in stab)
            out.append((tuple(sorted(orbit, key=repr)), char))
        return tuple(out)


def transgress(theta: ExtensionCocycle, action: GroupAction, g) -> FlatLineFamily:
    """The flat equivariant line family of the g-sector.

    theta must live on the action groupoid of the given action (arrows of
    the form (x, gamma), target x, source x.gamma).
    """
    if g not in action.group.arrows:
        raise ValueError("element %r is not in the acting group" % (g,))
    points = fixed_point_set(action, g)
    Z = centralizer(action.group, g).arrows
    transport = {}
    for x in points:
        for h in Z:
            transport[(x, h)] = loop_transport(theta, (x, g), (x, h))
    return FlatLineFamily(action, g, points, transport,
                          order=theta.order, theta=theta)


def conjugation_transport(family: FlatLineFamily, k):
    """Push a transgressed sector to the conjugate sector at k^-1 g k.

    Returns (family at k^-1 g k, witness) where witness[x] is the scalar
    carrying the line at x in the g-sector to the line at x.k in the
    conjugate sector; it intertwines the two transports:

        tau_2(x.k, k^-1 h k) = witness[x]^-1 tau_1(x, h) witness[x.h].
    """
    if family.theta is None or family.action is None:
        raise ValueError("family carries no cocycle to transport along")
    action = family.action
    g = family.element
    group = action.group
    g2 = group.compose(group.compose(group.inverse[k], g), k)
    witness = {
        x: loop_transport(family.theta, (x, g), (x, k))
        for x in family.points
    }
    return transgress(family.theta, action, g2), witness


def compare_families(f1: FlatLineFamily, f2: FlatLineFamily):
    """Search for a fiberwise rescaling intertwining two sector families.

    Returns (True, witness) with witness[x] a Scalar satisfying
    f2.transport[(x, h)] witness[x] = witness[x.h] f1.transport[(x, h)],
    or (False, (x, h, lhs, rhs)) exhibiting the first failure.  The
    witness is propagated along orbits, so the problem is solved without
    linear algebra; any consistent choice of base values works because
    witnesses are unique up to one scalar per orbit.
    """
    if f1.element != f2.element or set(f1.points) != set(f2.points):
        raise ValueError("families live on different sectors")
    if set(f1.centralizer_elements) != set(f2.centralizer_elements):
        raise ValueError("families carry different symmetry groups")
    one = get_field(1).one
    ratio = {}
    for key, v in f1.transport.items():
        ratio[key] = f2.transport[key] * v.inverse()
    witness = {}
    for x0 in f1.points:
        if x0 in witness:
            continue
        witness[x0] = one
        frontier = [x0]
        while frontier:
            y = frontier.pop()
            for h in f1.centralizer_elements:
                z = f1._act(y, h)
                if z not in witness:
                    witness[z] = witness[y] * ratio[(y, h)]
                    frontier.append(z)
    for x in f1.points:
        for h in f1.centralizer_elements:
            lhs = witness[x] * ratio[(x, h)]
            rhs = witness[f1._act(x, h)]
            if not lhs == rhs:
                return False, (x, h, f1.transport[(x, h)], f2.transport[(x, h)])
    return True, witness


def trivial_family(action: GroupAction, g, order: int = 1) -> FlatLineFamily:
    """The family with every transport equal to 1 (transgression of the
    trivial cocycle)."""
    points = fixed_point_set(action, g)
    Z = centralizer(action.group, g).arrows
    one = get_field(1).one
    transport = {(x, h): one for x in points for h in Z}
    return FlatLineFamily(action, g, points, transport, order=order)


def delocalized_dimensions(theta: ExtensionCocycle, action: GroupAction) -> dict:
    """Invariant section dimension of each sector, one conjugacy class each.

    Conjugate sectors are isomorphic, so the assembly sums one
    representative per class; the representative is the first element of
    each conjugacy class tuple.
    """
    out = {}
    for cls in conjugacy_classes(action.group):
        g = cls[0]
        out[g] = transgress(theta, action, g).invariant_dimension()
    return out
