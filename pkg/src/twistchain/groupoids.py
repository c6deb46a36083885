"""Finite groupoids, right group actions, and simplicial cochains.

Conventions, used consistently everywhere downstream:

* an arrow g runs from source(g) to target(g); (g1, g2) is composable iff
  source(g1) = target(g2), and the product g1*g2 has target(g1), source(g2);
* the pair groupoid on a set has arrows (x, y) with target x, source y and
  (x, y)*(y, z) = (x, z);
* group actions are right actions x.g; the action groupoid M x| G has arrows
  (x, g) with target x, source x.g and (x, g)*(x.g, h) = (x, gh);
* G acts on the arrows of its own action groupoid by
  (x, g) * k = (x.k, k^-1 g k), the unique extension of x.k compatible with
  sources and targets.

>>> K = klein_four()
>>> sorted(K.arrows)[0]
(0, 0)
>>> A = trivial_action(K, ("pt",))
>>> AG = action_groupoid(A)
>>> len(AG.arrows)
4
"""

from __future__ import annotations

from .scalars import get_field


class FiniteGroupoid:
    """A finite groupoid given by explicit source/target/compose tables."""

    __slots__ = ("objects", "arrows", "source", "target", "unit", "inverse", "_compose")

    def __init__(self, objects, arrows, source, target, unit, inverse, compose):
        self.objects = tuple(objects)
        self.arrows = tuple(arrows)
        self.source = dict(source)
        self.target = dict(target)
        self.unit = dict(unit)
        self.inverse = dict(inverse)
        self._compose = dict(compose)

    def __repr__(self):
        return "FiniteGroupoid(%d objects, %d arrows)" % (
            len(self.objects),
            len(self.arrows),
        )

    def composable(self, a, b) -> bool:
        return self.source[a] == self.target[b]

    def compose(self, a, b):
        try:
            return self._compose[(a, b)]
        except KeyError:
            raise ValueError("arrows %r, %r are not composable" % (a, b)) from None

    def target_fiber(self, x):
        """All arrows with target x."""
        return tuple(a for a in self.arrows if self.target[a] == x)

    def loops(self):
        """Arrows with equal source and target, in arrow order."""
        return tuple(a for a in self.arrows if self.source[a] == self.target[a])

    def is_group(self) -> bool:
        return len(self.objects) == 1

    def conjugate_loop(self, tau, gamma):
        """gamma^-1 * tau * gamma for a loop tau at target(gamma)."""
        if self.source[tau] != self.target[tau]:
            raise ValueError("%r is not a loop" % (tau,))
        if self.target[gamma] != self.target[tau]:
            raise ValueError("loop %r does not sit at target of %r" % (tau, gamma))
        return self.compose(self.compose(self.inverse[gamma], tau), gamma)

    def composable_tuples(self, q: int):
        """Iterate composable q-tuples of arrows (the degree-q nerve).

        Storage of cochains is capped at degree 4; enumeration up to q = 5 is
        allowed so that d . d on a degree-3 cochain can still be evaluated.
        """
        if q < 1 or q > 5:
            raise ValueError("nerve degree %d out of supported range 1..5" % q)
        by_target = {}
        for a in self.arrows:
            by_target.setdefault(self.target[a], []).append(a)

        def extend(prefix, depth):
            if depth == q:
                yield tuple(prefix)
                return
            for nxt in by_target.get(self.source[prefix[-1]], ()):
                prefix.append(nxt)
                yield from extend(prefix, depth + 1)
                prefix.pop()

        for a in self.arrows:
            yield from extend([a], 1)

    def validate(self) -> list[str]:
        """All axiom violations as human-readable strings (empty = valid)."""
        errors = []
        objset, arrset = set(self.objects), set(self.arrows)
        for a in self.arrows:
            if self.source.get(a) not in objset:
                errors.append("source of %r missing or unknown" % (a,))
            if self.target.get(a) not in objset:
                errors.append("target of %r missing or unknown" % (a,))
            if self.inverse.get(a) not in arrset:
                errors.append("inverse of %r missing or unknown" % (a,))
        for x in self.objects:
            u = self.unit.get(x)
            if u not in arrset:
                errors.append("unit of %r missing" % (x,))
                continue
            if self.source[u] != x or self.target[u] != x:
                errors.append("unit of %r is not a loop at it" % (x,))
        if errors:
            return errors
        for a in self.arrows:
            for b in self.arrows:
                defined = (a, b) in self._compose
                if defined != self.composable(a, b):
                    errors.append("compose table disagrees with composability on (%r, %r)" % (a, b))
                elif defined:
                    c = self._compose[(a, b)]
                    if c not in arrset:
                        errors.append("product of (%r, %r) unknown" % (a, b))
                    elif self.target[c] != self.target[a] or self.source[c] != self.source[b]:
                        errors.append("product of (%r, %r) has wrong endpoints" % (a, b))
        if errors:
            return errors
        for a in self.arrows:
            if self.compose(self.unit[self.target[a]], a) != a:
                errors.append("left unit law fails at %r" % (a,))
            if self.compose(a, self.unit[self.source[a]]) != a:
                errors.append("right unit law fails at %r" % (a,))
            inv = self.inverse[a]
            if self.source[inv] != self.target[a] or self.target[inv] != self.source[a]:
                errors.append("inverse of %r has wrong endpoints" % (a,))
            elif self.compose(a, inv) != self.unit[self.target[a]]:
                errors.append("a * a^-1 != unit at %r" % (a,))
        for (a, b) in self._compose:
            for c in self.arrows:
                if self.composable(b, c):
                    if self.compose(self.compose(a, b), c) != self.compose(a, self.compose(b, c)):
                        errors.append("associativity fails on (%r, %r, %r)" % (a, b, c))
        return errors


def group_from_table(elements, table, identity) -> FiniteGroupoid:
    """One-object groupoid from a multiplication table {(g, h): gh}."""
    obj = "*"
    inverse = {}
    for g in elements:
        for h in elements:
            if table[(g, h)] == identity:
                inverse[g] = h
    return FiniteGroupoid(
        objects=[obj],
        arrows=elements,
        source={g: obj for g in elements},
        target={g: obj for g in elements},
        unit={obj: identity},
        inverse=inverse,
        compose=table,
    )


def cyclic_group(n: int) -> FiniteGroupoid:
    """Z/n with elements 0..n-1 under addition.

    >>> cyclic_group(2).compose(1, 1)
    0
    """
    els = list(range(n))
    table = {(a, b): (a + b) % n for a in els for b in els}
    return group_from_table(els, table, 0)


def klein_four() -> FiniteGroupoid:
    """Z/2 x Z/2 with elements (a, b) under componentwise addition mod 2."""
    els = [(a, b) for a in (0, 1) for b in (0, 1)]
    table = {(g, h): ((g[0] + h[0]) % 2, (g[1] + h[1]) % 2) for g in els for h in els}
    return group_from_table(els, table, (0, 0))


def symmetric_3() -> FiniteGroupoid:
    """S3 as permutations of (0, 1, 2), elements stored as image tuples."""
    import itertools

    els = [tuple(p) for p in itertools.permutations(range(3))]
    els.sort()

    def mul(g, h):  # (g*h)(i) = g(h(i)): g*h acts by h first when read as maps
        return tuple(g[h[i]] for i in range(3))

    table = {(g, h): mul(g, h) for g in els for h in els}
    return group_from_table(els, table, (0, 1, 2))


def pair_groupoid(points) -> FiniteGroupoid:
    """Arrows (x, y) from y to x with (x, y)*(y, z) = (x, z)."""
    points = tuple(points)
    arrows = [(x, y) for x in points for y in points]
    compose = {}
    for x in points:
        for y in points:
            for z in points:
                compose[((x, y), (y, z))] = (x, z)
    return FiniteGroupoid(
        objects=points,
        arrows=arrows,
        source={(x, y): y for (x, y) in arrows},
        target={(x, y): x for (x, y) in arrows},
        unit={x: (x, x) for x in points},
        inverse={(x, y): (y, x) for (x, y) in arrows},
        compose=compose,
    )


class GroupAction:
    """A right action of a finite group on a finite carrier set."""

    __slots__ = ("group", "carrier", "act_table")

    def __init__(self, group: FiniteGroupoid, carrier, act_table):
        if not group.is_group():
            raise ValueError("acting groupoid must have one object")
        self.group = group
        self.carrier = tuple(carrier)
        self.act_table = dict(act_table)

    def act(self, x, g):
        return self.act_table[(x, g)]

    def identity(self):
        return self.group.unit[self.group.objects[0]]

    def elements(self):
        return self.group.arrows

    def orbit(self, x):
        return tuple(sorted({self.act(x, g) for g in self.elements()}, key=self.carrier.index))

    def validate(self) -> list[str]:
        errors = []
        e = self.identity()
        carrier = set(self.carrier)
        for x in self.carrier:
            for g in self.elements():
                y = self.act_table.get((x, g))
                if y not in carrier:
                    errors.append("action of %r on %r missing or out of carrier" % (g, x))
        if errors:
            return errors
        for x in self.carrier:
            if self.act(x, e) != x:
                errors.append("identity does not fix %r" % (x,))
            for g in self.elements():
                for h in self.elements():
                    if self.act(self.act(x, g), h) != self.act(x, self.group.compose(g, h)):
                        errors.append("compatibility fails at (%r, %r, %r)" % (x, g, h))
        return errors


def trivial_action(group: FiniteGroupoid, carrier=("pt",)) -> GroupAction:
    table = {(x, g): x for x in carrier for g in group.arrows}
    return GroupAction(group, carrier, table)


def right_translation_action(group: FiniteGroupoid) -> GroupAction:
    """The group acting on its own element set by right multiplication."""
    table = {(x, g): group.compose(x, g) for x in group.arrows for g in group.arrows}
    return GroupAction(group, group.arrows, table)


def fixed_point_set(action: GroupAction, g):
    """Carrier points with x.g = x, in carrier order."""
    return tuple(x for x in action.carrier if action.act(x, g) == x)


def centralizer(group: FiniteGroupoid, g) -> FiniteGroupoid:
    """The subgroup {h : gh = hg} with the inherited table."""
    els = [h for h in group.arrows if group.compose(g, h) == group.compose(h, g)]
    table = {(a, b): group.compose(a, b) for a in els for b in els}
    return group_from_table(els, table, group.unit[group.objects[0]])


def conjugacy_classes(group: FiniteGroupoid):
    """Conjugacy classes as tuples, each led by its representative."""
    seen = set()
    classes = []
    for g in group.arrows:
        if g in seen:
            continue
        cls = []
        for h in group.arrows:
            c = group.compose(group.compose(group.inverse[h], g), h)
            if c not in seen:
                seen.add(c)
                cls.append(c)
        classes.append(tuple(cls))
    return tuple(classes)


def action_groupoid(action: GroupAction) -> FiniteGroupoid:
    """M x| G: arrows (x, g) with target x, source x.g.

    >>> A = right_translation_action(cyclic_group(2))
    >>> G = action_groupoid(A)
    >>> G.compose((0, 1), (1, 1))
    (0, 0)
    """
    arrows = [(x, g) for x in action.carrier for g in action.elements()]
    compose = {}
    for (x, g) in arrows:
        xg = action.act(x, g)
        for h in action.elements():
            compose[((x, g), (xg, h))] = (x, action.group.compose(g, h))
    e = action.identity()
    return FiniteGroupoid(
        objects=action.carrier,
        arrows=arrows,
        source={(x, g): action.act(x, g) for (x, g) in arrows},
        target={(x, g): x for (x, g) in arrows},
        unit={x: (x, e) for x in action.carrier},
        inverse={(x, g): (action.act(x, g), action.group.inverse[g]) for (x, g) in arrows},
        compose=compose,
    )


def arrow_action(action: GroupAction, arrow, k):
    """The right G-action (x, g).k = (x.k, k^-1 g k) on action-groupoid arrows."""
    x, g = arrow
    grp = action.group
    return (action.act(x, k), grp.compose(grp.compose(grp.inverse[k], g), k))


def pullback_groupoid(groupoid: FiniteGroupoid, projection: dict, cover):
    """Pull back along a surjection p: cover -> objects.

    Arrows are (x, gamma, y) with p(x) = target(gamma), p(y) = source(gamma),
    composed by (x, gamma, y)*(y, delta, z) = (x, gamma*delta, z).  Returns
    (pullback, functor) where functor maps pullback arrows to base arrows;
    the object map is the projection itself.

    >>> Z2 = cyclic_group(2)
    >>> P, F = pullback_groupoid(Z2, {"a": "*", "b": "*"}, ("a", "b"))
    >>> (len(P.objects), len(P.arrows))
    (2, 8)
    """
    cover = tuple(cover)
    if set(projection.get(x) for x in cover) != set(groupoid.objects):
        raise ValueError("projection is not a surjection onto the objects")
    arrows = [
        (x, g, y)
        for x in cover
        for g in groupoid.arrows
        for y in cover
        if projection[x] == groupoid.target[g] and projection[y] == groupoid.source[g]
    ]
    compose = {}
    for (x, g, y) in arrows:
        for (y2, h, z) in arrows:
            if y2 == y and groupoid.composable(g, h):
                compose[((x, g, y), (y, h, z))] = (x, groupoid.compose(g, h), z)
    pb = FiniteGroupoid(
        objects=cover,
        arrows=arrows,
        source={a: a[2] for a in arrows},
        target={a: a[0] for a in arrows},
        unit={x: (x, groupoid.unit[projection[x]], x) for x in cover},
        inverse={(x, g, y): (y, groupoid.inverse[g], x) for (x, g, y) in arrows},
        compose=compose,
    )
    functor = {a: a[1] for a in arrows}
    return pb, functor


class GroupoidCochain:
    """A degree-q cochain on composable q-tuples of arrows.

    convention is "multiplicative" (values compose by products, the
    differential alternates value/inverse) or "additive" (values add).
    Degree-0 cochains are keyed by objects.
    """

    __slots__ = ("groupoid", "degree", "values", "convention")

    def __init__(self, groupoid, degree, values, convention="multiplicative"):
        if degree < 0 or degree > 4:
            raise ValueError("cochain degree %d out of supported range 0..4" % degree)
        if convention not in ("multiplicative", "additive"):
            raise ValueError("unknown convention %r" % convention)
        self.groupoid = groupoid
        self.degree = degree
        self.values = dict(values)
        self.convention = convention

    def value(self, key):
        return self.values[key]

    def domain(self):
        if self.degree == 0:
            return tuple(self.groupoid.objects)
        return tuple(self.groupoid.composable_tuples(self.degree))


def _faces(groupoid, tup):
    """The q+2 faces of a composable (q+1)-tuple, in face order."""
    q1 = len(tup)
    out = [tup[1:]]
    for i in range(q1 - 1):
        merged = tup[:i] + (groupoid.compose(tup[i], tup[i + 1]),) + tup[i + 2:]
        out.append(merged)
    out.append(tup[:-1])
    return out


def simplicial_differential(cochain: GroupoidCochain) -> GroupoidCochain:
    """The alternating-face differential, degree q -> q + 1.

    Degree 0 of a function f on objects: (df)(g) = f(source g) - f(target g)
    additively, f(source g)/f(target g) multiplicatively.
    """
    G = cochain.groupoid
    q = cochain.degree
    mult = cochain.convention == "multiplicative"
    out = {}
    if q == 0:
        for g in G.arrows:
            a, b = cochain.values[G.source[g]], cochain.values[G.target[g]]
            out[(g,)] = a / b if mult else a - b
        return GroupoidCochain(G, 1, out, cochain.convention)
    one = get_field(1).one
    zero = get_field(1).zero
    for tup in G.composable_tuples(q + 1):
        acc = one if mult else zero
        for i, face in enumerate(_faces(G, tup)):
            v = cochain.values[face]
            if mult:
                acc = acc * v if i % 2 == 0 else acc * v.inverse()
            else:
                acc = acc + v if i % 2 == 0 else acc - v
        out[tup] = acc
    return GroupoidCochain(G, q + 1, out, cochain.convention)


def is_cocycle(cochain: GroupoidCochain) -> bool:
    """True when the simplicial differential of the cochain is trivial."""
    d = simplicial_differential(cochain)
    if d.convention == "multiplicative":
        return all(v == 1 for v in d.values.values())
    return all(v.is_zero() for v in d.values.values())
