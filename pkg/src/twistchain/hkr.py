"""Curved graded algebras, traces, and the cyclic-to-localized chain map.

A curved algebra here is a finite-dimensional N-graded unital algebra with
a degree +1 connection nabla, a curvature element Theta in degree 2 with
nabla^2 = [Theta, .], odd contractions iota_1..iota_r (one per torus
coordinate, with integer weights as the diagonal of nabla iota + iota
nabla), and optionally a finite group acting by automorphisms.  Both
eta components nabla(Theta) and iota_j(Theta) must be central.

A trace onto a graded target (d, iota-bar) intertwines the structure,
satisfies g-twisted graded cyclicity for a fixed group element g, and is
linear over the central elements above.  Out of that data the map

    tau(phi ox a0 ox .. ox ak)(X) =
        phi(g e^X) Int_{Delta_k} Tr(a0 nab(t_1,X)a1 .. nab(t_k,X)ak
                                     e^{-Theta}) dt,
    nab(t,X)b = e^{-tTheta} nabla(e^{-tX} b) e^{tTheta}

sends cyclic chains over the degree-0 part to polynomial cochains in the
torus variables and intertwines b + B with d + iota-bar + eta.  Torus
dependence is truncated at polynomial order N, which is why the chain-map
identity is asserted only up to order N - 1: the contraction along X
raises the order by one.  Evaluation at g e^X also twists the cyclic
operators themselves: the wrap term of b and the rotated slots of B each
pick up an e^{-X} factor, so the operators on weighted chains live here
and reduce to the plain ones when r = 0.

The zero-curvature instantiation over a finite groupoid with a group
action (functions on objects plus the twisted convolution algebra on
arrows, all in degree 0) carries one trace per group element g, valued in
functions on the fixed-point set: at a fixed point x it sums, over the
arrows h into x, the input read at the conjugated loop h^-1 lam_x (h.g^-1)
and carried back along h inside the extension, lam_x being the loop at x
with word g^-1.  A sector with no fixed points gets the zero map, flagged
as such; so does a sector whose transport sums cancel, which is exactly
the case where the transgressed line family has no invariant sections.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .cartan import el_add, el_scale
from .cyclic import UNIT, CyclicChain, project_invariant
from .groupoids import centralizer, conjugacy_classes
from .scalars import Scalar, get_field
from .transgression import transgress


def _one() -> Scalar:
    return get_field(1).one


def _zero() -> Scalar:
    return get_field(1).zero


def _coerce(v) -> Scalar:
    if isinstance(v, Scalar):
        return v
    return get_field(1).scalar(v)


def _fact(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def simplex_integrate(exponents) -> Fraction:
    """Exact integral of t_1^a1 .. t_k^ak over 0 <= t_1 <= .. <= t_k <= 1.

    Integrating from the inside out raises the running exponent total by
    a_i + 1 at step i, so the value is the product of 1/(a_1 + .. + a_i + i).
    """
    total = 0
    value = Fraction(1)
    for a in exponents:
        if a < 0:
            raise ValueError("negative exponent in simplex integral")
        total += a + 1
        value /= total
    return value


class CurvedDGA:
    """Finite N-graded unital algebra with connection and curvature.

    mul[(i, j)] is the product of basis elements as a dict index -> Scalar
    (absent means zero).  nabla[i] and iota[j][i] are stored the same way.
    weights[i] is the r-tuple of integer torus weights of basis element i;
    the torus enters only through those, since e^{-tX} is diagonal on a
    weight-homogeneous basis.  group/act_tables attach a finite group
    acting by automorphisms.
    """

    __slots__ = ("dim", "degrees", "weights", "mul", "nabla", "iota",
                 "theta", "r", "unit", "group", "act_tables")

    def __init__(self, degrees, mul, nabla, unit, theta=None, iota=None,
                 weights=None, group=None, act_tables=None):
        self.dim = len(degrees)
        self.degrees = tuple(degrees)
        self.iota = [dict(t) for t in (iota or [])]
        self.r = len(self.iota)
        if weights is None:
            weights = [(0,) * self.r] * self.dim
        self.weights = tuple(tuple(w) for w in weights)
        assert all(len(w) == self.r for w in self.weights)
        self.mul = dict(mul)
        self.nabla = dict(nabla)
        self.unit = {i: _coerce(c) for i, c in unit.items()}
        self.theta = {i: _coerce(c) for i, c in (theta or {}).items()}
        self.group = group
        self.act_tables = act_tables

    def el_mul(self, u: dict, v: dict) -> dict:
        out = {}
        for i, x in u.items():
            for j, y in v.items():
                prod = self.mul.get((i, j))
                if not prod:
                    continue
                xy = x * y
                for k, c in prod.items():
                    cur = out.get(k)
                    s = xy * c if cur is None else cur + xy * c
                    if s.is_zero():
                        out.pop(k, None)
                    else:
                        out[k] = s
        return out

    def apply(self, table: dict, el: dict) -> dict:
        out = {}
        for i, c in el.items():
            img = table.get(i)
            if img:
                out = el_add(out, el_scale(img, c))
        return out

    def nabla_el(self, el: dict) -> dict:
        return self.apply(self.nabla, el)

    def iota_el(self, j: int, el: dict) -> dict:
        return self.apply(self.iota[j], el)

    def act_el(self, g, el: dict) -> dict:
        return self.apply(self.act_tables[g], el)

    def el_degree(self, el: dict):
        degs = {self.degrees[i] for i in el}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError("element is not degree homogeneous")
        return degs.pop()

    def el_weight(self, el: dict):
        ws = {self.weights[i] for i in el}
        if not ws:
            return None
        if len(ws) > 1:
            raise ValueError("element is not weight homogeneous")
        return ws.pop()

    def theta_powers(self) -> list:
        """[Theta^0, Theta^1, ..] until zero; rejects non-nilpotent input."""
        powers = [dict(self.unit)]
        cur = dict(self.unit)
        for _ in range(self.dim + 1):
            cur = self.el_mul(cur, self.theta)
            if not cur:
                return powers
            powers.append(cur)
        raise ValueError("curvature element is not nilpotent")

    def exp_theta(self, sign: int) -> dict:
        out = {}
        for p, pw in enumerate(self.theta_powers()):
            out = el_add(out, el_scale(pw, Fraction(sign ** p, _fact(p))))
        return out

    def commutator(self, u: dict, v: dict, v_degree: int) -> dict:
        """[u, v] graded, with |u| read off u and |v| supplied."""
        du = self.el_degree(u)
        du = 0 if du is None else du
        sign = -1 if (du * v_degree) % 2 else 1
        return el_add(self.el_mul(u, v),
                      el_scale(self.el_mul(v, u), -sign))

    def _is_central(self, el: dict) -> bool:
        if not el:
            return True
        one = _one()
        for i in range(self.dim):
            if self.commutator(el, {i: one}, self.degrees[i]):
                return False
        return True

    def validate(self) -> list[str]:
        errors = []
        one = _one()
        for (i, j), prod in self.mul.items():
            want = self.degrees[i] + self.degrees[j]
            wmix = tuple(a + b for a, b in zip(self.weights[i], self.weights[j]))
            for k in prod:
                if self.degrees[k] != want:
                    errors.append("product (%d,%d) breaks the grading" % (i, j))
                    break
                if self.weights[k] != wmix:
                    errors.append("product (%d,%d) breaks the weights" % (i, j))
                    break
        for i in range(self.dim):
            if self.el_mul(self.unit, {i: one}) != {i: one} or \
                    self.el_mul({i: one}, self.unit) != {i: one}:
                errors.append("unit fails at %d" % i)
        named = [("nabla", self.nabla, 1)] + [
            ("iota_%d" % j, self.iota[j], -1) for j in range(self.r)
        ]
        for label, table, shift in named:
            for i in range(self.dim):
                img = table.get(i) or {}
                for k in img:
                    if self.degrees[k] != self.degrees[i] + shift:
                        errors.append("%s shifts %d to the wrong degree" % (label, i))
                        break
                    if self.weights[k] != self.weights[i]:
                        errors.append("%s changes the weight of %d" % (label, i))
                        break
            for i in range(self.dim):
                for j in range(self.dim):
                    prod = self.mul.get((i, j)) or {}
                    lhs = self.apply(table, prod)
                    sgn = -1 if self.degrees[i] % 2 else 1
                    rhs = el_add(self.el_mul(table.get(i) or {}, {j: one}),
                                 el_scale(self.el_mul({i: one}, table.get(j) or {}), sgn))
                    if lhs != rhs:
                        errors.append("%s breaks the Leibniz rule at (%d, %d)"
                                      % (label, i, j))
        for a in range(self.r):
            for b in range(a, self.r):
                for i in range(self.dim):
                    anti = el_add(self.iota_el(a, self.iota[b].get(i) or {}),
                                  self.iota_el(b, self.iota[a].get(i) or {}))
                    if anti:
                        errors.append("iota_%d iota_%d + iota_%d iota_%d != 0 at %d"
                                      % (a, b, b, a, i))
        for j in range(self.r):
            for i in range(self.dim):
                mix = el_add(self.nabla_el(self.iota[j].get(i) or {}),
                             self.iota_el(j, self.nabla.get(i) or {}))
                want = {i: _coerce(self.weights[i][j])} if self.weights[i][j] else {}
                if mix != want:
                    errors.append("nabla iota_%d + iota_%d nabla is not the "
                                  "stored weight at %d" % (j, j, i))
        if self.theta and self.el_degree(self.theta) != 2:
            errors.append("curvature element is not degree 2")
        if self.theta and any(self.el_weight(self.theta)):
            errors.append("curvature element is not weight 0")
        for i in range(self.dim):
            lhs = self.nabla_el(self.nabla.get(i) or {})
            rhs = self.commutator(self.theta, {i: one}, self.degrees[i]) \
                if self.theta else {}
            if lhs != rhs:
                errors.append("nabla^2 != [Theta, .] at %d" % i)
        if not self._is_central(self.nabla_el(self.theta)):
            errors.append("nabla(Theta) is not central")
        for j in range(self.r):
            if not self._is_central(self.iota_el(j, self.theta)):
                errors.append("iota_%d(Theta) is not central" % j)
        if self.group is not None:
            errors.extend(self._validate_action())
        return errors

    def _validate_action(self) -> list[str]:
        errors = []
        one = _one()
        e = self.group.unit[self.group.objects[0]]
        for i in range(self.dim):
            if self.act_tables[e].get(i) != {i: one}:
                errors.append("group identity does not act as identity")
                break
        for g in self.group.arrows:
            tg = self.act_tables[g]
            for i in range(self.dim):
                img = tg.get(i) or {}
                for k in img:
                    if self.degrees[k] != self.degrees[i] or \
                            self.weights[k] != self.weights[i]:
                        errors.append("action of %r breaks degree or weight" % (g,))
                        break
            broke = False
            for i in range(self.dim):
                for j in range(self.dim):
                    prod = self.mul.get((i, j)) or {}
                    if self.apply(tg, prod) != \
                            self.el_mul(tg.get(i) or {}, tg.get(j) or {}):
                        errors.append("action of %r is not an algebra map" % (g,))
                        broke = True
                        break
                if broke:
                    break
            for i in range(self.dim):
                if self.apply(tg, self.nabla.get(i) or {}) != \
                        self.nabla_el(tg.get(i) or {}):
                    errors.append("action of %r does not commute with nabla" % (g,))
                    break
            for j in range(self.r):
                for i in range(self.dim):
                    if self.apply(tg, self.iota[j].get(i) or {}) != \
                            self.iota_el(j, tg.get(i) or {}):
                        errors.append("action of %r does not commute with iota_%d"
                                      % (g, j))
                        break
            if self.theta and self.apply(tg, self.theta) != self.theta:
                errors.append("action of %r moves the curvature element" % (g,))
        for g in self.group.arrows:
            for h in self.group.arrows:
                gh = self.group.compose(g, h)
                bad = False
                for i in range(self.dim):
                    if self.apply(self.act_tables[h],
                                  self.act_tables[g].get(i) or {}) != \
                            (self.act_tables[gh].get(i) or {}):
                        errors.append("action is not multiplicative at %r, %r"
                                      % (g, h))
                        bad = True
                        break
                if bad:
                    break
        return errors

    def validate_associativity(self, triples=None, rng=None) -> list[str]:
        """(e_i e_j) e_k = e_i (e_j e_k); exhaustive when triples is None."""
        errors = []
        one = _one()
        if triples is None:
            source = itertools.product(range(self.dim), repeat=3)
        else:
            source = (tuple(rng.randrange(self.dim) for _ in range(3))
                      for _ in range(triples))
        for i, j, k in source:
            lhs = self.el_mul(self.mul.get((i, j)) or {}, {k: one})
            rhs = self.el_mul({i: one}, self.mul.get((j, k)) or {})
            if lhs != rhs:
                errors.append("associativity fails at (%d, %d, %d)" % (i, j, k))
                if len(errors) > 4:
                    break
        return errors


class GradedTarget:
    """Graded space with differential, contractions, and weights: the
    receiving end of a trace.  Tables map basis labels to elements."""

    __slots__ = ("labels", "index", "degrees", "weights", "d_table",
                 "iota_tables", "r")

    def __init__(self, labels, degrees, d_table, iota_tables=None, weights=None):
        self.labels = tuple(labels)
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self.degrees = dict(zip(self.labels, degrees))
        self.iota_tables = [dict(t) for t in (iota_tables or [])]
        self.r = len(self.iota_tables)
        if weights is None:
            weights = {lab: (0,) * self.r for lab in self.labels}
        self.weights = dict(weights)
        self.d_table = dict(d_table)

    def apply(self, table: dict, el: dict) -> dict:
        out = {}
        for lab, c in el.items():
            img = table.get(lab)
            if img:
                out = el_add(out, el_scale(img, c))
        return out

    def d_el(self, el: dict) -> dict:
        return self.apply(self.d_table, el)

    def iota_el(self, j: int, el: dict) -> dict:
        return self.apply(self.iota_tables[j], el)

    def validate(self) -> list[str]:
        errors = []
        for lab in self.labels:
            img = self.d_table.get(lab) or {}
            for m in img:
                if self.degrees[m] != self.degrees[lab] + 1 or \
                        self.weights[m] != self.weights[lab]:
                    errors.append("d shifts %r badly" % (lab,))
                    break
            if self.d_el(img):
                errors.append("d^2 != 0 at %r" % (lab,))
        for j, t in enumerate(self.iota_tables):
            for lab in self.labels:
                img = t.get(lab) or {}
                for m in img:
                    if self.degrees[m] != self.degrees[lab] - 1:
                        errors.append("iota_%d shifts %r badly" % (j, lab))
                        break
                if self.apply(t, img):
                    errors.append("iota_%d^2 != 0 at %r" % (j, lab))
        for j, t in enumerate(self.iota_tables):
            for lab in self.labels:
                mix = el_add(self.d_el(t.get(lab) or {}),
                             self.apply(t, self.d_table.get(lab) or {}))
                w = self.weights[lab][j]
                want = {lab: _coerce(w)} if w else {}
                if mix != want:
                    errors.append("d iota_%d + iota_%d d is not the stored "
                                  "weight at %r" % (j, j, lab))
        return errors


class TraceData:
    """A trace from a curved algebra onto a graded target.

    table[i] is the image of basis element i.  g is the group element
    twisting the cyclicity (None reads as the identity).  eta_omega_op
    and eta_x_ops give multiplication by nabla(Theta) and by iota_j(Theta)
    on the target: the module structure the localized coboundary needs.
    """

    __slots__ = ("omega", "target", "table", "g", "eta_omega_op", "eta_x_ops")

    def __init__(self, omega: CurvedDGA, target: GradedTarget, table,
                 g=None, eta_omega_op=None, eta_x_ops=None):
        self.omega = omega
        self.target = target
        self.table = list(table)
        assert len(self.table) == omega.dim
        self.g = g
        self.eta_omega_op = dict(eta_omega_op or {})
        self.eta_x_ops = [dict(t) for t in (eta_x_ops or [{}] * omega.r)]
        assert len(self.eta_x_ops) == omega.r

    def trace_el(self, el: dict) -> dict:
        out = {}
        for i, c in el.items():
            img = self.table[i]
            if img:
                out = el_add(out, el_scale(img, c))
        return out

    def is_zero_map(self) -> bool:
        return not any(self.table)

    def _twist(self, el: dict) -> dict:
        """The stored action of g on the algebra; identity when g is None."""
        if self.g is None:
            return el
        return self.omega.act_el(self.g, el)

    def validate(self) -> list[str]:
        errors = []
        omega, target = self.omega, self.target
        one = _one()
        for i in range(omega.dim):
            img = self.table[i]
            for lab in img:
                if target.degrees[lab] != omega.degrees[i]:
                    errors.append("trace shifts the degree of %d" % i)
                    break
            if self.trace_el(omega.nabla.get(i) or {}) != target.d_el(img):
                errors.append("trace does not intertwine nabla and d at %d" % i)
            for j in range(omega.r):
                if self.trace_el(omega.iota[j].get(i) or {}) != \
                        target.iota_el(j, img):
                    errors.append("trace does not intertwine iota_%d at %d" % (j, i))
        for i in range(omega.dim):
            for j in range(omega.dim):
                lhs = self.trace_el(omega.mul.get((i, j)) or {})
                sgn = -1 if (omega.degrees[i] * omega.degrees[j]) % 2 else 1
                rhs = el_scale(self.trace_el(
                    omega.el_mul(self._twist({j: one}), {i: one})), sgn)
                if lhs != rhs:
                    errors.append("twisted cyclicity fails at (%d, %d)" % (i, j))
        big_omega = omega.nabla_el(omega.theta)
        for i in range(omega.dim):
            lhs = self.trace_el(omega.el_mul(big_omega, {i: one}))
            if lhs != target.apply(self.eta_omega_op, self.table[i]):
                errors.append("trace is not linear over nabla(Theta) at %d" % i)
            for j in range(omega.r):
                eta_j = omega.iota_el(j, omega.theta)
                lhs = self.trace_el(omega.el_mul(eta_j, {i: one}))
                if lhs != target.apply(self.eta_x_ops[j], self.table[i]):
                    errors.append("trace is not linear over iota_%d(Theta) at %d"
                                  % (j, i))
        return errors


class LocalizedCochain:
    """Polynomial in the torus variables with target-valued coefficients,
    truncated at total order N."""

    __slots__ = ("r", "N", "data")

    def __init__(self, r: int, N: int, data=None):
        self.r = r
        self.N = N
        self.data = {}
        for mono, el in (data or {}).items():
            assert len(mono) == r and sum(mono) <= N
            if el:
                self.data[mono] = dict(el)

    def add_term(self, mono, el: dict):
        if sum(mono) > self.N or not el:
            return
        cur = self.data.get(mono)
        s = dict(el) if cur is None else el_add(cur, el)
        if s:
            self.data[mono] = s
        else:
            self.data.pop(mono, None)

    def __add__(self, other):
        out = LocalizedCochain(self.r, self.N, self.data)
        for mono, el in other.data.items():
            out.add_term(mono, el)
        return out

    def truncated(self, order: int) -> dict:
        return {m: el for m, el in self.data.items() if sum(m) <= order}

    def is_zero(self) -> bool:
        return not self.data

    def __eq__(self, other):
        return isinstance(other, LocalizedCochain) and self.data == other.data

    def __repr__(self):
        return "LocalizedCochain(%d terms)" % len(self.data)


def _xpoly_mul(a: dict, b: dict, N: int) -> dict:
    out = {}
    for m1, x in a.items():
        for m2, y in b.items():
            m = tuple(p + q for p, q in zip(m1, m2))
            if sum(m) > N:
                continue
            cur = out.get(m)
            s = x * y if cur is None else cur + x * y
            if s.is_zero():
                out.pop(m, None)
            else:
                out[m] = s
    return out


def _exp_weight(weight, N: int, r: int, scale: int = 1) -> dict:
    """e^{scale <weight, x>} truncated at total order N, as an x-poly."""
    lin = {}
    for j, w in enumerate(weight):
        if w:
            mono = tuple(1 if a == j else 0 for a in range(r))
            lin[mono] = _coerce(scale * w)
    out = {(0,) * r: _one()}
    if not lin:
        return out
    power = dict(out)
    fact = 1
    for m in range(1, N + 1):
        power = _xpoly_mul(power, lin, N)
        if not power:
            break
        fact *= m
        for mono, c in power.items():
            cur = out.get(mono)
            term = c * Fraction(1, fact)
            out[mono] = term if cur is None else cur + term
    return {m: c for m, c in out.items() if not c.is_zero()}


def _t_expand(omega: CurvedDGA, el: dict, N: int, differentiate: bool):
    """{t_exp: {x_mono: element}} for e^{-tTheta} Y e^{tTheta} where
    Y = e^{-tX} el, or nabla(e^{-tX} el) when differentiate is set.

    The torus factor contributes (-<w, x>)^m t^m / m! per weight component
    w of el, truncated at x-order N; the curvature exponentials are finite
    sums by nilpotency.
    """
    r = omega.r
    by_weight = {}
    for i, c in el.items():
        by_weight.setdefault(omega.weights[i], {})[i] = c
    mid = {}
    for w, part in by_weight.items():
        if differentiate:
            part = omega.nabla_el(part)
            if not part:
                continue
        lin = {}
        for j, wj in enumerate(w):
            if wj:
                mono = tuple(1 if a == j else 0 for a in range(r))
                lin[mono] = _coerce(-wj)
        power = {(0,) * r: _one()}
        fact = 1
        for m in range(0, N + 1):
            if m > 0:
                if not lin:
                    break
                power = _xpoly_mul(power, lin, N)
                if not power:
                    break
                fact *= m
            for mono, c in power.items():
                slot = mid.setdefault(m, {})
                scaled = el_scale(part, c * Fraction(1, fact))
                cur = slot.get(mono)
                slot[mono] = scaled if cur is None else el_add(cur, scaled)
    powers = omega.theta_powers()
    out = {}
    for m, xslot in mid.items():
        for mono, middle in xslot.items():
            if not middle:
                continue
            for p in range(len(powers)):
                left = el_scale(omega.el_mul(powers[p], middle),
                                Fraction((-1) ** p, _fact(p)))
                if not left:
                    continue
                for q in range(len(powers)):
                    term = el_scale(omega.el_mul(left, powers[q]),
                                    Fraction(1, _fact(q)))
                    if not term:
                        continue
                    slot = out.setdefault(m + p + q, {})
                    cur = slot.get(mono)
                    slot[mono] = term if cur is None else el_add(cur, term)
    for m in list(out):
        out[m] = {mono: e for mono, e in out[m].items() if e}
        if not out[m]:
            del out[m]
    return out


def nabla_t(omega: CurvedDGA, el: dict, N: int):
    """nab(t,X) el = e^{-tTheta} nabla(e^{-tX} el) e^{tTheta}, exact in t,
    as {t_exp: {x_mono: element}}."""
    return _t_expand(omega, el, N, differentiate=True)


def connection_lemma_errors(omega: CurvedDGA, el: dict, N: int) -> list[str]:
    """-d/dt (e^{-tTheta} (e^{-tX} el) e^{tTheta}) equals the same
    sandwich applied to (nabla + iota_X)^2 (e^{-tX} el), coefficientwise
    in t, exactly up to x-order N.

    This is the cancellation driving the boundary terms of the simplex
    integration: the derivative produces [Theta, .] plus the weight, and
    the axioms identify that with the square of nabla + iota_X (the
    iota_X iota_X term dies by anticommutation).
    """
    r = omega.r
    sand = _t_expand(omega, el, N, differentiate=False)
    lhs = {}
    for m, xslot in sand.items():
        if m == 0:
            continue
        lhs[m - 1] = {mono: el_scale(e, -m) for mono, e in xslot.items()}
    sq = {}

    def acc(mono, val):
        if not val or sum(mono) > N:
            return
        cur = sq.get(mono)
        merged = val if cur is None else el_add(cur, val)
        if merged:
            sq[mono] = merged
        else:
            sq.pop(mono, None)

    acc((0,) * r, omega.nabla_el(omega.nabla_el(el)))
    for j in range(r):
        mj = tuple(1 if a == j else 0 for a in range(r))
        acc(mj, el_add(omega.nabla_el(omega.iota_el(j, el)),
                       omega.iota_el(j, omega.nabla_el(el))))
        for k in range(r):
            mjk = tuple((1 if a == j else 0) + (1 if a == k else 0)
                        for a in range(r))
            acc(mjk, omega.iota_el(j, omega.iota_el(k, el)))
    rhs = {}
    for mono0, e0 in sq.items():
        for m, xslot in _t_expand(omega, e0, N, differentiate=False).items():
            for mono, e in xslot.items():
                mm = tuple(a + b for a, b in zip(mono0, mono))
                if sum(mm) > N:
                    continue
                slot = rhs.setdefault(m, {})
                cur = slot.get(mm)
                slot[mm] = e if cur is None else el_add(cur, e)
    errors = []
    for m in sorted(set(lhs) | set(rhs)):
        a = {mono: e for mono, e in (lhs.get(m) or {}).items() if e}
        b = {mono: e for mono, e in (rhs.get(m) or {}).items() if e}
        if a != b:
            errors.append("connection lemma fails at t-order %d" % m)
    return errors


class HKRFixture:
    """Everything the chain-map verifier needs, bundled.

    algebra is the degree-0 algebra the chains live over (dim, mul_basis,
    unit_vector, group, act_idx); rho[i] is the index of its i-th basis
    vector inside the curved algebra.
    """

    __slots__ = ("name", "algebra", "rho", "trace", "N", "k_cap")

    def __init__(self, name, algebra, rho, trace: TraceData, N: int,
                 k_cap: int = 3):
        self.name = name
        self.algebra = algebra
        self.rho = list(rho)
        self.trace = trace
        self.N = N
        self.k_cap = k_cap
        for i in self.rho:
            if trace.omega.degrees[i] != 0:
                raise ValueError("rho image is not in degree 0")

    def slot_weight(self, s):
        if s == UNIT:
            return (0,) * self.trace.omega.r
        return self.trace.omega.weights[self.rho[s]]

    def slot_el(self, s) -> dict:
        if s == UNIT:
            return {self.rho[i]: _coerce(c)
                    for i, c in self.algebra.unit_vector().items()}
        return {self.rho[s]: _one()}


def xchain_from_chain(chain: CyclicChain, r: int) -> dict:
    zero_mono = (0,) * r
    return {key: {zero_mono: v} for key, v in chain.data.items()}


def _xadd(acc: dict, key, xpoly: dict, scale) -> None:
    if not xpoly:
        return
    scaled = {}
    for m, c in xpoly.items():
        v = c * scale
        if not v.is_zero():
            scaled[m] = v
    if not scaled:
        return
    cur = acc.get(key)
    if cur is None:
        acc[key] = scaled
        return
    for m, c in scaled.items():
        cc = cur.get(m)
        s = c if cc is None else cc + c
        if s.is_zero():
            cur.pop(m, None)
        else:
            cur[m] = s
    if not cur:
        acc.pop(key, None)


def operator_b_x(fixture: HKRFixture, xchain: dict, k: int, N: int) -> dict:
    """The twisted Hochschild boundary on torus-weighted chains.

    Same merge structure as the plain operator; the wrap term reads the
    last slot at g e^X, contributing its stored g-action and the factor
    e^{-<w, x>}.  Coefficients are x-polynomials truncated at order N.
    """
    algebra = fixture.algebra
    r = fixture.trace.omega.r
    out = {}
    if k == 0:
        return out
    one = _one()
    for (g, slots), xpoly in xchain.items():
        sign = 1
        for i in range(k):
            left, right = slots[i], slots[i + 1]
            if left == UNIT:
                merged, coeff = right, one
            else:
                hit = algebra.mul_basis(left, right)
                if hit is None:
                    sign = -sign
                    continue
                merged, coeff = hit
            key = (g, slots[:i] + (merged,) + slots[i + 2:])
            _xadd(out, key, xpoly, coeff if sign == 1 else -coeff)
            sign = -sign
        last = slots[k]
        wfac = _exp_weight(fixture.slot_weight(last), N, r, scale=-1)
        if g is not None and last != UNIT:
            last = algebra.act_idx(last, g)
        first = slots[0]
        if first == UNIT:
            merged, coeff = last, one
        else:
            hit = algebra.mul_basis(last, first)
            if hit is None:
                continue
            merged, coeff = hit
        key = (g, (merged,) + slots[1:k])
        wrap = _xpoly_mul(xpoly, wfac, N)
        _xadd(out, key, wrap, coeff if k % 2 == 0 else -coeff)
    return out


def operator_B_x(fixture: HKRFixture, xchain: dict, k: int, N: int) -> dict:
    """The rotation boundary on torus-weighted chains: every rotated slot
    is read at g e^X, so it picks up the stored g-action and the factor
    e^{-<w, x>}."""
    algebra = fixture.algebra
    r = fixture.trace.omega.r
    one = _one()
    out = {}
    for (g, slots), xpoly in xchain.items():
        if slots[0] == UNIT:
            continue
        for i in range(k + 1):
            rotated = slots[k - i + 1:]
            tail = []
            factor = xpoly
            for s in rotated:
                moved = s
                if g is not None:
                    moved = algebra.act_idx(s, g)
                tail.append(moved)
                wfac = _exp_weight(fixture.slot_weight(s), N, r, scale=-1)
                factor = _xpoly_mul(factor, wfac, N)
            key = (g, (UNIT,) + tuple(tail) + slots[:k - i + 1])
            _xadd(out, key, factor, one if (k * i) % 2 == 0 else -one)
    return out


def tau(chain, fixture: HKRFixture) -> LocalizedCochain:
    """The chain map on one cyclic chain (or weighted chain dict).

    Only the component at the trace's group element contributes: the
    function slot of a basis chain is a delta there, evaluated at g e^X.
    """
    trace = fixture.trace
    omega = trace.omega
    N = fixture.N
    r = omega.r
    out = LocalizedCochain(r, N)
    if isinstance(chain, CyclicChain):
        data = xchain_from_chain(chain, r)
    else:
        data = chain
    exp_theta = omega.exp_theta(-1)
    for (g, slots), xpoly in data.items():
        if g != trace.g:
            continue
        acc = {((), (0,) * r): fixture.slot_el(slots[0])}
        for s in slots[1:]:
            factor = nabla_t(omega, fixture.slot_el(s), N)
            nxt = {}
            for (texp, mono), el in acc.items():
                for m, xslot in factor.items():
                    for mono2, el2 in xslot.items():
                        mm = tuple(a + b for a, b in zip(mono, mono2))
                        if sum(mm) > N:
                            continue
                        prod = omega.el_mul(el, el2)
                        if not prod:
                            continue
                        kk = (texp + (m,), mm)
                        cur = nxt.get(kk)
                        nxt[kk] = prod if cur is None else el_add(cur, prod)
            acc = {kk: el for kk, el in nxt.items() if el}
            if not acc:
                break
        if not acc:
            continue
        for (texp, mono), el in acc.items():
            el = omega.el_mul(el, exp_theta)
            if not el:
                continue
            traced = trace.trace_el(el)
            if not traced:
                continue
            weight = _coerce(simplex_integrate(texp))
            for m2, c in xpoly.items():
                mm = tuple(a + b for a, b in zip(mono, m2))
                if sum(mm) > N:
                    continue
                out.add_term(mm, el_scale(traced, weight * c))
    return out


def localized_boundary(trace: TraceData, cochain: LocalizedCochain) -> LocalizedCochain:
    """(d + iota-bar + eta)(c): the target differential, the contraction
    along X (one x-order up per torus coordinate), and multiplication by
    nabla(Theta) + iota_X(Theta) through the stored module operators."""
    target = trace.target
    out = LocalizedCochain(cochain.r, cochain.N)
    for mono, el in cochain.data.items():
        out.add_term(mono, target.d_el(el))
        out.add_term(mono, target.apply(trace.eta_omega_op, el))
        for j in range(cochain.r):
            shifted = tuple(a + 1 if b == j else a for b, a in enumerate(mono))
            if sum(shifted) > cochain.N:
                continue
            out.add_term(shifted, target.iota_el(j, el))
            out.add_term(shifted, target.apply(trace.eta_x_ops[j], el))
    return out


def random_invariant_chain(fixture: HKRFixture, rng, k: int) -> CyclicChain:
    """Pseudo-random invariant chain of degree k: finite group orbit
    average, total torus weight zero per word."""
    algebra = fixture.algebra
    r = fixture.trace.omega.r
    n = algebra.dim
    zero_w = (0,) * r
    balanced = [i for i in range(n) if fixture.slot_weight(i) == zero_w]
    assert balanced, "fixture has no weight-zero basis vectors"
    group_els = (None,) if algebra.group is None else tuple(algebra.group.arrows)
    for _ in range(200):
        data = {}
        for _ in range(rng.randrange(1, 4)):
            g = group_els[rng.randrange(len(group_els))]
            first = UNIT
            rest = ()
            for _ in range(40):
                if k >= 1 and rng.random() < 0.25:
                    first = UNIT
                else:
                    first = rng.randrange(n)
                rest = tuple(rng.randrange(n) for _ in range(k))
                total = [0] * r
                for s in (first,) + rest:
                    w = fixture.slot_weight(s)
                    for j in range(r):
                        total[j] += w[j]
                if not any(total):
                    break
            else:
                first = balanced[rng.randrange(len(balanced))]
                rest = tuple(balanced[rng.randrange(len(balanced))]
                             for _ in range(k))
            key = (g, (first,) + rest)
            c = rng.randrange(-3, 4)
            if c:
                cur = data.get(key, _zero())
                data[key] = cur + _coerce(c)
        data = {kk: v for kk, v in data.items() if not v.is_zero()}
        chain = CyclicChain(k, data)
        if algebra.group is not None:
            chain = project_invariant(algebra, chain)
        if chain.data:
            return chain
    raise ValueError("could not sample a nonzero invariant chain")


def verify_chain_map(fixture: HKRFixture, trials: int = 100, seed: int = 0) -> dict:
    """tau of (b + B applied to c) against the localized boundary of
    tau(c) on pseudo-random invariant chains; exact coefficient equality
    up to x-order N - 1 (full order when there is no torus)."""
    rng = random.Random(seed)
    N = fixture.N
    order = N - 1 if fixture.trace.omega.r else N
    failures = []
    max_k = 0
    for t in range(trials):
        k = rng.randrange(0, fixture.k_cap + 1)
        max_k = max(max_k, k)
        chain = random_invariant_chain(fixture, rng, k)
        xchain = xchain_from_chain(chain, fixture.trace.omega.r)
        lhs = tau(operator_b_x(fixture, xchain, k, N), fixture)
        lhs = lhs + tau(operator_B_x(fixture, xchain, k, N), fixture)
        rhs = localized_boundary(fixture.trace, tau(chain, fixture))
        if lhs.truncated(order) != rhs.truncated(order):
            failures.append({"trial": t, "degree": k,
                             "chain": sorted(map(repr, chain.data))})
    return {
        "fixture": fixture.name,
        "trials": trials,
        "seed": seed,
        "max_degree": max_k,
        "x_order_checked": order,
        "failures": failures,
        "passed": not failures,
    }


class GroupoidCurvedOmega:
    """Functions on objects plus the twisted convolution algebra on
    arrows, everything in degree 0: the zero-curvature instantiation over
    a finite groupoid with a compatible group action.

    Basis: ("f", x) per object, ("a", gamma) per arrow.  The product is
    pointwise on the first summand, target and source gating between the
    summands, twisted convolution on the second.  The group acts through
    the stored point action and the arrow action of the algebra.
    """

    __slots__ = ("algebra", "theta", "weights", "action", "groupoid",
                 "cdga", "basis", "index", "point_act")

    def __init__(self, algebra, action):
        self.algebra = algebra
        self.theta = algebra.theta
        self.weights = algebra.weights
        self.action = action
        H = algebra.groupoid
        self.groupoid = H
        self.point_act = {(x, g): action.act(x, g)
                          for x in H.objects for g in action.group.arrows}
        basis = [("f", x) for x in H.objects] + [("a", a) for a in H.arrows]
        self.basis = tuple(basis)
        self.index = {b: i for i, b in enumerate(basis)}
        one = _one()
        mul = {}
        for i, (k1, v1) in enumerate(basis):
            for j, (k2, v2) in enumerate(basis):
                if k1 == "f" and k2 == "f":
                    if v1 == v2:
                        mul[(i, j)] = {i: one}
                elif k1 == "f":
                    if H.target[v2] == v1:
                        mul[(i, j)] = {j: one}
                elif k2 == "f":
                    if H.source[v1] == v2:
                        mul[(i, j)] = {i: one}
                else:
                    hit = algebra.mul_basis(algebra.index[v1], algebra.index[v2])
                    if hit is not None:
                        idx, coeff = hit
                        mul[(i, j)] = {self.index[("a", algebra.basis[idx])]: coeff}
        unit = {self.index[("f", x)]: one for x in H.objects}
        act_tables = None
        if algebra.group is not None:
            act_tables = {}
            for g in algebra.group.arrows:
                table = {}
                for i, (kind, v) in enumerate(basis):
                    if kind == "f":
                        moved = ("f", self.point_act[(v, g)])
                    else:
                        moved = ("a", algebra.basis[algebra.act_idx(
                            algebra.index[v], g)])
                    table[i] = {self.index[moved]: one}
                act_tables[g] = table
        self.cdga = CurvedDGA(
            degrees=[0] * len(basis),
            mul=mul,
            nabla={},
            unit=unit,
            theta={},
            iota=[],
            weights=None,
            group=algebra.group,
            act_tables=act_tables,
        )

    def fixed_points(self, g) -> tuple:
        return tuple(x for x in self.groupoid.objects
                     if self.point_act[(x, g)] == x)

    def _sector_loop(self, x, ginv):
        """The loop at the fixed point x carrying the sector: the arrow
        (x, g^-1) when that is a loop at x (arrows as (point, word)
        pairs), the unit loop when the isotropy is trivial."""
        H = self.groupoid
        cand = (x, ginv)
        if ("a", cand) in self.index and H.source[cand] == x \
                and H.target[cand] == x:
            return cand
        return H.unit[x]

    def sector_target(self, g) -> GradedTarget:
        points = self.fixed_points(g)
        return GradedTarget(labels=points, degrees=[0] * len(points),
                            d_table={})

    def trace_table(self, g) -> list:
        """Tr at g on every basis element: zero on the function summand,
        the transported conjugation sum on the arrow summand.

        At a fixed point x the value on an arrow delta is the sum, over
        arrows h with target x, of the extension transport that carries
        the canonical lift of h^-1 lam_x (h.g^-1) back to the lift of
        lam_x, weighted by the fiber weight of h.
        """
        H = self.groupoid
        grp = self.action.group
        algebra = self.algebra
        theta = self.theta
        ginv = grp.inverse[g]
        table = [{} for _ in self.basis]
        for x in self.fixed_points(g):
            lam = self._sector_loop(x, ginv)
            for h in H.target_fiber(x):
                hg = algebra.basis[algebra.act_idx(algebra.index[h], ginv)]
                a_h = H.compose(H.compose(H.inverse[h], lam), hg)
                c = theta.value(h, a_h) \
                    * theta.value(H.compose(h, a_h), H.inverse[hg]) \
                    * theta.value(hg, H.inverse[hg]).inverse()
                w = _coerce(Fraction(self.weights.weight(h)))
                idx = self.index[("a", a_h)]
                cur = table[idx].get(x)
                val = c * w
                table[idx][x] = val if cur is None else cur + val
        for entry in table:
            for lab in [lab for lab, v in entry.items() if v.is_zero()]:
                del entry[lab]
        return table

    def trace_data(self, g) -> TraceData:
        return TraceData(self.cdga, self.sector_target(g),
                         self.trace_table(g), g=g)

    def sector_report(self, g) -> dict:
        trace = self.trace_data(g)
        return {
            "element": repr(g),
            "fixed_points": [repr(x) for x in self.fixed_points(g)],
            "zero_trace": trace.is_zero_map(),
        }


def trace_Tr_g(gco: GroupoidCurvedOmega, el: dict, g) -> dict:
    """The g-trace of one element given over the combined basis."""
    table = gco.trace_table(g)
    out = {}
    for i, c in el.items():
        img = table[i]
        if img:
            out = el_add(out, el_scale(img, c))
    return out


def flat_fixture(algebra, action, g, name="flat", k_cap=2) -> HKRFixture:
    """Chain-map fixture over one sector of the groupoid instantiation."""
    gco = GroupoidCurvedOmega(algebra, action)
    trace = gco.trace_data(g)
    rho = [gco.index[("a", arrow)] for arrow in algebra.basis]
    return HKRFixture(name, algebra, rho, trace, N=1, k_cap=k_cap)


def tau_family(algebra, action, trials: int = 20, seed: int = 0) -> dict:
    """Per-sector traces over conjugacy class representatives, tied to the
    transgressed line family of each sector.

    Three facts are checked.  In loop coordinates the trace relabels
    along the action: within a sector Tr(a.u)(x) = Tr(a)(x.u^-1) for u
    centralizing g, and across sectors Tr at k^-1 g k of a.k, read at
    x.k, equals Tr at g of a read at x; both come from applying the
    cocycle-preserving automorphism to the defining transport identity.
    Last, the localization flag: the trace table vanishes exactly when
    the transgressed family has no invariant sections, so a sector with
    no fixed points or with cancelling transports is the zero map.
    """
    gco = GroupoidCurvedOmega(algebra, action)
    grp = action.group
    theta = algebra.theta
    H = algebra.groupoid
    shape = {(x, k) for x in H.objects for k in grp.arrows}
    assert set(H.arrows) == shape, "arrows are not (point, word) pairs"
    rng = random.Random(seed)
    sectors = []
    failures = []
    trace_cache = {}

    def trace_at(gval):
        if gval not in trace_cache:
            trace_cache[gval] = gco.trace_data(gval)
        return trace_cache[gval]

    for cls in conjugacy_classes(grp):
        g = cls[0]
        family = transgress(theta, action, g)
        errs = family.validate()
        if errs:
            raise ValueError("sector %r: %s" % (g, "; ".join(errs[:3])))
        trace = trace_at(g)
        for u in centralizer(grp, g).arrows:
            for i, (kind, v) in enumerate(gco.basis):
                if kind == "f":
                    continue
                lhs = trace.trace_el(gco.cdga.act_el(u, {i: _one()}))
                rhs = {gco.point_act[(x, u)]: c
                       for x, c in trace.table[i].items()}
                if lhs != rhs:
                    failures.append({"kind": "centralizer", "g": repr(g),
                                     "u": repr(u), "basis": repr(v)})
                    break
        inv_dim = family.invariant_dimension()
        if trace.is_zero_map() != (inv_dim == 0):
            failures.append({"kind": "localization", "g": repr(g)})
        sectors.append((g, trace, {
            "element": repr(g),
            "fixed_points": [repr(x) for x in gco.fixed_points(g)],
            "zero_trace": trace.is_zero_map(),
            "invariant_sections": str(inv_dim),
        }))
    for _ in range(trials):
        g, trace, _rep = sectors[rng.randrange(len(sectors))]
        k = grp.arrows[rng.randrange(len(grp.arrows))]
        g2 = grp.compose(grp.compose(grp.inverse[k], g), k)
        trace2 = trace_at(g2)
        i = rng.randrange(len(gco.basis))
        if gco.basis[i][0] == "f":
            continue
        lhs = trace2.trace_el(gco.cdga.act_el(k, {i: _one()}))
        rhs = {gco.point_act[(x, k)]: c
               for x, c in trace.table[i].items()}
        if lhs != rhs:
            failures.append({"kind": "conjugation", "g": repr(g),
                             "k": repr(k), "basis": repr(gco.basis[i][1])})
    return {
        "sectors": [rep for (_g, _t, rep) in sectors],
        "trials": trials,
        "seed": seed,
        "failures": failures,
        "passed": not failures,
    }
