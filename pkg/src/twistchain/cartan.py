"""Truncated Cartan complexes over finite-dimensional graded models.

A model is a graded-commutative algebra on nilpotent generators with a
differential d, optional odd contractions iota_1..iota_r (one per torus
coordinate), and optionally a finite group acting by algebra maps.  The
equivariant complex tensors the model with polynomials in even variables
u_1..u_r truncated at total polynomial degree N (the finite stand-in for
germs at 0), graded by

    total degree = 2 * (polynomial degree) + (form degree).

The differential is

    D = d + sum_i u_i iota_i + a /\ (-) - eta /\ (-)

where the flat-connection term a is a closed degree-1 model element killed
by every iota_i, and the twist eta is an equivariantly closed element of
total degree 3.  Truncation is a quotient by the ideal of polynomial
degree > N, which D preserves, so D^2 = 0 holds exactly on every column;
what truncation can distort is the *value* of a cohomology dimension near
the polynomial boundary, and those degrees are flagged.

Twisted complexes (eta != 0) are Z/2-graded because eta mixes total
degrees; everything else is Z-graded.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .linalg import SparseMatrix, homology_dimension, in_image, kernel_basis, solve
from .scalars import Scalar, get_field


def _coerce(v) -> Scalar:
    if isinstance(v, Scalar):
        return v
    return get_field(1).scalar(v)


def el_add(u: dict, v: dict) -> dict:
    out = dict(u)
    for k, x in v.items():
        cur = out.get(k)
        s = x if cur is None else cur + x
        if s.is_zero():
            out.pop(k, None)
        else:
            out[k] = s
    return out


def el_scale(u: dict, c) -> dict:
    c = _coerce(c)
    if c.is_zero():
        return {}
    return {k: v * c for k, v in u.items()}


class CDGAModel:
    """Finite graded-commutative model with d, contractions, group action.

    generators: sequence of (name, degree, nilpotency) with nilpotency >= 2;
    odd-degree generators must have nilpotency 2 (their square vanishes by
    graded commutativity).  The monomial basis is every exponent tuple with
    each exponent below its generator's nilpotency.

    d_gen / iota_gen give the values of d and iota_i on generators as
    elements (dict monomial -> Scalar); both extend to the basis by the
    graded Leibniz rule.  Full tables d_table / iota_tables may be passed
    instead, which is how a deliberately broken model can be expressed and
    caught by validate().

    group / action_gen attach a finite group acting on generators by
    algebra maps (left action, rho_g rho_h = rho_(gh)); only meaningful
    with r = 0.
    """

    __slots__ = ("names", "degrees_by_gen", "nilpotency", "weights", "r",
                 "basis", "index", "degrees", "_mul", "d_table", "iota_tables",
                 "group", "action_tables")

    def __init__(self, generators, r: int = 0, d_gen=None, iota_gen=None,
                 d_table=None, iota_tables=None, group=None, action_gen=None,
                 action_tables=None):
        names, degs, nilps, weights = [], [], [], []
        for spec in generators:
            if len(spec) == 3:
                name, deg, nilp = spec
                w = (0,) * r
            else:
                name, deg, nilp, w = spec
            if nilp < 2:
                raise ValueError("nilpotency of %s must be at least 2" % name)
            if deg % 2 == 1 and nilp != 2:
                raise ValueError("odd generator %s must square to zero" % name)
            if len(w) != r:
                raise ValueError("weight tuple of %s has wrong length" % name)
            names.append(name)
            degs.append(deg)
            nilps.append(nilp)
            weights.append(tuple(w))
        self.names = tuple(names)
        self.degrees_by_gen = tuple(degs)
        self.nilpotency = tuple(nilps)
        self.weights = tuple(weights)
        self.r = r
        basis = list(itertools.product(*[range(n) for n in nilps]))
        if not basis:
            basis = [()]
        basis.sort(key=lambda m: (self._mono_degree(m), m))
        self.basis = tuple(basis)
        self.index = {m: i for i, m in enumerate(self.basis)}
        self.degrees = tuple(self._mono_degree(m) for m in self.basis)
        self._mul = {}
        for m1 in self.basis:
            for m2 in self.basis:
                self._mul[(m1, m2)] = self._mul_mono(m1, m2)
        if d_table is None:
            d_table = self._extend_derivation(d_gen or {})
        self.d_table = d_table
        if iota_tables is None:
            iota_tables = [self._extend_derivation((iota_gen or [{}] * r)[i])
                           for i in range(r)]
        if len(iota_tables) != r:
            raise ValueError("expected %d contraction tables" % r)
        self.iota_tables = list(iota_tables)
        self.group = group
        if action_tables is None and action_gen is not None and group is not None:
            action_tables = {
                g: self._extend_algebra_map(
                    {name: action_gen[(g, name)] for name in self.names})
                for g in group.arrows
            }
        self.action_tables = action_tables

    def _mono_degree(self, mono) -> int:
        return sum(e * d for e, d in zip(mono, self.degrees_by_gen))

    def _mul_mono(self, m1, m2):
        """(sign, product monomial) or None when a nilpotency overflows."""
        out = []
        for e1, e2, nilp in zip(m1, m2, self.nilpotency):
            if e1 + e2 >= nilp:
                return None
            out.append(e1 + e2)
        # Koszul: every factor of m2 moves left past the later factors of m1.
        sign = 1
        for i in range(len(m1)):
            pi = (m2[i] * self.degrees_by_gen[i]) % 2
            if not pi:
                continue
            for j in range(i + 1, len(m1)):
                if (m1[j] * self.degrees_by_gen[j]) % 2:
                    sign = -sign
        return sign, tuple(out)

    def mul(self, u: dict, v: dict) -> dict:
        out = {}
        for m1, x in u.items():
            for m2, y in v.items():
                hit = self._mul[(m1, m2)]
                if hit is None:
                    continue
                sign, m = hit
                w = x * y if sign == 1 else -(x * y)
                cur = out.get(m)
                s = w if cur is None else cur + w
                if s.is_zero():
                    out.pop(m, None)
                else:
                    out[m] = s
        return out

    def gen(self, name: str) -> dict:
        i = self.names.index(name)
        mono = tuple(1 if j == i else 0 for j in range(len(self.names)))
        return {mono: get_field(1).one}

    def unit(self) -> dict:
        return {(0,) * len(self.names): get_field(1).one}

    def element_degree(self, el: dict):
        degs = {self._mono_degree(m) for m in el}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError("element is not degree homogeneous")
        return degs.pop()

    def _extend_derivation(self, gen_values: dict) -> dict:
        """Graded Leibniz extension of an odd derivation given on generators."""
        values = {}
        for name in self.names:
            values[name] = {m: _coerce(c)
                            for m, c in (gen_values.get(name) or {}).items()}
        memo = {}

        def run(mono):
            if mono in memo:
                return memo[mono]
            k = next((i for i, e in enumerate(mono) if e > 0), None)
            if k is None:
                memo[mono] = {}
                return {}
            e = mono[k]
            head = tuple(e if i == k else 0 for i in range(len(mono)))
            rest = tuple(0 if i == k else mono[i] for i in range(len(mono)))
            dk = values[self.names[k]]
            if self.degrees_by_gen[k] % 2 == 0:
                below = tuple(e - 1 if i == k else 0 for i in range(len(mono)))
                d_head = el_scale(self.mul({below: get_field(1).one}, dk), e)
            else:
                d_head = dk  # e == 1 for odd generators
            term1 = self.mul(d_head, run_mono(rest))
            sign = -1 if (e * self.degrees_by_gen[k]) % 2 else 1
            term2 = self.mul({head: get_field(1).one}, run(rest))
            out = el_add(term1, el_scale(term2, sign))
            memo[mono] = out
            return out

        def run_mono(mono):
            return {mono: get_field(1).one}

        return {m: run(m) for m in self.basis}

    def _extend_algebra_map(self, images: dict) -> dict:
        """Multiplicative extension of generator images to the basis."""
        table = {}
        for mono in self.basis:
            acc = self.unit()
            for i, e in enumerate(mono):
                img = {m: _coerce(c) for m, c in images[self.names[i]].items()}
                for _ in range(e):
                    acc = self.mul(acc, img)
            table[mono] = acc
        return table

    def apply_table(self, table: dict, el: dict) -> dict:
        out = {}
        for m, c in el.items():
            out = el_add(out, el_scale(table[m], c))
        return out

    def validate(self) -> list[str]:
        errors = []
        one = get_field(1).one
        for m1 in self.basis:
            for m2 in self.basis:
                f = self._mul[(m1, m2)]
                b = self._mul[(m2, m1)]
                s = (-1) ** (self._mono_degree(m1) * self._mono_degree(m2))
                if (f is None) != (b is None):
                    errors.append("commutativity support mismatch at %r, %r" % (m1, m2))
                elif f is not None and (f[1] != b[1] or f[0] != s * b[0]):
                    errors.append("graded commutativity fails at %r, %r" % (m1, m2))
        named = [("d", self.d_table, 1)] + [
            ("iota_%d" % i, t, -1) for i, t in enumerate(self.iota_tables)
        ]
        for label, table, shift in named:
            for m in self.basis:
                deg = self._mono_degree(m)
                for mm in table[m]:
                    if self._mono_degree(mm) != deg + shift:
                        errors.append("%s shifts %r to the wrong degree" % (label, m))
                        break
            for m1 in self.basis:
                el1 = {m1: one}
                d1 = table[m1]
                for m2 in self.basis:
                    lhs = self.apply_table(table, self.mul(el1, {m2: one}))
                    sign = -1 if self._mono_degree(m1) % 2 else 1
                    rhs = el_add(self.mul(d1, {m2: one}),
                                 el_scale(self.mul(el1, table[m2]), sign))
                    if lhs != rhs:
                        errors.append("%s breaks Leibniz at %r, %r" % (label, m1, m2))
        for m in self.basis:
            if self.apply_table(self.d_table, self.d_table[m]):
                errors.append("d^2 != 0 at %r" % (m,))
        for i, ti in enumerate(self.iota_tables):
            for j, tj in enumerate(self.iota_tables):
                if j < i:
                    continue
                for m in self.basis:
                    anti = el_add(self.apply_table(ti, tj[m]),
                                  self.apply_table(tj, ti[m]))
                    if anti:
                        errors.append("iota_%d iota_%d + iota_%d iota_%d != 0 at %r"
                                      % (i, j, j, i, m))
        for i, ti in enumerate(self.iota_tables):
            for m in self.basis:
                mix = el_add(self.apply_table(self.d_table, ti[m]),
                             self.apply_table(ti, self.d_table[m]))
                if mix:
                    errors.append("d iota_%d + iota_%d d != 0 at %r (Lie derivative "
                                  "does not vanish on the model)" % (i, i, m))
        if self.action_tables is not None and self.group is not None:
            e = self.group.unit[self.group.objects[0]]
            for m in self.basis:
                if self.action_tables[e][m] != {m: one}:
                    errors.append("group identity does not act as identity at %r" % (m,))
            for g in self.group.arrows:
                tg = self.action_tables[g]
                for m in self.basis:
                    for mm in tg[m]:
                        if self._mono_degree(mm) != self._mono_degree(m):
                            errors.append("action of %r does not preserve degree" % (g,))
                            break
                for m1 in self.basis:
                    for m2 in self.basis:
                        lhs = self.apply_table(tg, self.mul({m1: one}, {m2: one}))
                        rhs = self.mul(tg[m1], tg[m2])
                        if lhs != rhs:
                            errors.append("action of %r is not an algebra map at %r, %r"
                                          % (g, m1, m2))
                for h in self.group.arrows:
                    gh = self.group.compose(g, h)
                    for m in self.basis:
                        lhs = self.apply_table(tg, self.action_tables[h][m])
                        if lhs != self.action_tables[gh][m]:
                            errors.append("action is not multiplicative at %r, %r" % (g, h))
                            break
                for m in self.basis:
                    if self.apply_table(tg, self.d_table[m]) != \
                            self.apply_table(self.d_table, tg[m]):
                        errors.append("action of %r does not commute with d" % (g,))
                        break
        return errors


def validate_model(model: CDGAModel) -> list[str]:
    return model.validate()


class TwistData:
    """Twist of a Cartan complex: eta (total degree 3, equivariantly
    closed), flat connection a (model degree 1, closed, killed by iota),
    and an optional even degree-2 element B for exp-conjugation."""

    __slots__ = ("eta_hat", "a", "B")

    def __init__(self, eta_hat=None, a=None, B=None):
        self.eta_hat = {k: _coerce(v) for k, v in (eta_hat or {}).items()
                        if not _coerce(v).is_zero()}
        self.a = {k: _coerce(v) for k, v in (a or {}).items()
                  if not _coerce(v).is_zero()}
        self.B = {k: _coerce(v) for k, v in (B or {}).items()
                  if not _coerce(v).is_zero()} if B else {}


def cx_total_degree(model: CDGAModel, key) -> int:
    p, mono = key
    return 2 * sum(p) + model._mono_degree(mono)


def cx_add(u: dict, v: dict) -> dict:
    return el_add(u, v)


def cx_scale(u: dict, c) -> dict:
    return el_scale(u, c)


def cx_mul(model: CDGAModel, N, u: dict, v: dict) -> dict:
    """Left multiplication in the truncated algebra; drops past degree N."""
    out = {}
    for (q, m1), x in u.items():
        for (p, m2), y in v.items():
            pp = tuple(a + b for a, b in zip(q, p))
            if N is not None and sum(pp) > N:
                continue
            hit = model._mul[(m1, m2)]
            if hit is None:
                continue
            sign, m = hit
            w = x * y if sign == 1 else -(x * y)
            key = (pp, m)
            cur = out.get(key)
            s = w if cur is None else cur + w
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
    return out


def equivariant_d(model: CDGAModel, el: dict, N=None) -> dict:
    """(d + sum_i u_i iota_i) on a complex element; N=None means exact."""
    out = {}
    for (p, mono), c in el.items():
        for mm, v in model.d_table[mono].items():
            out = el_add(out, {(p, mm): v * c})
        for i in range(model.r):
            pp = tuple(e + 1 if j == i else e for j, e in enumerate(p))
            if N is not None and sum(pp) > N:
                continue
            for mm, v in model.iota_tables[i][mono].items():
                out = el_add(out, {(pp, mm): v * c})
    return out


class EquivariantComplex:
    """Truncated Cartan complex with assembled differential.

    Z-graded when the twist eta vanishes, Z/2-graded otherwise.  D^2 = 0
    holds exactly (truncation is a quotient complex); degree values close
    enough to the polynomial boundary that the quotient may distort them
    are reported as flagged by cohomology_dims.
    """

    __slots__ = ("model", "N", "twist", "basis", "index", "degrees", "D",
                 "z_graded", "poly_step")

    def __init__(self, model: CDGAModel, N: int, twist: TwistData | None):
        self.model = model
        self.N = N
        self.twist = twist or TwistData()
        r = model.r
        polys = [p for p in itertools.product(range(N + 1), repeat=r)
                 if sum(p) <= N]
        basis = [(p, m) for p in polys for m in model.basis]
        basis.sort(key=lambda k: (cx_total_degree(model, k), k))
        self.basis = tuple(basis)
        self.index = {k: i for i, k in enumerate(basis)}
        self.degrees = tuple(cx_total_degree(model, k) for k in basis)
        self.z_graded = not self.twist.eta_hat
        step = 0
        eta_cx = self.twist.eta_hat
        a_el = self.twist.a
        entries = {}
        for j, (p, mono) in enumerate(self.basis):
            image = equivariant_d(model, {(p, mono): get_field(1).one}, N)
            if any(model.iota_tables[i].get(mono) for i in range(r)):
                step = max(step, 1)
            if a_el:
                image = el_add(image, cx_mul(
                    model, N, {((0,) * r, m): c for m, c in a_el.items()},
                    {(p, mono): get_field(1).one}))
            if eta_cx:
                emax = max((sum(q) for (q, _) in eta_cx), default=0)
                step = max(step, emax)
                image = el_add(image, cx_scale(cx_mul(
                    model, N, eta_cx, {(p, mono): get_field(1).one}), -1))
            for key, v in image.items():
                entries[(self.index[key], j)] = v
        self.poly_step = step
        n = len(self.basis)
        self.D = SparseMatrix(n, n, entries)
        sq = self.D @ self.D
        if not sq.is_zero():
            raise ValueError("assembled differential does not square to zero")

    def degree_indices(self, k: int) -> list:
        return [i for i, d in enumerate(self.degrees) if d == k]

    def parity_indices(self, par: int) -> list:
        return [i for i, d in enumerate(self.degrees) if d % 2 == par]

    def submatrix(self, rows: list, cols: list) -> SparseMatrix:
        rmap = {r: i for i, r in enumerate(rows)}
        cmap = {c: i for i, c in enumerate(cols)}
        entries = {}
        for (r, c), v in self.D.entries.items():
            if r in rmap and c in cmap:
                entries[(rmap[r], cmap[c])] = v
        return SparseMatrix(len(rows), len(cols), entries)

    def boundary_sensitive(self, indices) -> bool:
        if self.poly_step == 0:
            return False
        limit = self.N - self.poly_step
        return any(sum(self.basis[i][0]) > limit for i in indices)


def cartan_complex(model: CDGAModel, N: int, twist: TwistData | None = None,
                   sector=None) -> EquivariantComplex:
    """Assemble D = d + sum u_i iota_i + a /\ - eta /\ at truncation N.

    sector, when given, is (g, big_model, restriction_table) and the
    restriction is validated as an algebra map commuting with d and the
    contractions; the complex itself is built over `model` (the fixed-set
    model) with the supplied twist.
    """
    if N < 1:
        raise ValueError("truncation must be at least 1")
    errs = model.validate()
    if errs:
        raise ValueError("invalid model: " + "; ".join(errs[:3]))
    twist = twist or TwistData()
    if twist.a:
        if model.element_degree(twist.a) != 1:
            raise ValueError("flat connection term must have degree 1")
        if model.apply_table(model.d_table, twist.a):
            raise ValueError("flat connection term is not closed")
        for i in range(model.r):
            if model.apply_table(model.iota_tables[i], twist.a):
                raise ValueError("flat connection term is not killed by iota_%d" % i)
    if twist.eta_hat:
        for key in twist.eta_hat:
            if cx_total_degree(model, key) != 3:
                raise ValueError("twist term %r does not have total degree 3" % (key,))
        if equivariant_d(model, twist.eta_hat, None):
            raise ValueError("twist is not equivariantly closed")
    if sector is not None:
        g, big_model, table = sector
        errs = validate_algebra_map(big_model, model, table)
        if errs:
            raise ValueError("invalid sector restriction: " + "; ".join(errs[:3]))
    return EquivariantComplex(model, N, twist)


def cohomology_dims(c: EquivariantComplex) -> dict:
    """Exact cohomology dimensions with truncation-sensitivity flags."""
    if c.z_graded:
        degs = sorted(set(c.degrees))
        dims, flags = {}, {}
        for k in degs:
            mid = c.degree_indices(k)
            below = c.degree_indices(k - 1)
            above = c.degree_indices(k + 1)
            d_in = c.submatrix(mid, below)
            d_out = c.submatrix(above, mid)
            dims[k] = homology_dimension(d_in, d_out)
            flags[k] = c.boundary_sensitive(mid) or c.boundary_sensitive(below)
        return {"grading": "Z", "dims": dims, "flags": flags}
    ev = c.parity_indices(0)
    od = c.parity_indices(1)
    d_eo = c.submatrix(od, ev)
    d_oe = c.submatrix(ev, od)
    dims = {
        "even": homology_dimension(d_oe, d_eo),
        "odd": homology_dimension(d_eo, d_oe),
    }
    flag = c.boundary_sensitive(range(len(c.basis)))
    return {"grading": "Z/2", "dims": dims, "flags": {"even": flag, "odd": flag}}


# -- finite group invariants -------------------------------------------------


def group_action_matrix(c: EquivariantComplex, g) -> SparseMatrix:
    """The action of g on the complex (model action, trivial on u's)."""
    if c.model.action_tables is None:
        raise ValueError("model carries no group action")
    table = c.model.action_tables[g]
    n = len(c.basis)
    entries = {}
    for j, (p, mono) in enumerate(c.basis):
        for mm, v in table[mono].items():
            entries[(c.index[(p, mm)], j)] = v
    return SparseMatrix(n, n, entries)


def invariant_cohomology_dims(c: EquivariantComplex) -> dict:
    """Cohomology of the G-invariant subcomplex (orbit-average projector).

    Requires the action to commute with the assembled differential, which
    is checked; the invariant basis is computed per degree so the graded
    bookkeeping survives the change of basis.
    """
    model = c.model
    if model.group is None or model.action_tables is None:
        raise ValueError("model carries no group action")
    group = model.group
    mats = {g: group_action_matrix(c, g) for g in group.arrows}
    for g, A in mats.items():
        if not (A @ c.D - c.D @ A).is_zero():
            raise ValueError("action of %r does not commute with D" % (g,))
    n = len(c.basis)
    inv_count = Fraction(1, len(group.arrows))
    proj_entries = {}
    for A in mats.values():
        for key, v in A.entries.items():
            cur = proj_entries.get(key)
            w = v * inv_count
            proj_entries[key] = w if cur is None else cur + w
    P = SparseMatrix(n, n, {k: v for k, v in proj_entries.items() if not v.is_zero()})

    def blocks():
        if c.z_graded:
            return [(k, c.degree_indices(k)) for k in sorted(set(c.degrees))]
        return [(0, c.parity_indices(0)), (1, c.parity_indices(1))]

    one = get_field(1).one
    inv_vectors = {}
    for label, idx in blocks():
        sub = {(i, j): P.entries.get((gi, gj), get_field(1).zero)
               for i, gi in enumerate(idx) for j, gj in enumerate(idx)
               if (gi, gj) in P.entries}
        pm = SparseMatrix(len(idx), len(idx), sub)
        eye = SparseMatrix(len(idx), len(idx), {(i, i): one for i in range(len(idx))})
        diff = pm + eye * -1
        inv_vectors[label] = (idx, kernel_basis(diff))

    def restricted(src_label, dst_label):
        src_idx, src_vecs = inv_vectors[src_label]
        dst_idx, dst_vecs = inv_vectors[dst_label]
        dst_pos = {gi: i for i, gi in enumerate(dst_idx)}
        m = SparseMatrix(len(dst_idx), len(dst_vecs),
                         {(i, j): v for j, vec in enumerate(dst_vecs)
                          for i, v in enumerate(vec) if not v.is_zero()})
        out_entries = {}
        for j, vec in enumerate(src_vecs):
            full = {src_idx[i]: v for i, v in enumerate(vec) if not v.is_zero()}
            img = c.D.apply(full)
            dense = [get_field(1).zero] * len(dst_idx)
            for gi, v in img.items():
                if gi not in dst_pos:
                    raise ValueError("differential leaves the graded block")
                dense[dst_pos[gi]] = v
            x = solve(m, dense)
            if x is None:
                raise ValueError("differential does not preserve invariants")
            for i, v in enumerate(x):
                if not v.is_zero():
                    out_entries[(i, j)] = v
        return SparseMatrix(len(dst_vecs), len(src_vecs), out_entries)

    if c.z_graded:
        labels = sorted(set(c.degrees))
        dims, flags = {}, {}
        for k in labels:
            idx, vecs = inv_vectors[k]
            below = restricted(k - 1, k) if (k - 1) in inv_vectors else \
                SparseMatrix(len(vecs), 0)
            above = restricted(k, k + 1) if (k + 1) in inv_vectors else \
                SparseMatrix(0, len(vecs))
            dims[k] = homology_dimension(below, above)
            flags[k] = c.boundary_sensitive(idx) or (
                (k - 1) in inv_vectors and c.boundary_sensitive(inv_vectors[k - 1][0]))
        return {"grading": "Z", "dims": dims, "flags": flags}
    d_eo = restricted(0, 1)
    d_oe = restricted(1, 0)
    dims = {
        "even": homology_dimension(d_oe, d_eo),
        "odd": homology_dimension(d_eo, d_oe),
    }
    flag = c.boundary_sensitive(range(len(c.basis)))
    return {"grading": "Z/2", "dims": dims, "flags": {"even": flag, "odd": flag}}


# -- multiplication operators and exp conjugation ---------------------------


def multiplication_matrix(c: EquivariantComplex, element: dict) -> SparseMatrix:
    """Matrix of w -> element /\ w on the truncated basis."""
    n = len(c.basis)
    entries = {}
    for j, key in enumerate(c.basis):
        img = cx_mul(c.model, c.N, element, {key: get_field(1).one})
        for kk, v in img.items():
            entries[(c.index[kk], j)] = v
    return SparseMatrix(n, n, entries)


def exp_element(c: EquivariantComplex, B: dict) -> dict:
    """exp(B) = sum B^k / k! in the truncated algebra; B must be nilpotent."""
    model, N = c.model, c.N
    unit_key = ((0,) * model.r, (0,) * len(model.names))
    acc = {unit_key: get_field(1).one}
    power = dict(acc)
    k = 0
    cap = 4 * (N + sum(model.nilpotency) + 2)
    while True:
        k += 1
        power = cx_mul(model, N, B, power)
        if not power:
            break
        if k > cap:
            raise ValueError("element is not nilpotent; exp does not terminate")
        acc = cx_add(acc, cx_scale(power, Fraction(1, math.factorial(k))))
    return acc


def exp_conjugation(c: EquivariantComplex, B: dict):
    """Conjugate the complex by multiplication with exp(B).

    B must be even of total degree 2 with no constant term.  Returns
    (c2, phi, phi_inv) where c2 carries the shifted twist
    eta_2 = eta_1 + (d + sum u_i iota_i) B, phi = exp(B) /\ (-) satisfies
    phi D_1 = D_2 phi exactly, and phi_inv = exp(-B) /\ (-) inverts phi.
    """
    model, N = c.model, c.N
    B = {k: _coerce(v) for k, v in (B or {}).items() if not _coerce(v).is_zero()}
    unit_mono = (0,) * len(model.names)
    for key in B:
        if cx_total_degree(model, key) != 2:
            raise ValueError("conjugation element must be homogeneous of degree 2")
        if key[1] == unit_mono and sum(key[0]) == 0:
            raise ValueError("conjugation element has a constant component")
    shift = equivariant_d(model, B, N)
    eta2 = cx_add(dict(c.twist.eta_hat), shift)
    c2 = EquivariantComplex(model, N, TwistData(eta2, c.twist.a, None))
    phi = multiplication_matrix(c, exp_element(c, B))
    phi_inv = multiplication_matrix(c, exp_element(c, cx_scale(B, -1)))
    left = phi @ c.D
    right = c2.D @ phi
    if not (left + right * -1).is_zero():
        raise ValueError("exp(B) does not intertwine the differentials")
    n = len(c.basis)
    eye = SparseMatrix(n, n, {(i, i): get_field(1).one for i in range(n)})
    if not ((phi_inv @ phi) + eye * -1).is_zero():
        raise ValueError("exp(-B) does not invert exp(B)")
    return c2, phi, phi_inv


def identity_on_cohomology(c: EquivariantComplex, phi: SparseMatrix) -> bool:
    """Whether the chain endomorphism phi induces the identity on cohomology.

    Checks phi v - v in image(D) for a kernel basis of D; correct because
    the kernel basis contains representatives of every class.
    """
    vecs = kernel_basis(c.D)
    for vec in vecs:
        image = phi.apply({i: v for i, v in enumerate(vec) if not v.is_zero()})
        diff = dict(image)
        for i, v in enumerate(vec):
            if not v.is_zero():
                cur = diff.get(i)
                s = -v if cur is None else cur - v
                if s.is_zero():
                    diff.pop(i, None)
                else:
                    diff[i] = s
        dense = [get_field(1).zero] * len(c.basis)
        for i, v in diff.items():
            dense[i] = v
        if not in_image(c.D, dense):
            return False
    return True


# -- algebra maps between models and induced chain maps ---------------------


def algebra_map_from_generators(src: CDGAModel, dst: CDGAModel, images: dict) -> dict:
    """Extend generator images multiplicatively to a full monomial table."""
    table = {}
    for mono in src.basis:
        acc = dst.unit()
        for i, e in enumerate(mono):
            img = {m: _coerce(c) for m, c in images[src.names[i]].items()}
            for _ in range(e):
                acc = dst.mul(acc, img)
        table[mono] = acc
    return table


def validate_algebra_map(src: CDGAModel, dst: CDGAModel, table: dict) -> list[str]:
    """Check a monomial table is a degree-preserving CDGA map.

    Requires unit to unit, multiplicativity, degree preservation, and
    compatibility with d and each contraction (src and dst must have the
    same number of torus coordinates).
    """
    errors = []
    one = get_field(1).one
    if src.r != dst.r:
        return ["source and target have different torus ranks"]
    unit_src = (0,) * len(src.names)
    if table[unit_src] != dst.unit():
        errors.append("unit is not mapped to the unit")
    for m in src.basis:
        deg = src._mono_degree(m)
        for mm in table[m]:
            if dst._mono_degree(mm) != deg:
                errors.append("map does not preserve degree at %r" % (m,))
                break
    for m1 in src.basis:
        for m2 in src.basis:
            prod = src.mul({m1: one}, {m2: one})
            lhs = {}
            for m, cc in prod.items():
                lhs = el_add(lhs, el_scale(table[m], cc))
            rhs = dst.mul(table[m1], table[m2])
            if lhs != rhs:
                errors.append("map is not multiplicative at %r, %r" % (m1, m2))
    for m in src.basis:
        lhs = {}
        for mm, cc in src.d_table[m].items():
            lhs = el_add(lhs, el_scale(table[mm], cc))
        rhs = dst.apply_table(dst.d_table, table[m])
        if lhs != rhs:
            errors.append("map does not commute with d at %r" % (m,))
    for i in range(src.r):
        for m in src.basis:
            lhs = {}
            for mm, cc in src.iota_tables[i][m].items():
                lhs = el_add(lhs, el_scale(table[mm], cc))
            rhs = dst.apply_table(dst.iota_tables[i], table[m])
            if lhs != rhs:
                errors.append("map does not commute with iota_%d at %r" % (i, m))
    return errors


def induced_complex_map(c1: EquivariantComplex, c2: EquivariantComplex,
                        table: dict) -> SparseMatrix:
    """The chain map c1 -> c2 induced by a model map (identity on u's)."""
    if c1.N != c2.N or c1.model.r != c2.model.r:
        raise ValueError("complexes have incompatible truncation data")
    entries = {}
    for j, (p, mono) in enumerate(c1.basis):
        for mm, v in table[mono].items():
            entries[(c2.index[(p, mm)], j)] = v
    return SparseMatrix(len(c2.basis), len(c1.basis), entries)


def verify_chain_map(c1: EquivariantComplex, c2: EquivariantComplex,
                     M: SparseMatrix) -> list[str]:
    """Exact matrix check of M D_1 = D_2 M."""
    left = M @ c1.D
    right = c2.D @ M
    diff = left + right * -1
    if diff.is_zero():
        return []
    bad = sorted({c for (_, c) in diff.entries})[:5]
    return ["chain map fails on columns %r" % (bad,)]
