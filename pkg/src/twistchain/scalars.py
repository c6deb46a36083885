"""Exact arithmetic in cyclotomic-rational fields Q(zeta_n).

A Scalar is a vector of rationals in the power basis 1, zeta, ..., zeta^(phi(n)-1)
of Q(zeta_n), with zeta_n a primitive n-th root of unity.  All arithmetic is
exact; nothing here ever touches floating point.  Transcendental constants
(2*pi*i and friends) never appear as numbers: phases are roots of unity and
scale factors stay symbolic in the callers.

>>> i = root_of_unity(4, 1)
>>> (i * i).as_rational()
Fraction(-1, 1)
>>> z = root_of_unity(3, 1)
>>> (z*z + z + 1).is_zero()
True
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd


def _poly_divmod_int(num: list[int], den: list[int]) -> list[int]:
    """Quotient of two integer polynomials known to divide exactly.

    Coefficient lists are little-endian; den is monic up to its leading
    coefficient dividing every remainder step (true for x^n - 1 by products
    of cyclotomics).
    """
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for k in range(len(num) - len(den), -1, -1):
        c = num[k + len(den) - 1]
        assert c % den[-1] == 0
        c //= den[-1]
        q[k] = c
        if c:
            for j, d in enumerate(den):
                num[k + j] -= c * d
    assert all(c == 0 for c in num)
    return q


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, little-endian.

    >>> cyclotomic_polynomial(1)
    (-1, 1)
    >>> cyclotomic_polynomial(4)
    (1, 0, 1)
    >>> cyclotomic_polynomial(6)
    (1, -1, 1)
    """
    if n < 1:
        raise ValueError("root-of-unity order must be >= 1")
    poly = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_divmod_int(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


class CyclotomicField:
    """Q(zeta_n) with precomputed reduction data for the power basis.

    Instances are interned per order; use :func:`get_field`.
    """

    __slots__ = ("order", "degree", "_red", "_pow", "zero", "one")

    def __init__(self, n: int):
        phi = cyclotomic_polynomial(n)
        self.order = n
        self.degree = len(phi) - 1
        d = self.degree
        # _red[k] = x^(d+k) mod Phi_n as an integer vector, k = 0..d-2.
        red = []
        cur = [-c for c in phi[:d]]  # x^d
        red.append(tuple(cur))
        for _ in range(d - 2):
            cur = [0] + cur
            lead = cur.pop()
            if lead:
                cur = [a - lead * c for a, c in zip(cur, phi[:d])]
            red.append(tuple(cur))
        self._red = tuple(red)
        # _pow[j] = zeta^j in the power basis, j = 0..n-1 (exact integers).
        pows = []
        vec = [1] + [0] * (d - 1)
        for _ in range(n):
            pows.append(tuple(vec))
            vec = [0] + vec
            lead = vec.pop()
            if lead:
                vec = [a + lead * r for a, r in zip(vec, red[0])]
        self._pow = tuple(pows)
        self.zero = Scalar(self, (Fraction(0),) * d)
        self.one = Scalar(self, (Fraction(1),) + (Fraction(0),) * (d - 1))

    def __repr__(self):
        return f"CyclotomicField({self.order})"

    def scalar(self, value) -> "Scalar":
        """Coerce a rational number or coefficient sequence to a Scalar."""
        if isinstance(value, Scalar):
            return value if value.field is self else value.lift(self.order)
        if isinstance(value, (int, Fraction)):
            coeffs = (Fraction(value),) + (Fraction(0),) * (self.degree - 1)
            return Scalar(self, coeffs)
        coeffs = tuple(Fraction(c) for c in value)
        if len(coeffs) != self.degree:
            raise ValueError("expected %d coefficients" % self.degree)
        return Scalar(self, coeffs)

    def zeta(self, k: int = 1) -> "Scalar":
        """zeta_n^k as a Scalar."""
        return Scalar(self, tuple(Fraction(c) for c in self._pow[k % self.order]))

    def _mul_vec(self, a, b):
        d = self.degree
        prod = [Fraction(0)] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        prod[i + j] += ai * bj
        out = prod[:d]
        for k in range(d - 1):
            c = prod[d + k]
            if c:
                row = self._red[k]
                for j in range(d):
                    if row[j]:
                        out[j] += c * row[j]
        return tuple(out)


@lru_cache(maxsize=None)
def get_field(n: int) -> CyclotomicField:
    return CyclotomicField(n)


def _common_field(a: "Scalar", b: "Scalar"):
    na, nb = a.field.order, b.field.order
    if na == nb:
        return a, b
    n = na * nb // gcd(na, nb)
    return a.lift(n), b.lift(n)


class Scalar:
    """An element of Q(zeta_n) in the power basis.

    Supports +, -, *, /, ==, exact zero tests and field embeddings.  Scalars
    of different orders coerce to Q(zeta_lcm) on combination.  Unhashable on
    purpose: equality crosses field orders, so hashing would be a trap.
    """

    __slots__ = ("field", "coeffs")
    __hash__ = None

    def __init__(self, field: CyclotomicField, coeffs):
        self.field = field
        self.coeffs = coeffs

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("scalar is not rational: %r" % (self,))
        return self.coeffs[0]

    def lift(self, n: int) -> "Scalar":
        """Embed into Q(zeta_n); requires order | n (zeta_m -> zeta_n^(n/m)).

        >>> root_of_unity(2, 1).lift(4).coeffs
        (Fraction(-1, 1), Fraction(0, 1))
        """
        m = self.field.order
        if n == m:
            return self
        if n % m:
            raise ValueError("no embedding Q(zeta_%d) -> Q(zeta_%d)" % (m, n))
        tgt = get_field(n)
        step = n // m
        out = [Fraction(0)] * tgt.degree
        for k, c in enumerate(self.coeffs):
            if c:
                vec = tgt._pow[(k * step) % n]
                for j in range(tgt.degree):
                    if vec[j]:
                        out[j] += c * vec[j]
        return Scalar(tgt, tuple(out))

    def try_descend(self) -> "Scalar":
        """Return an equal Scalar over Q (order 1) when the value is rational."""
        if self.field.order != 1 and self.is_rational():
            return get_field(1).scalar(self.coeffs[0])
        return self

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Scalar):
            return _common_field(self, other)
        if isinstance(other, (int, Fraction)):
            return self, self.field.scalar(other)
        return self, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return NotImplemented
        return Scalar(a.field, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.field, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return NotImplemented
        return Scalar(a.field, tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return NotImplemented
        return Scalar(a.field, a.field._mul_vec(a.coeffs, b.coeffs))

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        """Multiplicative inverse by the extended Euclidean algorithm mod Phi_n."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero scalar")
        if self.is_rational():
            return self.field.scalar(1 / self.coeffs[0])
        phi = [Fraction(c) for c in cyclotomic_polynomial(self.field.order)]
        r0, r1 = phi, list(self.coeffs)
        s0, s1 = [Fraction(0)], [Fraction(1)]
        while True:
            while r1 and r1[-1] == 0:
                r1.pop()
            if len(r1) == 1:
                inv = 1 / r1[0]
                out = [c * inv for c in s1] + [Fraction(0)] * self.field.degree
                return Scalar(self.field, tuple(out[: self.field.degree]))
            q = [Fraction(0)] * (len(r0) - len(r1) + 1)
            r = list(r0)
            for k in range(len(r0) - len(r1), -1, -1):
                c = r[k + len(r1) - 1] / r1[-1]
                q[k] = c
                if c:
                    for j, d in enumerate(r1):
                        r[k + j] -= c * d
            while r and r[-1] == 0:
                r.pop()
            news = list(s0)
            news += [Fraction(0)] * (len(q) + len(s1) - 1 - len(news))
            for i, qi in enumerate(q):
                if qi:
                    for j, sj in enumerate(s1):
                        news[i + j] -= qi * sj
            r0, r1, s0, s1 = r1, r, s1, news

    def __truediv__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.field.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        if not isinstance(other, Scalar):
            return NotImplemented
        a, b = _common_field(self, other)
        return a.coeffs == b.coeffs

    def __repr__(self):
        n = self.field.order
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                if k == 0:
                    terms.append(str(c))
                else:
                    e = "z%d" % n if k == 1 else "z%d^%d" % (n, k)
                    terms.append(e if c == 1 else "%s*%s" % (c, e))
        return " + ".join(terms) if terms else "0"

    # -- kernel interop ----------------------------------------------------

    def as_int_vec(self) -> tuple[tuple[int, ...], int]:
        """(integer numerator vector, positive denominator) clearing fractions."""
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // gcd(den, c.denominator)
        nums = tuple(int(c * den) for c in self.coeffs)
        return nums, den


def root_of_unity(n: int, k: int = 1) -> Scalar:
    """zeta_n^k as an exact Scalar in Q(zeta_n).

    >>> root_of_unity(1, 0) == 1
    True
    >>> root_of_unity(6, 3) == -1
    True
    """
    if n < 1:
        raise ValueError("root-of-unity order must be >= 1")
    return get_field(n).zeta(k)


def rational(p, q: int = 1) -> Scalar:
    """A rational number as a Scalar over Q (order 1)."""
    return get_field(1).scalar(Fraction(p, q))


ZERO = get_field(1).zero
ONE = get_field(1).one
