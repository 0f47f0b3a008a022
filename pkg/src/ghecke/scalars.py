"""Exact scalar arithmetic for the algebra layer.

Three kinds of scalars show up:

* ``Cyclo`` -- elements of the cyclotomic field Q(zeta_M), stored as
  coefficient vectors over 1, zeta, ..., zeta^(phi(M)-1) after reduction
  modulo the M-th cyclotomic polynomial.  Values at different orders are
  promoted to the lcm order on demand, so callers never manage M.
* ``QuadExt`` -- a + b*sqrt(d) with a, b cyclotomic and d a fixed positive
  integer radicand.  Used where half-integer powers of a modular function
  enter a matrix.
* ``L1Value`` -- a formal nonnegative combination sum_i c_i * |z_i| with
  c_i rational and z_i cyclotomic.  Comparisons are decided exactly when
  the terms match formally, and otherwise by certified rational enclosures
  (no floating point anywhere).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

Fr = Fraction


class UndecidedComparison(Exception):
    """Raised if an enclosure refinement loop cannot separate two values."""


# ---------------------------------------------------------------------------
# cyclotomic polynomials (integer coefficients, low degree first)


def _polydiv_exact(num: list[int], den: list[int]) -> list[int]:
    # exact division of integer polynomials, den monic up to sign
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        assert c % den[-1] == 0
        q = c // den[-1]
        out[i] = q
        for j, d in enumerate(den):
            num[i + j] -= q * d
    assert all(c == 0 for c in num)
    return out


@lru_cache(maxsize=None)
def cyclotomic_coeffs(order: int) -> tuple[int, ...]:
    """Coefficients of the order-th cyclotomic polynomial, constant first."""
    if order == 1:
        return (-1, 1)
    num = [0] * (order + 1)
    num[0], num[order] = -1, 1
    den = [1]
    for d in range(1, order):
        if order % d == 0:
            phi_d = list(cyclotomic_coeffs(d))
            new = [0] * (len(den) + len(phi_d) - 1)
            for i, a in enumerate(den):
                for j, b in enumerate(phi_d):
                    new[i + j] += a * b
            den = new
    return tuple(_polydiv_exact(num, den))


@lru_cache(maxsize=None)
def _phi_deg(order: int) -> int:
    return len(cyclotomic_coeffs(order)) - 1


def _reduce(vec: list[Fraction], order: int) -> tuple[Fraction, ...]:
    """Reduce a raw power-coefficient vector modulo the cyclotomic polynomial."""
    phi = cyclotomic_coeffs(order)
    d = len(phi) - 1
    for i in range(len(vec) - 1, d - 1, -1):
        c = vec[i]
        if c:
            vec[i] = Fr(0)
            for j in range(d):
                vec[i - d + j] -= c * phi[j]
    out = vec[:d]
    out += [Fr(0)] * (d - len(out))
    return tuple(out)


class Cyclo:
    """An element of Q(zeta_order), zeta_order = exp(2*pi*i/order).

    Equality, conjugation and the ring operations are exact; the stored
    order of two operands need not match (they are promoted to the lcm).
    """

    __slots__ = ("order", "vec")

    def __init__(self, order: int, vec: tuple[Fraction, ...]):
        self.order = order
        self.vec = vec

    # -- constructors

    @staticmethod
    def rational(r) -> "Cyclo":
        return Cyclo(1, (Fr(r),))

    @staticmethod
    def zero() -> "Cyclo":
        return Cyclo(1, (Fr(0),))

    @staticmethod
    def one() -> "Cyclo":
        return Cyclo(1, (Fr(1),))

    @staticmethod
    def root_of_unity(exponent) -> "Cyclo":
        """e(exponent) for a rational phase exponent, reduced mod 1."""
        e = Fr(exponent) % 1
        m, j = e.denominator, e.numerator
        raw = [Fr(0)] * m
        raw[j % m] = Fr(1)
        return Cyclo(m, _reduce(raw, m))

    # -- promotion

    def to_order(self, order: int) -> "Cyclo":
        if order == self.order:
            return self
        assert order % self.order == 0
        step = order // self.order
        raw = [Fr(0)] * order
        for j, a in enumerate(self.vec):
            if a:
                raw[(j * step) % order] += a
        return Cyclo(order, _reduce(raw, order))

    def _pair(self, other: "Cyclo"):
        if self.order == other.order:
            return self, other
        m = math.lcm(self.order, other.order)
        return self.to_order(m), other.to_order(m)

    # -- ring operations

    def __add__(self, other: "Cyclo") -> "Cyclo":
        a, b = self._pair(other)
        return Cyclo(a.order, tuple(x + y for x, y in zip(a.vec, b.vec)))

    def __sub__(self, other: "Cyclo") -> "Cyclo":
        a, b = self._pair(other)
        return Cyclo(a.order, tuple(x - y for x, y in zip(a.vec, b.vec)))

    def __neg__(self) -> "Cyclo":
        return Cyclo(self.order, tuple(-x for x in self.vec))

    def __mul__(self, other: "Cyclo") -> "Cyclo":
        a, b = self._pair(other)
        n = len(a.vec)
        raw = [Fr(0)] * (2 * n - 1)
        for i, x in enumerate(a.vec):
            if x:
                for j, y in enumerate(b.vec):
                    if y:
                        raw[i + j] += x * y
        return Cyclo(a.order, _reduce(raw, a.order))

    def scale(self, r) -> "Cyclo":
        r = Fr(r)
        return Cyclo(self.order, tuple(x * r for x in self.vec))

    def conj(self) -> "Cyclo":
        raw = [Fr(0)] * self.order
        for j, a in enumerate(self.vec):
            if a:
                raw[(self.order - j) % self.order] += a
        return Cyclo(self.order, _reduce(raw, self.order))

    # -- predicates

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.vec)

    def as_rational(self):
        """The value as a Fraction if it lies in Q, else None."""
        if all(x == 0 for x in self.vec[1:]):
            return self.vec[0]
        return None

    def norm_sq(self) -> "Cyclo":
        return self * self.conj()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cyclo):
            return NotImplemented
        a, b = self._pair(other)
        return a.vec == b.vec

    def __hash__(self):
        # hash via a canonical promotion-independent key: strip trailing zeros
        # is not sound across orders, so hash only the rational fast path and
        # fall back to the (order, vec) pair; dict use across mixed orders is
        # confined to phase-class keys built by canonical_abs_key.
        r = self.as_rational()
        if r is not None:
            return hash(r)
        return hash((self.order, self.vec))

    def __repr__(self):
        r = self.as_rational()
        if r is not None:
            return f"Cyclo({r})"
        return f"Cyclo(order={self.order}, vec={self.vec})"


def canonical_abs_key(z: Cyclo, order: int) -> tuple:
    """A key constant on {zeta^j * z, zeta^j * conj(z)}: same key iff same |z|
    up to that orbit.  Used to match formal |.|-terms in L1 comparisons."""
    z = z.to_order(order)
    zc = z.conj()
    best = None
    zeta = Cyclo.root_of_unity(Fr(1, order))
    cur, curc = z, zc
    for _ in range(order):
        for cand in (cur, curc, -cur, -curc):
            key = cand.to_order(order).vec
            if best is None or key < best:
                best = key
        cur = cur * zeta
        curc = curc * zeta
    return (order, best)


# ---------------------------------------------------------------------------
# a + b*sqrt(d) with cyclotomic a, b


@dataclass(frozen=True)
class QuadExt:
    a: Cyclo
    b: Cyclo
    rad: int  # positive integer radicand; rad == 1 means plain cyclotomic

    @staticmethod
    def of(z: Cyclo, rad: int) -> "QuadExt":
        return QuadExt(z, Cyclo.zero(), rad)

    def __add__(self, o: "QuadExt") -> "QuadExt":
        assert self.rad == o.rad
        return QuadExt(self.a + o.a, self.b + o.b, self.rad)

    def __sub__(self, o: "QuadExt") -> "QuadExt":
        assert self.rad == o.rad
        return QuadExt(self.a - o.a, self.b - o.b, self.rad)

    def __mul__(self, o: "QuadExt") -> "QuadExt":
        assert self.rad == o.rad
        d = Cyclo.rational(self.rad)
        return QuadExt(self.a * o.a + self.b * o.b * d,
                       self.a * o.b + self.b * o.a, self.rad)

    def conj(self) -> "QuadExt":
        # complex conjugation; sqrt(rad) is real and fixed
        return QuadExt(self.a.conj(), self.b.conj(), self.rad)

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def __eq__(self, o) -> bool:
        if not isinstance(o, QuadExt):
            return NotImplemented
        assert self.rad == o.rad
        return self.a == o.a and self.b == o.b


def sqrt_as_quadext(r: Fraction, rad: int) -> QuadExt:
    """Exact sqrt(r) as x or x*sqrt(rad) with x rational.

    Raises ValueError if r is neither a rational square nor rad times one;
    callers treat that as an unsupported-scenario condition.
    """
    r = Fr(r)
    if r < 0:
        raise ValueError("negative radicand")
    s = rational_sqrt(r)
    if s is not None:
        return QuadExt(Cyclo.rational(s), Cyclo.zero(), rad)
    s = rational_sqrt(r / rad)
    if s is not None:
        return QuadExt(Cyclo.zero(), Cyclo.rational(s), rad)
    raise ValueError(f"{r} is not a square times {rad}^(0 or 1)")


def rational_sqrt(r: Fraction):
    """sqrt(r) as a Fraction when r is a perfect rational square, else None."""
    r = Fr(r)
    if r < 0:
        return None
    n, d = r.numerator, r.denominator
    sn, sd = math.isqrt(n), math.isqrt(d)
    if sn * sn == n and sd * sd == d:
        return Fr(sn, sd)
    return None


# ---------------------------------------------------------------------------
# certified rational enclosures (pi, cos, sqrt) for norm comparisons


@lru_cache(maxsize=None)
def pi_enclosure(bits: int) -> tuple[Fraction, Fraction]:
    """[lo, hi] containing pi with width < 2^-bits, by Machin's formula."""

    def atan_inv(x: int, terms: int) -> tuple[Fraction, Fraction]:
        # arctan(1/x) alternating series; tail bounded by first omitted term
        s = Fr(0)
        for k in range(terms):
            t = Fr((-1) ** k, (2 * k + 1) * x ** (2 * k + 1))
            s += t
        tail = Fr(1, (2 * terms + 1) * x ** (2 * terms + 1))
        return s - tail, s + tail

    terms = max(8, bits // 4 + 4)
    a_lo, a_hi = atan_inv(5, terms)
    b_lo, b_hi = atan_inv(239, terms)
    lo = 16 * a_lo - 4 * b_hi
    hi = 16 * a_hi - 4 * b_lo
    assert hi - lo < Fr(1, 2 ** bits)
    return lo, hi


@lru_cache(maxsize=None)
def cos2pi_enclosure(j: int, order: int, bits: int) -> tuple[Fraction, Fraction]:
    """[lo, hi] containing cos(2*pi*j/order), width shrinking with bits."""
    pi_lo, pi_hi = pi_enclosure(bits + 8)
    x_lo = 2 * pi_lo * Fr(j, order)
    x_hi = 2 * pi_hi * Fr(j, order)
    mid = (x_lo + x_hi) / 2
    halfwidth = (x_hi - x_lo) / 2
    # Taylor at 0 evaluated at the rational midpoint; |cos'| <= 1 absorbs the
    # argument interval, the tail bound absorbs truncation.
    terms = 4
    while True:
        s = Fr(0)
        t = Fr(1)
        for k in range(terms):
            s += t
            t = -t * mid * mid / ((2 * k + 1) * (2 * k + 2))
        tail = abs(t)
        err = tail + halfwidth
        if err < Fr(1, 2 ** bits) or terms > 200:
            return s - err, s + err
        terms *= 2


def cyclo_real_enclosure(z: Cyclo, bits: int) -> tuple[Fraction, Fraction]:
    """Enclosure of z assuming z is real (z == conj(z)); uses Re(zeta^j)."""
    lo = hi = Fr(0)
    for j, a in enumerate(z.vec):
        if not a:
            continue
        c_lo, c_hi = cos2pi_enclosure(j % z.order, z.order, bits)
        if a > 0:
            lo += a * c_lo
            hi += a * c_hi
        else:
            lo += a * c_hi
            hi += a * c_lo
    return lo, hi


def sqrt_enclosure(lo: Fraction, hi: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    lo = max(lo, Fr(0))
    assert hi >= 0

    def s_lo(x: Fraction) -> Fraction:
        n = x.numerator * x.denominator
        r = math.isqrt(n * 4 ** bits)
        return Fr(r, x.denominator * 2 ** bits)

    def s_hi(x: Fraction) -> Fraction:
        n = x.numerator * x.denominator
        r = math.isqrt(n * 4 ** bits)
        if r * r < n * 4 ** bits:
            r += 1
        return Fr(r, x.denominator * 2 ** bits)

    return s_lo(lo), s_hi(hi)


def abs_enclosure(z: Cyclo, bits: int) -> tuple[Fraction, Fraction]:
    """Certified enclosure of |z| for cyclotomic z."""
    nsq = z.norm_sq()
    r = nsq.as_rational()
    if r is not None:
        s = rational_sqrt(r)
        if s is not None:
            return s, s
        return sqrt_enclosure(r, r, bits)
    lo, hi = cyclo_real_enclosure(nsq, bits)
    return sqrt_enclosure(lo, hi, bits)


def abs_exact(z: Cyclo):
    """|z| as a Fraction when that is exact, else None."""
    r = z.norm_sq().as_rational()
    if r is None:
        return None
    return rational_sqrt(r)


# ---------------------------------------------------------------------------
# formal L1 values


class L1Value:
    """A formal sum  sum_i coeff_i * |payload_i|  with rational coefficients.

    Terms are kept as (coeff, payload) pairs; comparisons first promote all
    payloads to a common cyclotomic order and combine phase-equivalent
    classes exactly, then fall back to certified enclosures only for what
    fails to cancel formally.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        # terms: iterable of (coeff: Fraction, payload: Cyclo), payload != 0
        self.terms: tuple = tuple(terms)

    @staticmethod
    def of_abs(z: Cyclo, coeff=Fr(1)) -> "L1Value":
        if z.is_zero() or coeff == 0:
            return L1Value()
        return L1Value(((Fr(coeff), z),))

    def __add__(self, o: "L1Value") -> "L1Value":
        return L1Value(self.terms + o.terms)

    def __mul__(self, o: "L1Value") -> "L1Value":
        out = []
        for (c1, z1) in self.terms:
            for (c2, z2) in o.terms:
                z = z1 * z2
                if not z.is_zero() and c1 * c2 != 0:
                    out.append((c1 * c2, z))
        return L1Value(out)

    def scale(self, r) -> "L1Value":
        r = Fr(r)
        if r == 0:
            return L1Value()
        return L1Value(tuple((c * r, z) for c, z in self.terms))

    def _combined(self) -> list:
        """Terms merged by phase-conjugation class at a common order."""
        if not self.terms:
            return []
        order = 1
        for _, z in self.terms:
            order = math.lcm(order, z.order)
        merged: dict = {}
        for c, z in self.terms:
            key = canonical_abs_key(z, order)
            if key in merged:
                merged[key] = (merged[key][0] + c, merged[key][1])
            else:
                merged[key] = (c, z.to_order(order))
        return [(c, z) for c, z in merged.values() if c != 0]

    def exact(self):
        """Value as a Fraction when every |payload| is rational, else None."""
        total = Fr(0)
        for c, z in self._combined():
            a = abs_exact(z)
            if a is None:
                return None
            total += c * a
        return total

    def _enclosure_of(self, combined, bits: int) -> tuple[Fraction, Fraction]:
        lo = hi = Fr(0)
        for c, z in combined:
            a_lo, a_hi = abs_enclosure(z, bits)
            if c >= 0:
                lo += c * a_lo
                hi += c * a_hi
            else:
                lo += c * a_hi
                hi += c * a_lo
        return lo, hi

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        return self._enclosure_of(self._combined(), bits)

    def _decide_sign(self, strict_name: str):
        """-1, 0, +1 for the combined value; 0 only via formal cancellation
        or exact rational evaluation."""
        combined = self._combined()
        if not combined:
            return 0
        total = Fr(0)
        residual = []
        for c, z in combined:
            a = abs_exact(z)
            if a is None:
                residual.append((c, z))
            else:
                total += c * a
        if not residual:
            return -1 if total < 0 else (1 if total > 0 else 0)
        for bits in (64, 128, 256, 512):
            lo, hi = self._enclosure_of(residual, bits)
            if total + lo > 0:
                return 1
            if total + hi < 0:
                return -1
        raise UndecidedComparison(f"{strict_name} not separable at 512 bits")

    def eq(self, o: "L1Value") -> bool:
        diff = self + o.scale(-1)
        return diff._decide_sign("equality") == 0

    def le(self, o: "L1Value") -> bool:
        diff = o + self.scale(-1)
        return diff._decide_sign("inequality") >= 0

    def __repr__(self):
        ex = self.exact()
        if ex is not None:
            return f"L1Value({ex})"
        return f"L1Value(<{len(self.terms)} terms>)"
