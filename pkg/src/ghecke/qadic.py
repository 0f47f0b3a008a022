"""Truncated exact arithmetic in the mixed (q, p, p, ...)-adic ring.

The ambient ring is the completion of Z[1/p] in the topology whose
neighbourhoods of 0 are the subgroups q*p^N*Z.  A truncated element is the
coset  tail + head + q*p^N*Z  stored as

    tail -- a rational in [0, 1) with p-power denominator (the finite
            negative-digit part), exact;
    head -- an integer in [0, q*p^N), the a_* + q*a_+ part mod q*p^N.

Working with cosets makes precision tracking exact: sums keep the level,
a product loses exactly the tail denominators' exponents, and every
operation either knows its answer or raises PrecisionError.

The compact subring (tail = 0) is CRT-isomorphic to Z/q x Z_p; both views
are available and must agree, which the test suite checks on random pairs.

Key objects: w0 = -1/q in Z_p, the fixed point z0 = 1 + q*w0, its cyclic
group of multiples (the stable subgroup), the duality pairing
<a, b> = e((a*b)/q), annihilators, and the stratification of 1 + q*Z_p by
powers of p^n0, with n0 the multiplicative order of p mod q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .groups import DomainError, UsageError, fr_mod

Fr = Fraction


class PrecisionError(Exception):
    """Raised when the stored level cannot determine the requested answer."""

    def __init__(self, msg, level=None):
        super().__init__(msg)
        self.level = level


def padic_val(n: int, p: int) -> int:
    """v_p(n) for a nonzero integer (caller handles 0)."""
    if n == 0:
        raise UsageError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def rat_val(x: Fraction, p: int) -> int:
    if x == 0:
        raise UsageError("valuation of zero")
    return padic_val(x.numerator, p) - padic_val(x.denominator, p)


def crt_pair(a1: int, m1: int, a2: int, m2: int) -> int:
    """x mod m1*m2 with x = a1 mod m1, x = a2 mod m2 (coprime moduli)."""
    g, s, _ = _xgcd(m1, m2)
    assert g == 1
    return (a1 + (a2 - a1) * s % m2 * m1) % (m1 * m2)


def _xgcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        qt = old_r // r
        old_r, r = r, old_r - qt * r
        old_s, s = s, old_s - qt * s
        old_t, t = t, old_t - qt * t
    return old_r, old_s, old_t


# ---------------------------------------------------------------------------
# plain Z_p approximations


@dataclass(frozen=True)
class ZpApprox:
    """A p-adic integer known modulo p^n."""
    p: int
    n: int
    residue: int

    def __post_init__(self):
        object.__setattr__(self, "residue", self.residue % self.p ** self.n)

    def _join(self, o: "ZpApprox") -> int:
        if self.p != o.p:
            raise UsageError("mixed primes")
        return min(self.n, o.n)

    def __add__(self, o):
        n = self._join(o)
        return ZpApprox(self.p, n, self.residue + o.residue)

    def __mul__(self, o):
        n = self._join(o)
        return ZpApprox(self.p, n, self.residue * o.residue)

    def __neg__(self):
        return ZpApprox(self.p, self.n, -self.residue)

    def invert(self) -> "ZpApprox":
        if self.residue % self.p == 0:
            raise DomainError("not a unit in Z_p")
        return ZpApprox(self.p, self.n, pow(self.residue, -1, self.p ** self.n))


def zp_invert(u: ZpApprox) -> ZpApprox:
    return u.invert()


# ---------------------------------------------------------------------------
# the mixed ring


@dataclass(frozen=True)
class QAdicNumber:
    p: int
    q: int
    level: int          # known modulo q * p^level
    tail: Fraction      # in [0, 1), denominator a power of p
    head: int           # in [0, q * p^level)

    def __post_init__(self):
        if self.level < 0:
            raise PrecisionError("level exhausted", self.level)
        object.__setattr__(self, "head", self.head % self.modulus)

    @property
    def modulus(self) -> int:
        return self.q * self.p ** self.level

    @staticmethod
    def from_rational(x, p: int, q: int, level: int) -> "QAdicNumber":
        x = Fr(x)
        d = x.denominator
        while d % p == 0:
            d //= p
        if d != 1:
            raise UsageError(f"{x} is not in Z[1/{p}]")
        tail = fr_mod(x, Fr(1))
        head = int(x - tail)
        return QAdicNumber(p, q, level, tail, head)

    @staticmethod
    def from_crt(p: int, q: int, level: int, mod_q: int, zp: int) -> "QAdicNumber":
        """Compact-subring element from its (Z/q, Z_p) coordinates."""
        head = crt_pair(mod_q % q, q, zp % p ** level, p ** level) if q > 1 \
            else zp % p ** level
        return QAdicNumber(p, q, level, Fr(0), head)

    # -- canonical digit views

    @property
    def a_minus(self) -> Fraction:
        return self.tail

    @property
    def a_star(self) -> int:
        return self.head % self.q

    @property
    def a_plus(self) -> ZpApprox:
        return ZpApprox(self.p, self.level, (self.head - self.a_star) // self.q)

    def crt_view(self) -> tuple[int, ZpApprox]:
        """(residue mod q, Z_p image) of the compact-subring part; requires
        tail = 0."""
        if self.tail != 0:
            raise DomainError("element is outside the compact subring")
        return self.head % self.q, ZpApprox(self.p, self.level, self.head)

    def in_compact(self) -> bool:
        return self.tail == 0

    # -- arithmetic

    def _same(self, o: "QAdicNumber"):
        if (self.p, self.q) != (o.p, o.q):
            raise UsageError("mixed rings")

    def __add__(self, o: "QAdicNumber") -> "QAdicNumber":
        self._same(o)
        lvl = min(self.level, o.level)
        s = self.tail + o.tail
        carry = int(s)
        return QAdicNumber(self.p, self.q, lvl, s - carry, self.head + o.head + carry)

    def __neg__(self) -> "QAdicNumber":
        if self.tail == 0:
            return QAdicNumber(self.p, self.q, self.level, Fr(0), -self.head)
        return QAdicNumber(self.p, self.q, self.level, 1 - self.tail, -self.head - 1)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o: "QAdicNumber") -> "QAdicNumber":
        self._same(o)
        va = padic_val(self.tail.denominator, self.p) if self.tail else 0
        vb = padic_val(o.tail.denominator, self.p) if o.tail else 0
        lvl = min(self.level, o.level) - va - vb
        if lvl < 0:
            raise PrecisionError("product level exhausted", lvl)
        prod = (self.tail + self.head) * (o.tail + o.head)
        t = fr_mod(prod, Fr(1))
        return QAdicNumber(self.p, self.q, lvl, t, int(prod - t))

    def scale(self, r) -> "QAdicNumber":
        """Multiply by an exact element of Z[1/p]; drops level by the
        denominator's p-exponent."""
        r = Fr(r)
        vd = padic_val(r.denominator, self.p) if r.denominator > 1 else 0
        lvl = self.level - vd
        if lvl < 0:
            raise PrecisionError("scaling level exhausted", lvl)
        prod = (self.tail + self.head) * r
        t = fr_mod(prod, Fr(1))
        return QAdicNumber(self.p, self.q, lvl, t, int(prod - t))

    def truncate(self, level: int) -> "QAdicNumber":
        if level > self.level:
            raise PrecisionError("cannot raise the level", self.level)
        return QAdicNumber(self.p, self.q, level, self.tail, self.head)

    def agrees(self, o: "QAdicNumber") -> bool:
        """Equality of the underlying cosets at the coarser level."""
        self._same(o)
        lvl = min(self.level, o.level)
        return self.tail == o.tail and \
            self.head % (self.q * self.p ** lvl) == o.head % (self.q * self.p ** lvl)

    # -- text encoding: "p,q,N;tail;a_star;d0,d1,...,d(N-1)"

    def encode(self) -> str:
        digits = []
        a = (self.head - self.a_star) // self.q
        for _ in range(self.level):
            digits.append(str(a % self.p))
            a //= self.p
        return f"{self.p},{self.q},{self.level};{self.tail};{self.a_star};{','.join(digits)}"

    @staticmethod
    def decode(text: str) -> "QAdicNumber":
        try:
            meta, tail, star, digits = text.split(";")
            p, q, n = (int(t) for t in meta.split(","))
            tail_fr = Fr(tail)
            ds = [int(d) for d in digits.split(",")] if digits else []
        except ValueError as exc:
            raise UsageError(f"bad encoding: {text!r}") from exc
        if len(ds) != n or any(not 0 <= d < p for d in ds):
            raise UsageError("digit list does not match the level")
        a_plus = sum(d * p ** i for i, d in enumerate(ds))
        return QAdicNumber(p, q, n, tail_fr, int(star) + q * a_plus)

    def __repr__(self):
        return f"QAdic({self.encode()})"


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for r in _prime_factors(n):
        out[r] = padic_val(n, r)
    return out


# ---------------------------------------------------------------------------
# the order n0, the fixed point z0, and the stable subgroup


def n0(p: int, q: int) -> int:
    """Multiplicative order of p mod q (1 when q = 1)."""
    if q < 1 or math.gcd(p, q) != 1:
        raise DomainError("need q >= 1 coprime to p")
    if q == 1:
        return 1
    k, acc = 1, p % q
    while acc != 1:
        acc = acc * p % q
        k += 1
    return k


def w0(p: int, q: int, level: int) -> ZpApprox:
    return ZpApprox(p, level, -pow(q, -1, p ** level) if p ** level > 1 else 0)


def z0(p: int, q: int, level: int) -> QAdicNumber:
    """The idempotent 1 + q*w0: residue 1 mod q, image 0 in Z_p."""
    w = w0(p, q, level)
    formal = QAdicNumber(p, q, level, Fr(0), 1 + q * w.residue)
    crt = QAdicNumber.from_crt(p, q, level, 1, 0)
    assert formal == crt
    return crt


def zp_val(a: QAdicNumber) -> int:
    """v_p of the Z_p image, capped at the level; requires tail = 0."""
    _, zp = a.crt_view()
    if zp.residue == 0:
        return a.level
    return min(padic_val(zp.residue, a.p), a.level)


def h_infinity(p: int, q: int, level: int) -> list[QAdicNumber]:
    """The multiples j*z0, 0 <= j < q: the intersection of the scaled copies
    p^(k*n0) of the compact subring."""
    zz = z0(p, q, level)
    return [QAdicNumber.from_crt(p, q, level, j, 0) for j in range(q)] \
        if q > 1 else [zz.scale(0)]


def h_infinity_member(a: QAdicNumber, k_limit: int):
    """Whether a lies in p^(k*n0) * (compact subring) for all k <= k_limit.

    Returns True/False, or None when k_limit * n0 exceeds the stored level.
    """
    if not a.in_compact():
        return False
    n_0 = n0(a.p, a.q)
    need = k_limit * n_0
    if need > a.level:
        return None
    return zp_val(a) >= need


# ---------------------------------------------------------------------------
# duality


def duality_pair(a: QAdicNumber, b: QAdicNumber) -> Fraction:
    """Phase exponent of <a, b> = e((a*b)/q); exact whenever the product
    retains a nonnegative level, else PrecisionError."""
    a._same(b)
    c = a * b  # raises PrecisionError if the tails eat the level
    return fr_mod(Fr(c.tail + c.head % c.q, 1) / c.q, Fr(1))


def in_q_zp(a: QAdicNumber) -> bool:
    """Membership in q * Z_p (the annihilator of the compact subring)."""
    return a.in_compact() and a.head % a.q == 0


def sigma_ext_membership(a: QAdicNumber) -> bool:
    """Membership in 1 + q*Z_p, the set of characters extending the
    canonical one; equivalently tail 0 and leading residue 1."""
    return a.in_compact() and a.head % a.q == 1 % a.q


def h_infinity_perp_membership(a: QAdicNumber, k_max: int):
    """Whether p^(k*n0) * a lands in q*Z_p for some k <= k_max.

    Cross-checked against the digit form: after clearing the tail with the
    minimal power of p^n0, membership reads off as tail + head = 0 mod q.
    Returns (verdict, k or None); verdict None means k_max was too small.
    """
    n_0 = n0(a.p, a.q)
    khat = 0
    if a.tail:
        khat = -(-padic_val(a.tail.denominator, a.p) // n_0)  # ceil
    for k in range(0, k_max + 1):
        if in_q_zp(a.scale(a.p ** (k * n_0))):
            if k >= khat:
                b = a.scale(a.p ** (khat * n_0))
                alt = (int(a.tail * a.p ** (khat * n_0)) + a.head) % a.q == 0 \
                    if khat > 0 else a.head % a.q == 0 and a.tail == 0
                assert in_q_zp(b) == alt
            return True, k
    if k_max < khat:
        return None, None
    return False, None


# ---------------------------------------------------------------------------
# stratification of 1 + q*Z_p


@dataclass(frozen=True)
class Stratum:
    kind: str           # "fixed-point" | "shell"
    k: int | None       # shell index when kind == "shell"
    k_tested: int       # largest shell membership the level could test


def _in_shifted_base(a: QAdicNumber, k: int) -> bool:
    """Membership of a in p^(k*n0) * (1 + q*Z_p), k >= 0, at the level."""
    n_0 = n0(a.p, a.q)
    if not a.in_compact():
        return False
    if k * n_0 > a.level:
        raise PrecisionError("shell beyond the level", a.level)
    return (a.head - a.p ** (k * n_0)) % (a.q * a.p ** (k * n_0)) == 0


def stratify(a: QAdicNumber, k_range: int | None = None) -> Stratum:
    """Locate a inside the nested shells p^(k*n0)(1 + q*Z_p).

    The shells k and k+1 differ on the open stratum; an element passing
    every testable shell is reported as the fixed-point class (at this
    level it is indistinguishable from z0, and z0 itself always is).
    """
    n_0 = n0(a.p, a.q)
    if not a.in_compact():
        # clear the tail: a = p^(-shift*n0) * b with b in the compact subring
        shift = -(-padic_val(a.tail.denominator, a.p) // n_0)
        b = a.scale(a.p ** (shift * n_0))
        inner = stratify(b, k_range)
        if inner.kind == "shell":
            return Stratum("shell", inner.k - shift, inner.k_tested)
        raise PrecisionError("shell index is beyond the stored level", a.level)
    k_cap = a.level // n_0
    if k_range is not None:
        k_cap = min(k_cap, k_range)
    if not _in_shifted_base(a, 0):
        raise DomainError("element is outside 1 + q*Z_p")
    k = 0
    while k + 1 <= k_cap and _in_shifted_base(a, k + 1):
        k += 1
    if k == k_cap:
        return Stratum("fixed-point", None, k_cap)
    return Stratum("shell", k, k_cap)


# ---------------------------------------------------------------------------
# finite adeles and the scaled-lattice witness


@dataclass(frozen=True)
class FiniteAdele:
    """Coordinates at finitely many listed primes (rational value, known
    modulo prime^prec); every unlisted coordinate is an unspecified
    integral element."""
    coords: tuple  # sorted tuple of (prime, Fraction, prec)

    @staticmethod
    def make(entries: dict, prec: int = 64) -> "FiniteAdele":
        return FiniteAdele(tuple(sorted((int(p), Fr(v), prec) for p, v in entries.items())))

    @staticmethod
    def of_rational(x, extra_primes=(), prec: int = 64) -> "FiniteAdele":
        x = Fr(x)
        ps = set(_prime_factors(x.numerator)) if x.numerator else set()
        ps |= set(_prime_factors(x.denominator))
        ps |= {int(r) for r in extra_primes}
        return FiniteAdele(tuple(sorted((r, x, prec) for r in ps)))

    def at(self, prime: int):
        for r, v, prec in self.coords:
            if r == prime:
                return v, prec
        return None

    def primes(self):
        return [r for r, _, _ in self.coords]


@dataclass(frozen=True)
class OmegaWitness:
    ok: bool
    t: Fraction | None = None
    z: FiniteAdele | None = None
    reason: str = ""
    vanishing_prime: int | None = None
    indeterminate: bool = False


def omega_n_witness(x: FiniteAdele, n: int) -> OmegaWitness:
    """Certify x = t*(1/n + z) with t > 0 rational and z integral.

    Succeeds exactly when every coordinate at a prime dividing n is listed
    and nonzero at its precision; the construction solves one congruence
    per such prime and verifies the factorisation coordinate by coordinate.
    """
    if n < 1:
        raise DomainError("n must be positive")
    fac = factorize(n)

    # diagonal fast path: all listed values equal, numerator primes listed
    vals = {v for _, v, _ in x.coords}
    if len(vals) == 1:
        r = vals.pop()
        if r != 0:
            t = r * n
            listed = set(x.primes())
            if set(_prime_factors(abs(t.numerator))) <= listed and t > 0 \
               and set(fac) <= listed:
                z = FiniteAdele(tuple((rr, v / t - Fr(1, n), prec - max(0, rat_val(t, rr)))
                                      for rr, v, prec in x.coords))
                return _verified(x, n, t, z)

    units: dict[int, tuple[int, int]] = {}
    d = 1
    for r, v, prec in x.coords:
        if r in fac:
            if v == 0:
                return OmegaWitness(False, reason="vanishing coordinate",
                                    vanishing_prime=r)
            l = rat_val(v, r)
            if l + fac[r] > prec:
                return OmegaWitness(False, reason="precision too low",
                                    vanishing_prime=r, indeterminate=True)
            units[r] = (l, 0)  # unit filled after d is known
        else:
            d *= r ** max(0, -rat_val(v, r)) if v != 0 else 1
    missing = [r for r in fac if r not in units]
    if missing:
        return OmegaWitness(False, reason="coordinate unspecified at a prime "
                            "dividing n", vanishing_prime=missing[0])

    # CRT for the scaling unit
    K, mod = 0, 1
    prod_l = Fr(1)
    for r, (l, _) in units.items():
        prod_l *= Fr(r) ** l
    for r, (l, _) in units.items():
        v, _ = x.at(r)
        m = r ** fac[r]
        u = (v * d / Fr(r) ** l)
        u_mod = u.numerator * pow(u.denominator, -1, m) % m
        other = prod_l / Fr(r) ** l
        target = pow(u_mod, -1, m) * (other.numerator * pow(other.denominator, -1, m)) % m
        K = crt_pair(K, mod, target, m) if mod > 1 else target % m
        mod *= m
    if K == 0:
        K = mod
    t = n * prod_l / (d * K)
    assert t > 0
    z = FiniteAdele(tuple((r, v / t - Fr(1, n), prec - max(0, rat_val(t, r)))
                          for r, v, prec in x.coords))
    return _verified(x, n, t, z)


def _verified(x: FiniteAdele, n: int, t: Fraction, z: FiniteAdele) -> OmegaWitness:
    for r, v, prec in x.coords:
        zv, zprec = z.at(r)
        if t * (Fr(1, n) + zv) != v:
            raise UsageError("witness failed the roundtrip; construction bug")
        if zv != 0 and rat_val(zv, r) < 0:
            raise UsageError("witness z is not integral; construction bug")
        if zprec < 1:
            return OmegaWitness(False, reason="precision too low to certify z",
                                vanishing_prime=r, indeterminate=True)
    for r in _prime_factors(abs(t.numerator)):
        if r not in set(x.primes()) and n % r != 0:
            raise UsageError("scaling factor ramifies outside the listed primes")
    return OmegaWitness(True, t=t, z=z)
