"""Finite-range characters of H, their kernels, and the compatibility set B.

All phases are carried as rational exponents r meaning e(r) = exp(2*pi*i*r),
so every comparison in this module is an exact Fraction comparison.  The
compatibility set

    B = { x : sigma(h) = sigma(x^-1 h x) for all h in H ∩ xHx^-1 }

indexes the double cosets that can support a nonzero biequivariant function;
it contains H, is closed under inverses, and satisfies HB = BH = B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .groups import (Bounds, DihedralFamily, DihedralSub, DomainError,
                     FullAxbFamily, GroupElement, HeckeScenario,
                     HeisenbergFamily, HLat, LamplighterFamily, LTail, NLat,
                     PadicAxbFamily, UsageError, congruence_lattice, fr_mod,
                     in_H, subgroup_Hx)

Fr = Fraction


# ---------------------------------------------------------------------------
# character types (dim 1)


@dataclass(frozen=True)
class DihedralChar:
    exp_b: Fraction  # sigma(b) = e(exp_b); order-2 flip forces exp_b in {0, 1/2}
    dim: int = 1

    @property
    def order(self) -> int:
        return self.exp_b.denominator

    def exp(self, x: GroupElement) -> Fraction:
        m, e = x.coords
        return fr_mod(e * self.exp_b, Fr(1))


@dataclass(frozen=True)
class HeisenbergChar:
    s: Fraction
    t: Fraction
    dim: int = 1

    @property
    def order(self) -> int:
        return math.lcm(self.s.denominator, self.t.denominator)

    def exp(self, x: GroupElement) -> Fraction:
        u, v, _ = x.coords
        return fr_mod(self.s * u + self.t * v, Fr(1))


@dataclass(frozen=True)
class AxbChar:
    """sigma(m) = e(m/q) on the integer subgroup of either ax+b family."""
    q: int
    dim: int = 1

    @property
    def order(self) -> int:
        return self.q

    def exp(self, x: GroupElement) -> Fraction:
        return fr_mod(Fr(x.coords[0], self.q), Fr(1))


@dataclass(frozen=True)
class LampChar:
    """An eventually periodic sequence of characters of Z/f.

    index_at(i) is the exponent numerator of the i-th coordinate character
    (trivial for i <= 0); pre is the preperiod, per the repeating block.
    """
    f: int
    pre: tuple
    per: tuple
    dim: int = 1

    def __post_init__(self):
        if not self.per:
            raise UsageError("period block must be non-empty")

    @property
    def pre_len(self) -> int:
        return len(self.pre)

    @property
    def per_len(self) -> int:
        return len(self.per)

    @property
    def order(self) -> int:
        idxs = set(self.pre) | set(self.per)
        return math.lcm(*[self.f // math.gcd(self.f, j) for j in idxs]) if idxs else 1

    def index_at(self, i: int) -> int:
        if i <= 0:
            return 0
        if i <= len(self.pre):
            return self.pre[i - 1] % self.f
        return self.per[(i - 1 - len(self.pre)) % len(self.per)] % self.f

    def shifted_sum(self, supp, s: int) -> int:
        return sum(self.index_at(p - s) * v for p, v in supp)

    def exp(self, x: GroupElement) -> Fraction:
        supp, _ = x.coords
        return fr_mod(Fr(self.shifted_sum(supp, 0), self.f), Fr(1))


@dataclass(frozen=True)
class DiagChar:
    """A direct sum of characters: a finite-range unitary of dimension > 1.

    Only the convolution-level operations accept these; everything built on
    the epsilon basis requires dim 1 and refuses them.
    """
    parts: tuple

    @property
    def dim(self) -> int:
        return len(self.parts)

    @property
    def order(self) -> int:
        return math.lcm(*[p.order for p in self.parts])

    def exps(self, x: GroupElement) -> tuple:
        return tuple(p.exp(x) for p in self.parts)


# ---------------------------------------------------------------------------
# evaluation and kernels


def sigma_eval(scen: HeckeScenario, h: GroupElement) -> Fraction:
    """Exact phase exponent of sigma at h; h must lie in H."""
    if not in_H(scen, h):
        raise DomainError(f"{h} is not in H")
    if scen.dim != 1:
        raise UsageError("scalar evaluation needs dim sigma = 1")
    return scen.sigma.exp(h)


def sigma_eval_diag(scen: HeckeScenario, h: GroupElement) -> tuple:
    if not in_H(scen, h):
        raise DomainError(f"{h} is not in H")
    if scen.dim == 1:
        return (scen.sigma.exp(h),)
    return scen.sigma.exps(h)


def kernel_descriptor(family, sigma):
    """ker sigma as a lattice element of the family's subgroup lattice."""
    if isinstance(family, DihedralFamily):
        return DihedralSub("refl", 0) if sigma.exp_b == 0 else DihedralSub("triv")
    if isinstance(family, HeisenbergFamily):
        return HLat(congruence_lattice(sigma.s, sigma.t), (Fr(0), Fr(0)))
    if isinstance(family, (PadicAxbFamily, FullAxbFamily)):
        return NLat(Fr(sigma.q))
    if isinstance(family, LamplighterFamily):
        return LTail(1, frozenset([0]))
    raise UsageError("unknown family")


# ---------------------------------------------------------------------------
# the set B


@lru_cache(maxsize=None)
def in_B(scen: HeckeScenario, x: GroupElement) -> bool:
    """Whether sigma is compatible with conjugation by x on H ∩ xHx^-1."""
    if scen.dim != 1:
        raise UsageError("B-membership is defined for dim sigma = 1")
    fam = scen.family
    if isinstance(fam, LamplighterFamily):
        # shift-compatibility of the character sequence on the common tail
        char = scen.sigma
        k = x.coords[1]
        m0 = 1 + max(0, k)
        bound = m0 + abs(k) + char.pre_len + 2 * char.per_len
        return all(char.index_at(m) == char.index_at(m - k) for m in range(m0, bound + 1))
    _, gens = subgroup_Hx(scen, x)
    xi = x.inv()
    for g in gens:
        gg = xi * g * x
        if not in_H(scen, gg):
            raise UsageError("conjugate of H_x left H; broken lattice")
        if sigma_eval(scen, g) != sigma_eval(scen, gg):
            return False
    return True


def b_ball(scen: HeckeScenario, ball) -> list[GroupElement]:
    return [x for x in ball if in_B(scen, x)]


# ---------------------------------------------------------------------------
# extendability to a character of the whole group


@dataclass(frozen=True)
class ExtensionCertificate:
    found: bool
    kind: str = ""
    obstruction: GroupElement | None = None

    def exp(self, scen: HeckeScenario, x: GroupElement) -> Fraction:
        if not self.found:
            raise UsageError("no extension available")
        return _extension_exp(scen, self.kind, x)


def _extension_exp(scen: HeckeScenario, kind: str, x: GroupElement) -> Fraction:
    fam, sig = scen.family, scen.sigma
    if kind == "dihedral":
        return fr_mod(x.coords[1] * sig.exp_b, Fr(1))
    if kind == "heisenberg":
        u, v, _ = x.coords
        return fr_mod(sig.s * u + sig.t * v, Fr(1))
    if kind == "padic-axb":
        # q divides p - 1 is not needed; only p = 1 mod q makes the rule
        # conjugation-invariant, which the certificate constructor checked
        b = x.coords[0]
        q = sig.q
        inv = pow(b.denominator % q, -1, q) if q > 1 else 0
        return fr_mod(Fr(b.numerator * inv, q), Fr(1))
    if kind == "lamplighter":
        supp, _ = x.coords
        j = sig.per[0]
        return fr_mod(Fr(j * sum(v for _, v in supp), sig.f), Fr(1))
    if kind == "trivial":
        return Fr(0)
    raise UsageError(f"unknown extension rule {kind}")


def extendability_check(scen: HeckeScenario, ball) -> ExtensionCertificate:
    """Try the family's explicit global-phase rule and verify it on the ball.

    Returns a certificate carrying the rule, or reports the obstruction
    (an element outside B) when no extension can exist.
    """
    fam = scen.family
    cert = None
    if isinstance(fam, DihedralFamily):
        cert = ExtensionCertificate(True, "dihedral")
    elif isinstance(fam, HeisenbergFamily):
        cert = ExtensionCertificate(True, "heisenberg")
    elif isinstance(fam, PadicAxbFamily):
        q = scen.sigma.q
        if q == 1:
            cert = ExtensionCertificate(True, "trivial")
        elif fam.p % q == 1:
            cert = ExtensionCertificate(True, "padic-axb")
    elif isinstance(fam, FullAxbFamily):
        if scen.sigma.q == 1:
            cert = ExtensionCertificate(True, "trivial")
    elif isinstance(fam, LamplighterFamily):
        char = scen.sigma
        one_periodic = char.per_len == 1 and all(j == char.per[0] for j in char.pre)
        if all(j == 0 for j in char.pre) and all(j == 0 for j in char.per):
            cert = ExtensionCertificate(True, "trivial")
        elif one_periodic:
            cert = ExtensionCertificate(True, "lamplighter")
    else:
        raise UsageError("unknown family")

    if cert is None:
        witness = next((x for x in ball if not in_B(scen, x)), None)
        return ExtensionCertificate(False, obstruction=witness)

    # verify: homomorphism on ball pairs, restriction to sigma on the H-part
    sample = list(ball)
    for x in sample:
        if in_H(scen, x) and cert.exp(scen, x) != sigma_eval(scen, x):
            raise UsageError("extension rule fails to restrict to sigma")
    for x in sample[::3] or sample:
        for y in sample[::5] or sample:
            lhs = cert.exp(scen, x * y)
            rhs = fr_mod(cert.exp(scen, x) + cert.exp(scen, y), Fr(1))
            if lhs != rhs:
                raise UsageError("extension rule is not a homomorphism")
    return cert


# ---------------------------------------------------------------------------
# lamplighter classification


@dataclass(frozen=True)
class LampBReport:
    verdict: str          # "all-shifts" | "no-nonzero-shift" | "mixed"
    shifts_in_B: tuple
    window: int


def lamplighter_B_classification(scen: HeckeScenario, window: int) -> LampBReport:
    """Decide which shifts |k| <= window meet B.

    B always contains the shift-0 layer.  A one-periodic sequence passes
    every shift; a preperiod that breaks the tail comparison excludes every
    nonzero shift.
    """
    if not isinstance(scen.family, LamplighterFamily):
        raise UsageError("classification applies to the lamplighter family only")
    fam = scen.family
    ok = tuple(k for k in range(-window, window + 1)
               if in_B(scen, fam.element((), k)))
    if set(ok) == set(range(-window, window + 1)):
        return LampBReport("all-shifts", ok, window)
    if set(ok) == {0}:
        return LampBReport("no-nonzero-shift", ok, window)
    return LampBReport("mixed", ok, window)


# ---------------------------------------------------------------------------
# scenario factories


def make_dihedral(sign: bool = True, height: int = 6, name: str = "") -> HeckeScenario:
    fam = DihedralFamily()
    sig = DihedralChar(Fr(1, 2) if sign else Fr(0))
    return HeckeScenario(fam, sig, kernel_descriptor(fam, sig),
                         Bounds(height=height), name=name or "dihedral")


def make_heisenberg(s, t, padic_p: int | None = None, height: int = 2,
                    denominators: tuple = (), name: str = "") -> HeckeScenario:
    s, t = Fr(s), Fr(t)
    fam = HeisenbergFamily(padic_p=padic_p)
    sig = HeisenbergChar(s, t)
    dens = denominators or ((1, s.denominator, t.denominator)
                            if padic_p is None else (1, padic_p, padic_p ** 2))
    return HeckeScenario(fam, sig, kernel_descriptor(fam, sig),
                         Bounds(height=height, depth=2, denominators=tuple(sorted(set(dens)))),
                         name=name or f"heisenberg(s={s},t={t})")


def make_padic_axb(p: int, q: int, height: int = 4, depth: int = 2, shift: int = 4,
                   precision: int = 64, name: str = "") -> HeckeScenario:
    if math.gcd(p, q) != 1:
        raise UsageError("p and q must be coprime")
    fam = PadicAxbFamily(p)
    sig = AxbChar(q)
    return HeckeScenario(fam, sig, kernel_descriptor(fam, sig),
                         Bounds(height=height, depth=depth, shift=shift),
                         precision=precision, name=name or f"padic-axb(p={p},q={q})")


def make_full_axb(n: int, height: int = 8, depth: int = 3, name: str = "") -> HeckeScenario:
    fam = FullAxbFamily()
    sig = AxbChar(n)
    return HeckeScenario(fam, sig, kernel_descriptor(fam, sig),
                         Bounds(height=height, depth=depth),
                         name=name or f"full-axb(n={n})")


def make_lamplighter(f: int, pre: tuple, per: tuple, depth: int = 1, shift: int = 3,
                     name: str = "") -> HeckeScenario:
    fam = LamplighterFamily(f)
    sig = LampChar(f, tuple(j % f for j in pre), tuple(j % f for j in per))
    return HeckeScenario(fam, sig, kernel_descriptor(fam, sig),
                         Bounds(depth=depth, shift=shift),
                         name=name or f"lamplighter(f={f})")


def make_diag_dihedral(exps, height: int = 6, name: str = "") -> HeckeScenario:
    """A dihedral scenario with a diagonal dim > 1 representation."""
    fam = DihedralFamily()
    parts = tuple(DihedralChar(Fr(e)) for e in exps)
    sig = DiagChar(parts)
    kd = DihedralSub("refl", 0) if all(p.exp_b == 0 for p in parts) else DihedralSub("triv")
    return HeckeScenario(fam, sig, kd, Bounds(height=height),
                         name=name or "dihedral-diag")
