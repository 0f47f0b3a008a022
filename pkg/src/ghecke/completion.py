"""Finite-level completion data: topology neighbourhoods, continuity of the
character, finite quotient group algebras with their averaging projections,
the stable-subgroup limit projection, and directedness of the compatible
set.

The quotient machinery is specific to the p-adic ax+b family, where the
normal-part completion is the inverse limit of Z/(q p^n): the level (m, k)
algebra is the exact group algebra of the cyclic group of order q*p^(m*n0+k),
carrying the canonical character as a weight.  Conjugation by compatible
elements moves the averaging projection along a chain that stabilises, at a
level predicted by the stable subgroup, to the limit projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import qadic
from .characters import in_B, kernel_descriptor, sigma_eval
from .groups import (DihedralFamily, FullAxbFamily, GroupElement,
                     HeckeScenario, HeisenbergFamily, LamplighterFamily,
                     PadicAxbFamily, UsageError, fr_mod, in_H)
from .scalars import Cyclo

Fr = Fraction


# ---------------------------------------------------------------------------
# neighbourhoods of the identity in the kernel topology


@dataclass(frozen=True)
class NeighbourhoodBasis:
    conjugators: tuple
    descriptor: object


def neighbourhood(scen: HeckeScenario, F) -> NeighbourhoodBasis:
    """The intersection of y K y^-1 over the finite set F."""
    fam = scen.family
    F = tuple(F)
    if not F:
        raise UsageError("need a non-empty conjugator set")
    D = fam.sub_conj(scen, scen.K_desc, F[0])
    for y in F[1:]:
        D = fam.sub_meet(scen, D, fam.sub_conj(scen, scen.K_desc, y))
    return NeighbourhoodBasis(F, D)


# ---------------------------------------------------------------------------
# continuity of sigma in the plain-pair topology


@dataclass(frozen=True)
class ContinuityReport:
    verdict: str               # "continuous" | "not-continuous" | "no-witness-in-ball"
    witnesses: tuple = ()      # conjugators whose H-intersection sits inside K
    single_conjugate: bool = False
    proof: str = ""


def _h_neighbourhood(scen, F):
    fam = scen.family
    D = fam.H_descriptor()
    for y in F:
        D = fam.sub_meet(scen, D, fam.sub_conj(scen, fam.H_descriptor(), y))
    return D


def sigma_continuity_probe(scen: HeckeScenario, ball) -> ContinuityReport:
    """Search for a plain-pair neighbourhood of the identity inside ker sigma.

    A single conjugate x0 H x0^-1 inside K settles it; otherwise finite
    intersections H ∩ x H x^-1 are tried, and for the two p-restricted
    families a closed-form shape argument certifies failure outright.
    """
    fam = scen.family
    ball = list(ball)

    proof = _shape_obstruction(scen, ball)
    if proof is not None:
        return ContinuityReport("not-continuous", proof=proof)

    candidates = _continuity_candidates(scen) + ball
    for x0 in candidates:
        if fam.sub_contains(scen, scen.K_desc, fam.sub_conj(scen, fam.H_descriptor(), x0)):
            return ContinuityReport("continuous", (x0,), True,
                                    "conjugate of H lies inside the kernel")
    for F in _preferred_neighbourhoods(scen) + \
            [F for r in (1, 2) for F in _tuples(candidates, r)]:
        if fam.sub_contains(scen, scen.K_desc, _h_neighbourhood(scen, F)):
            return ContinuityReport("continuous", tuple(F), False,
                                    "finite conjugate intersection inside the kernel")
    return ContinuityReport("no-witness-in-ball")


def _preferred_neighbourhoods(scen) -> list[tuple]:
    fam, sig = scen.family, scen.sigma
    if isinstance(fam, HeisenbergFamily) and fam.padic_p is None:
        b, d = sig.s.denominator, sig.t.denominator
        return [(fam.element(Fr(0), Fr(1, b), Fr(0)),
                 fam.element(Fr(1, d), Fr(0), Fr(0)))]
    return []


def _tuples(pool, r):
    if r == 1:
        return [(x,) for x in pool]
    return [(x, y) for i, x in enumerate(pool) for y in pool[i + 1:]]


def _continuity_candidates(scen) -> list[GroupElement]:
    fam, sig = scen.family, scen.sigma
    if isinstance(fam, FullAxbFamily):
        return [fam.element(Fr(1), Fr(1, sig.q)), fam.element(Fr(0), Fr(1, sig.q))]
    if isinstance(fam, HeisenbergFamily) and fam.padic_p is None:
        b, d = sig.s.denominator, sig.t.denominator
        return [fam.element(Fr(0), Fr(1, b), Fr(0)), fam.element(Fr(1, d), Fr(0), Fr(0)),
                fam.element(-sig.t, sig.s, Fr(0))]
    if isinstance(fam, DihedralFamily):
        return [fam.element(1, 0)]
    return []


def _shape_obstruction(scen, ball) -> str | None:
    """Closed-form failure certificates for the p-restricted families."""
    fam, sig = scen.family, scen.sigma
    if isinstance(fam, PadicAxbFamily) and sig.q > 1:
        return (f"every conjugate intersection of H has the form p^c*Z with "
                f"p = {fam.p}; containment in {sig.q}Z would force "
                f"{sig.q} | p^c, impossible with gcd(p, q) = 1")
    if isinstance(fam, HeisenbergFamily) and fam.padic_p is not None:
        p = fam.padic_p
        q, r = sig.s.denominator, sig.t.denominator
        if q > 1 or r > 1:
            return (f"any finite intersection of H-conjugates contains "
                    f"(p^c, 0) with p = {p}; the kernel {q}Z x {r}Z never "
                    f"does since gcd(p, qr) = 1")
    if isinstance(fam, LamplighterFamily):
        char = sig
        tail_start = char.pre_len + 1
        if any(char.index_at(i) != 0 for i in range(tail_start, tail_start + char.per_len)):
            return ("every neighbourhood contains a full coordinate tail, but "
                    "the character sequence stays nontrivial along it")
    return None


# ---------------------------------------------------------------------------
# finite quotient algebras (p-adic ax+b)


@dataclass(frozen=True)
class FiniteQuotientAlgebra:
    """Exact group algebra of Z/(q*p^(m*n0+k)), the level-(m, k) quotient of
    the scaled normal-part completion, weighted by the canonical character
    e((c mod q)/q) on subgroup images."""
    p: int
    q: int
    n0: int
    m: int
    k: int

    @property
    def order(self) -> int:
        return self.q * self.p ** (self.m * self.n0 + self.k)

    def conv(self, u: dict, v: dict) -> dict:
        out: dict[int, Cyclo] = {}
        n = self.order
        for c1, a in u.items():
            for c2, b in v.items():
                c = (c1 + c2) % n
                t = a * b
                out[c] = out[c] + t if c in out else t
        return {c: a for c, a in out.items() if not a.is_zero()}

    def star(self, u: dict) -> dict:
        n = self.order
        return {(-c) % n: a.conj() for c, a in u.items()}

    def eq(self, u: dict, v: dict) -> bool:
        u = {c: a for c, a in u.items() if not a.is_zero()}
        v = {c: a for c, a in v.items() if not a.is_zero()}
        return set(u) == set(v) and all(u[c] == v[c] for c in u)

    def weight(self, c: int) -> Cyclo:
        return Cyclo.root_of_unity(Fr(c % self.q, self.q))

    def weighted_average(self, step_exp: int) -> dict:
        """The weighted indicator of the subgroup p^step_exp * Z/order,
        normalised to a projection (step_exp counted above m*n0)."""
        step = self.p ** (self.m * self.n0 + step_exp)
        if self.order % step != 0:
            raise UsageError("subgroup not representable at this level")
        size = self.order // step
        coeff = Fr(1, size)
        return {c: self.weight(c).scale(coeff) for c in range(0, self.order, step)}

    def is_projection(self, u: dict) -> bool:
        return self.eq(self.conv(u, u), u) and self.eq(self.star(u), u)


def quotient_algebra(scen: HeckeScenario, m: int, k: int) -> FiniteQuotientAlgebra:
    fam = scen.family
    if not isinstance(fam, PadicAxbFamily):
        raise UsageError("quotient algebras are built for the p-adic ax+b family")
    if m < 0 or k < 0:
        raise UsageError("levels must be nonnegative")
    return FiniteQuotientAlgebra(fam.p, scen.sigma.q, qadic.n0(fam.p, scen.sigma.q), m, k)


def b_plus_orientation(scen: HeckeScenario) -> int:
    """The sign of shift exponents whose conjugate of H contains H.

    Computed from the definition; reported rather than assumed, since it
    depends on the product convention."""
    fam = scen.family
    if not isinstance(fam, (PadicAxbFamily, LamplighterFamily)):
        raise UsageError("shift orientation applies to shift-extension families")
    H = fam.H_descriptor()
    for sign in (-1, 1):
        x = fam.element(Fr(0), sign) if isinstance(fam, PadicAxbFamily) \
            else fam.element((), sign)
        if fam.sub_contains(scen, fam.sub_conj(scen, H, x), H):
            return sign
    raise UsageError("no expanding shift direction found")


def in_B_plus(scen: HeckeScenario, x: GroupElement) -> bool:
    fam = scen.family
    H = fam.H_descriptor()
    return in_B(scen, x) and fam.sub_contains(scen, fam.sub_conj(scen, H, x), H)


def p_sigma_projection(scen: HeckeScenario, x: GroupElement, m: int, k: int) -> dict:
    """The conjugate averaging projection x^-1 p x at level (m, k).

    x must be compatible and its conjugate of the subgroup representable in
    the quotient: the conjugation depth J (a multiple of n0) must satisfy
    -m*n0 <= J <= k.
    """
    alg = quotient_algebra(scen, m, k)
    if not in_B(scen, x):
        raise UsageError("projection chain needs compatible elements")
    J = _conj_depth(scen, x)
    if J % alg.n0 != 0:
        raise UsageError("conjugation depth must be a multiple of n0")
    if J > k or J < -m * alg.n0:
        raise UsageError("subgroup not representable at this level")
    return alg.weighted_average(J)


def _conj_depth(scen: HeckeScenario, x: GroupElement) -> int:
    """J with x^-1 (subgroup) x = p^J (subgroup) in the completion."""
    sign = b_plus_orientation(scen)
    k_x = x.coords[1]
    # expanding direction (sign) gives shrinking conjugates of depth |k_x|
    return -k_x if sign < 0 else k_x


def p_sigma_infinity(scen: HeckeScenario, m: int, k: int) -> dict:
    """The weighted average over the image of the stable subgroup: the
    largest element of every representable projection chain."""
    alg = quotient_algebra(scen, m, k)
    z0c = qadic.z0(alg.p, alg.q, alg.m * alg.n0 + alg.k).head % alg.order
    out: dict[int, Cyclo] = {}
    for j in range(alg.q):
        c = j * z0c % alg.order
        out[c] = Cyclo.root_of_unity(Fr(j, alg.q)).scale(Fr(1, alg.q))
    return {c: a for c, a in out.items() if not a.is_zero()}


@dataclass(frozen=True)
class StabilizationReport:
    m: int
    k: int
    algebra_order: int
    chain_depths: tuple
    stabilized_at: int
    predicted_at: int
    ordering_ok: bool
    limit_absorbs: bool

    @property
    def passed(self) -> bool:
        return self.stabilized_at == self.predicted_at and self.ordering_ok \
            and self.limit_absorbs


def stabilization_report(scen: HeckeScenario, m: int, k: int) -> StabilizationReport:
    """Walk the projection chain along powers of the expanding generator and
    locate where it becomes the limit projection.

    The quotient kills the deep part below level k, so the chain must become
    constant exactly once the conjugate subgroup image equals the stable
    subgroup image, at depth ceil(k / n0) steps.
    """
    alg = quotient_algebra(scen, m, k)
    sign = b_plus_orientation(scen)
    fam = scen.family
    p_inf = p_sigma_infinity(scen, m, k)
    p_prev = None
    ordering_ok = True
    stabilized_at = None
    depths = []
    for j in range(0, k // alg.n0 + 1):
        x = fam.element(Fr(0), sign * j * alg.n0)
        u = p_sigma_projection(scen, x, m, k)
        depths.append(j * alg.n0)
        if not alg.is_projection(u):
            raise UsageError("chain element is not a projection; broken algebra")
        if p_prev is not None and not alg.eq(alg.conv(u, p_prev), p_prev):
            ordering_ok = False
        if stabilized_at is None and alg.eq(u, p_inf):
            stabilized_at = j
        p_prev = u
    predicted = -(-k // alg.n0)  # ceil
    p0 = p_sigma_projection(scen, fam.identity(), m, k)
    limit_absorbs = alg.eq(alg.conv(p_inf, p0), p0)
    return StabilizationReport(m, k, alg.order, tuple(depths),
                               stabilized_at if stabilized_at is not None else -1,
                               predicted, ordering_ok, limit_absorbs)


# ---------------------------------------------------------------------------
# directedness


@dataclass(frozen=True)
class DirectednessReport:
    applicable: bool
    checked: int
    failures: tuple
    witnesses: dict

    @property
    def passed(self) -> bool:
        return self.applicable and not self.failures


def directedness_probe(scen: HeckeScenario, ball) -> DirectednessReport:
    """Exhibit b = x^-1 y with expanding-compatible x, y for every b in the
    compatible part of the ball; families without that factorisation get the
    unfactorable elements listed."""
    fam = scen.family
    b_elems = [x for x in ball if in_B(scen, x)]
    witnesses = {}
    failures = []
    for b in b_elems:
        pair = _factor_in_b_plus(scen, b)
        if pair is None:
            failures.append(b)
            continue
        x, y = pair
        if not (in_B_plus(scen, x) and in_B_plus(scen, y) and x.inv() * y == b):
            raise UsageError("factorisation postcondition failed; construction bug")
        witnesses[b] = pair
    return DirectednessReport(True, len(b_elems), tuple(failures), witnesses)


def _factor_in_b_plus(scen: HeckeScenario, b: GroupElement):
    fam = scen.family
    if in_B_plus(scen, b):
        return fam.identity(), b
    if isinstance(fam, (PadicAxbFamily, LamplighterFamily)):
        # cancel the shift with an expanding element of the opposite shift
        kk = b.coords[1]
        x = fam.element(Fr(0), -kk) if isinstance(fam, PadicAxbFamily) \
            else fam.element((), -kk)
        y = x * b
        if in_B_plus(scen, x) and in_B_plus(scen, y):
            return x, y
        return None
    if isinstance(fam, FullAxbFamily):
        r, t = b.coords
        u, v = t.numerator, t.denominator
        n = scen.sigma.q
        if n > 1 and math.gcd(u, n) != 1:
            return None
        lam = pow(u, -1, n) if n > 1 else 1
        x = fam.element(Fr(0), Fr(lam * v))
        y = fam.element(r, Fr(lam * u))
        if in_B_plus(scen, x) and in_B_plus(scen, y):
            return x, y
        return None
    # generic fallback: scan expanding pairs inside the ball
    from .groups import ball as make_ball
    pool = [x for x in make_ball(scen) if in_B_plus(scen, x)]
    for x in pool:
        y = x * b
        if in_B_plus(scen, y):
            return x, y
    return None
