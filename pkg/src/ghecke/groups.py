"""Group families, canonical forms, and subgroup-lattice combinatorics.

Five concretely presented families are supported.  Elements are immutable
and always canonical; each family ships a closed lattice of the subgroup
shapes that arise from conjugating H (or the character kernel K), so every
index, intersection and transversal is computed in closed form rather than
by word enumeration.

Coordinate conventions (fixed once, all other modules inherit them):

* dihedral        -- (m, e) for a^m b^e,  b a b = a^-1.
* heisenberg      -- [u, v, w] with multiplication
                     [u1,v1,w1][u2,v2,w2] = [u1+u2, v1+v2, w1+w2+v1*u2],
                     u, v rational, w rational mod 1.
* padic-axb       -- (b, k) for (b, p^k); (b,k)(b',k') = (b + p^k b', k+k').
                     Conjugation by (b, k) scales the normal part by p^k.
* full-axb        -- (b, t), t > 0 rational, composed like the matrices
                     [[1, b], [0, t]]:  (b,t)(b',t') = (b' + b t', t t').
                     Conjugation by (b, t) scales the normal part by 1/t.
* lamplighter     -- (y, k): y a finitely supported map Z -> Z/f stored as a
                     sorted tuple of (position, value), k the shift.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

Fr = Fraction


class GhkError(Exception):
    pass


class UsageError(GhkError):
    """Mismatched families, malformed coordinates, and similar caller bugs."""


class DomainError(GhkError):
    """An argument outside the mathematical domain of the operation."""


def fr_mod(x: Fraction, m: Fraction) -> Fraction:
    """x mod m for positive rational m, result in [0, m)."""
    q = x / m
    return x - (q.numerator // q.denominator) * m


def lcm_frac(a: Fraction, b: Fraction) -> Fraction:
    """Generator of aZ ∩ bZ for positive rationals a, b."""
    d = a.denominator * b.denominator
    return Fr(math.lcm(a.numerator * b.denominator, b.numerator * a.denominator), d)


def denominator_exponent(x: Fraction, p: int) -> int:
    """Exponent e with p^e the p-part of the denominator of x."""
    d = x.denominator
    e = 0
    while d % p == 0:
        d //= p
        e += 1
    if d != 1:
        raise UsageError(f"{x} has a denominator prime other than {p}")
    return e


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True)
class GroupElement:
    family: "Family"
    coords: tuple

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        if not isinstance(other, GroupElement):
            return NotImplemented
        if self.family != other.family:
            raise UsageError("cannot multiply elements of different families")
        return GroupElement(self.family, self.family.mul_coords(self.coords, other.coords))

    def inv(self) -> "GroupElement":
        return GroupElement(self.family, self.family.inv_coords(self.coords))

    def __repr__(self):
        return self.family.show(self.coords)


def multiply(x: GroupElement, y: GroupElement) -> GroupElement:
    return x * y


def invert(x: GroupElement) -> GroupElement:
    return x.inv()


def canonicalize(family: "Family", coords) -> GroupElement:
    """Validate raw coordinates and return the canonical element."""
    return GroupElement(family, family.canon_coords(coords))


# ---------------------------------------------------------------------------
# integer 2x2 lattice helpers (for the Heisenberg family)


def _hnf2(gens: list[tuple[int, int]]) -> tuple[tuple[int, int], tuple[int, int]]:
    """Canonical basis ((g1, e), (0, g2)) of the finite-index sublattice of Z^2
    generated by gens; requires the generated lattice to have full rank."""
    vs = [(int(a), int(b)) for a, b in gens if (a, b) != (0, 0)]
    if not vs:
        raise UsageError("rank-deficient lattice")
    # clear first column by gcd steps
    while sum(1 for a, _ in vs if a != 0) > 1:
        vs.sort(key=lambda v: (v[0] == 0, abs(v[0])))
        (a0, b0) = vs[0]
        assert a0 != 0
        vs = [vs[0]] + [(a - (a // a0) * a0, b - (a // a0) * b0) if a0 != 0 else (a, b)
                        for a, b in vs[1:]]
        vs = [v for v in vs if v != (0, 0)]
    firsts = [v for v in vs if v[0] != 0]
    rest = [v for v in vs if v[0] == 0]
    if not firsts or not rest:
        raise UsageError("rank-deficient lattice")
    v1 = firsts[0]
    if v1[0] < 0:
        v1 = (-v1[0], -v1[1])
    g2 = math.gcd(*[abs(b) for _, b in rest])
    e = v1[1] % g2
    return ((v1[0], e), (0, g2))


@lru_cache(maxsize=None)
def congruence_lattice(alpha: Fraction, beta: Fraction) -> tuple:
    """HNF basis of {(m, n) in Z^2 : alpha*m + beta*n in Z}."""
    c = math.lcm(alpha.denominator, beta.denominator)
    if c == 1:
        return ((1, 0), (0, 1))
    a = int(alpha * c) % c
    b = int(beta * c) % c
    gens = [(c, 0), (0, c)]
    # solutions of a*m + b*n = 0 mod c, scanned over one period
    for m in range(c):
        am = (a * m) % c
        for n in range(c):
            if (am + b * n) % c == 0:
                gens.append((m, n))
    return _hnf2(gens)


@lru_cache(maxsize=None)
def lattice_meet(rows1: tuple, rows2: tuple) -> tuple:
    """HNF basis of the intersection of two finite-index sublattices of Z^2."""
    (a, b), (zc, d) = rows2
    period = a * d  # index of rows2; period * Z^2 is inside rows2
    v1, v2 = rows1
    gens = [(period * v1[0], period * v1[1]), (period * v2[0], period * v2[1])]
    for m in range(period):
        for n in range(period):
            x = (m * v1[0] + n * v2[0], m * v1[1] + n * v2[1])
            if _lattice_member(rows2, x):
                gens.append(x)
    return _hnf2(gens)


def _lattice_member(rows: tuple, v: tuple[int, int]) -> bool:
    (g1, e), (_, g2) = rows
    m, n = v
    if m % g1 != 0:
        return False
    t = m // g1
    return (n - t * e) % g2 == 0


def _lattice_index(rows: tuple) -> int:
    return rows[0][0] * rows[1][1]


def _lattice_transversal(rows: tuple):
    (g1, _), (_, g2) = rows
    return [(i, j) for i in range(g1) for j in range(g2)]


# ---------------------------------------------------------------------------
# subgroup descriptors


@dataclass(frozen=True)
class DihedralSub:
    """Either the trivial subgroup or {e, a^j b}."""
    kind: str  # "triv" | "refl"
    j: int = 0


@dataclass(frozen=True)
class HLat:
    """{[m, n, alpha*m + beta*n mod 1] : (m, n) in the row lattice}.

    Conjugation changes only the twist (alpha, beta); intersections impose
    a twist-agreement congruence on the lattice part.
    """
    rows: tuple
    twist: tuple  # (alpha, beta), rationals mod 1


@dataclass(frozen=True)
class NLat:
    """r*Z inside the normal rational line of an ax+b-type family."""
    r: Fraction


@dataclass(frozen=True)
class LTail:
    """{y : supp(y) >= start} cut down by shifted coordinate-sum characters.

    A shift s stands for the condition  prod_m sigma_(m-s)(y_m) = 1, with
    the character sequence read from the ambient scenario.
    """
    start: int
    shifts: frozenset = frozenset()


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class Family:
    def identity(self) -> GroupElement:
        return GroupElement(self, self.identity_coords())

    def element(self, *coords) -> GroupElement:
        return GroupElement(self, self.canon_coords(tuple(coords)))

    # family-specific cores are provided by subclasses
    def show(self, coords) -> str:  # pragma: no cover - overridden
        return f"{coords}"


@dataclass(frozen=True)
class DihedralFamily(Family):
    name: str = "dihedral"

    def identity_coords(self):
        return (0, 0)

    def canon_coords(self, c):
        m, e = c
        if e not in (0, 1):
            raise UsageError("dihedral flip must be 0 or 1")
        return (int(m), int(e))

    def mul_coords(self, a, b):
        m, e = a
        n, d = b
        return (m + (n if e == 0 else -n), (e + d) % 2)

    def inv_coords(self, a):
        m, e = a
        return (-m, 0) if e == 0 else (m, 1)

    def in_H(self, x: GroupElement) -> bool:
        return x.coords[0] == 0

    def H_descriptor(self):
        return DihedralSub("refl", 0)

    def sub_member(self, scen, D, x: GroupElement) -> bool:
        m, e = x.coords
        if (m, e) == (0, 0):
            return True
        if D.kind == "triv":
            return False
        return e == 1 and m == D.j

    def sub_conj(self, scen, D, x: GroupElement):
        if D.kind == "triv":
            return D
        m, e = x.coords
        return DihedralSub("refl", D.j + 2 * m if e == 0 else 2 * m - D.j)

    def sub_meet(self, scen, D1, D2):
        if D1 == D2:
            return D1
        return DihedralSub("triv")

    def sub_contains(self, scen, D1, D2) -> bool:
        return D2.kind == "triv" or D1 == D2

    def sub_index(self, scen, Dsub, Dsup) -> int:
        size = {"triv": 1, "refl": 2}
        if not self.sub_contains(scen, Dsup, Dsub):
            raise UsageError("index of a non-subgroup")
        return size[Dsup.kind] // size[Dsub.kind]

    def sub_gens(self, scen, D):
        if D.kind == "triv":
            return []
        return [GroupElement(self, (D.j, 1))]

    def sub_is_trivial(self, D) -> bool:
        return D.kind == "triv"

    def transversal_in_H(self, scen, D):
        if D.kind == "refl":
            return [self.identity()]
        return [self.identity(), GroupElement(self, (0, 1))]

    def coset_canon_coords(self, c):
        return (c[0], 0)

    def dcoset_canon_coords(self, c):
        return (abs(c[0]), 0)

    def show(self, c):
        m, e = c
        parts = []
        if m:
            parts.append(f"a^{m}" if m != 1 else "a")
        if e:
            parts.append("b")
        return "*".join(parts) or "e"


@dataclass(frozen=True)
class HeisenbergFamily(Family):
    """Rational Heisenberg coordinates; padic_p restricts denominators to
    powers of that prime (and w to such fractions mod 1)."""
    padic_p: int | None = None
    name: str = "heisenberg"

    def identity_coords(self):
        return (Fr(0), Fr(0), Fr(0))

    def canon_coords(self, c):
        u, v, w = (Fr(t) for t in c)
        w = fr_mod(w, Fr(1))
        if self.padic_p is not None:
            for t in (u, v, w):
                denominator_exponent(t, self.padic_p)
        return (u, v, w)

    def mul_coords(self, a, b):
        u1, v1, w1 = a
        u2, v2, w2 = b
        return (u1 + u2, v1 + v2, fr_mod(w1 + w2 + v1 * u2, Fr(1)))

    def inv_coords(self, a):
        u, v, w = a
        return (-u, -v, fr_mod(-w + v * u, Fr(1)))

    def in_H(self, x) -> bool:
        u, v, w = x.coords
        return u.denominator == 1 and v.denominator == 1 and w == 0

    def H_descriptor(self):
        return HLat(((1, 0), (0, 1)), (Fr(0), Fr(0)))

    def sub_member(self, scen, D, x) -> bool:
        u, v, w = x.coords
        if u.denominator != 1 or v.denominator != 1:
            return False
        m, n = int(u), int(v)
        if not _lattice_member(D.rows, (m, n)):
            return False
        alpha, beta = D.twist
        return fr_mod(alpha * m + beta * n, Fr(1)) == w

    def sub_conj(self, scen, D, x):
        u, v, _ = x.coords
        alpha, beta = D.twist
        return HLat(D.rows, (fr_mod(alpha + v, Fr(1)), fr_mod(beta - u, Fr(1))))

    def sub_meet(self, scen, D1, D2):
        da = fr_mod(D1.twist[0] - D2.twist[0], Fr(1))
        db = fr_mod(D1.twist[1] - D2.twist[1], Fr(1))
        rows = lattice_meet(lattice_meet(D1.rows, D2.rows), congruence_lattice(da, db))
        return HLat(rows, D1.twist)

    def sub_contains(self, scen, D1, D2) -> bool:
        for (m, n) in D2.rows:
            w = fr_mod(D2.twist[0] * m + D2.twist[1] * n, Fr(1))
            if not self.sub_member(scen, D1, GroupElement(self, (Fr(m), Fr(n), w))):
                return False
        return True

    def sub_index(self, scen, Dsub, Dsup) -> int:
        if not self.sub_contains(scen, Dsup, Dsub):
            raise UsageError("index of a non-subgroup")
        return _lattice_index(Dsub.rows) // _lattice_index(Dsup.rows)

    def sub_gens(self, scen, D):
        out = []
        for (m, n) in D.rows:
            w = fr_mod(D.twist[0] * m + D.twist[1] * n, Fr(1))
            out.append(GroupElement(self, (Fr(m), Fr(n), w)))
        return out

    def sub_is_trivial(self, D) -> bool:
        return False  # full-rank lattices are never trivial

    def transversal_in_H(self, scen, D):
        return [GroupElement(self, (Fr(i), Fr(j), Fr(0)))
                for i, j in _lattice_transversal(D.rows)]

    def coset_canon_coords(self, c):
        u, v, w = c
        m0 = -(u.numerator // u.denominator)
        return (u + m0, fr_mod(v, Fr(1)), fr_mod(w + v * m0, Fr(1)))

    def dcoset_canon_coords(self, c):
        u, v, w = c
        L = math.lcm(u.denominator, v.denominator)
        return (fr_mod(u, Fr(1)), fr_mod(v, Fr(1)), fr_mod(w, Fr(1, L)))

    def show(self, c):
        return f"[{c[0]},{c[1]},{c[2]}]"


@dataclass(frozen=True)
class PadicAxbFamily(Family):
    p: int = 2
    name: str = "padic-axb"

    def identity_coords(self):
        return (Fr(0), 0)

    def canon_coords(self, c):
        b, k = Fr(c[0]), int(c[1])
        denominator_exponent(b, self.p)
        return (b, k)

    def mul_coords(self, a, b):
        b1, k1 = a
        b2, k2 = b
        return (b1 + Fr(self.p) ** k1 * b2, k1 + k2)

    def inv_coords(self, a):
        b, k = a
        return (-(Fr(self.p) ** (-k)) * b, -k)

    def in_H(self, x) -> bool:
        b, k = x.coords
        return k == 0 and b.denominator == 1

    def H_descriptor(self):
        return NLat(Fr(1))

    def _conj_factor(self, x) -> Fraction:
        return Fr(self.p) ** x.coords[1]

    def sub_member(self, scen, D, x) -> bool:
        b, k = x.coords
        return k == 0 and (b / D.r).denominator == 1

    def sub_conj(self, scen, D, x):
        return NLat(D.r * self._conj_factor(x))

    def sub_meet(self, scen, D1, D2):
        return NLat(lcm_frac(D1.r, D2.r))

    def sub_contains(self, scen, D1, D2) -> bool:
        return (D2.r / D1.r).denominator == 1

    def sub_index(self, scen, Dsub, Dsup):
        q = Dsub.r / Dsup.r
        if q.denominator != 1:
            raise UsageError("index of a non-subgroup")
        return q.numerator

    def sub_gens(self, scen, D):
        return [GroupElement(self, (D.r, 0))]

    def sub_is_trivial(self, D) -> bool:
        return False

    def transversal_in_H(self, scen, D):
        n = self.sub_index(scen, D, self.H_descriptor())
        return [GroupElement(self, (Fr(j), 0)) for j in range(n)]

    def coset_canon_coords(self, c):
        b, k = c
        return (fr_mod(b, Fr(self.p) ** k), k)

    def dcoset_canon_coords(self, c):
        b, k = c
        return (fr_mod(b, Fr(self.p) ** min(0, k)), k)

    def show(self, c):
        return f"({c[0]},{self.p}^{c[1]})"


@dataclass(frozen=True)
class FullAxbFamily(Family):
    name: str = "full-axb"

    def identity_coords(self):
        return (Fr(0), Fr(1))

    def canon_coords(self, c):
        b, t = Fr(c[0]), Fr(c[1])
        if t <= 0:
            raise UsageError("scaling part must be positive")
        return (b, t)

    def mul_coords(self, a, b):
        b1, t1 = a
        b2, t2 = b
        return (b2 + b1 * t2, t1 * t2)

    def inv_coords(self, a):
        b, t = a
        return (-b / t, 1 / t)

    def in_H(self, x) -> bool:
        b, t = x.coords
        return t == 1 and b.denominator == 1

    def H_descriptor(self):
        return NLat(Fr(1))

    def _conj_factor(self, x) -> Fraction:
        return 1 / x.coords[1]

    def sub_member(self, scen, D, x) -> bool:
        b, t = x.coords
        return t == 1 and (b / D.r).denominator == 1

    sub_conj = PadicAxbFamily.sub_conj
    sub_meet = PadicAxbFamily.sub_meet
    sub_contains = PadicAxbFamily.sub_contains
    sub_index = PadicAxbFamily.sub_index

    def sub_gens(self, scen, D):
        return [GroupElement(self, (D.r, Fr(1)))]

    def sub_is_trivial(self, D) -> bool:
        return False

    def transversal_in_H(self, scen, D):
        n = self.sub_index(scen, D, self.H_descriptor())
        return [GroupElement(self, (Fr(j), Fr(1))) for j in range(n)]

    def coset_canon_coords(self, c):
        b, t = c
        return (fr_mod(b, Fr(1)), t)

    def dcoset_canon_coords(self, c):
        b, t = c
        return (fr_mod(b, Fr(1, t.denominator)), t)

    def show(self, c):
        return f"({c[0]},{c[1]})"


@dataclass(frozen=True)
class LamplighterFamily(Family):
    """Wreath-type family over the cyclic group Z/f."""
    f: int = 2
    name: str = "lamplighter"

    def identity_coords(self):
        return ((), 0)

    def canon_coords(self, c):
        supp, k = c
        supp = tuple(sorted((int(p), int(v) % self.f) for p, v in supp))
        supp = tuple((p, v) for p, v in supp if v != 0)
        if len({p for p, _ in supp}) != len(supp):
            raise UsageError("duplicate positions in support")
        return (supp, int(k))

    def _add(self, s1, s2, shift: int):
        acc = dict(s1)
        for p, v in s2:
            acc[p + shift] = (acc.get(p + shift, 0) + v) % self.f
        return tuple(sorted((p, v) for p, v in acc.items() if v))

    def mul_coords(self, a, b):
        y1, k1 = a
        y2, k2 = b
        return (self._add(y1, y2, k1), k1 + k2)

    def inv_coords(self, a):
        y, k = a
        return (tuple(sorted((p - k, (-v) % self.f) for p, v in y)), -k)

    def in_H(self, x) -> bool:
        y, k = x.coords
        return k == 0 and all(p >= 1 for p, _ in y)

    def H_descriptor(self):
        return LTail(1)

    def sub_member(self, scen, D, x) -> bool:
        y, k = x.coords
        if k != 0 or any(p < D.start for p, _ in y):
            return False
        char = scen.sigma
        return all(char.shifted_sum(y, s) % char.f == 0 for s in D.shifts)

    def sub_conj(self, scen, D, x):
        k = x.coords[1]
        return LTail(D.start + k, frozenset(s + k for s in D.shifts))

    def sub_meet(self, scen, D1, D2):
        return LTail(max(D1.start, D2.start), D1.shifts | D2.shifts)

    def _char_vectors(self, scen, start: int, shifts):
        """Coefficient vectors of the shifted characters over a window of
        positions that determines them (periodic beyond it)."""
        char = scen.sigma
        smax = max(shifts, default=0)
        bound = max(smax + char.pre_len, start) + char.per_len
        positions = list(range(start, bound + 1))
        return positions, [tuple(char.index_at(n - s) for n in positions) for s in sorted(shifts)]

    def _span(self, vectors, length):
        f = self.f
        seen = {tuple([0] * length)}
        frontier = list(seen)
        while frontier:
            nxt = []
            for base in frontier:
                for v in vectors:
                    cand = tuple((a + b) % f for a, b in zip(base, v))
                    if cand not in seen:
                        seen.add(cand)
                        nxt.append(cand)
            frontier = nxt
        return seen

    def sub_contains(self, scen, D1, D2) -> bool:
        if D1.start > D2.start:
            return False
        allshifts = D1.shifts | D2.shifts
        positions, _ = self._char_vectors(scen, D2.start, allshifts)
        char = scen.sigma
        vec = {s: tuple(char.index_at(n - s) for n in positions) for s in allshifts}
        span = self._span([vec[s] for s in D2.shifts], len(positions))
        return all(vec[s] in span for s in D1.shifts)

    def _relative_index(self, scen, D, ref_start: int) -> int:
        positions, vectors = self._char_vectors(scen, D.start, D.shifts)
        image = self._span([tuple(v[i] for v in vectors) for i in range(len(positions))],
                           len(vectors)) if vectors else {()}
        return self.f ** (D.start - ref_start) * len(image)

    def sub_index(self, scen, Dsub, Dsup):
        if not self.sub_contains(scen, Dsup, Dsub):
            raise UsageError("index of a non-subgroup")
        ref = min(Dsub.start, Dsup.start)
        num = self._relative_index(scen, Dsub, ref)
        den = self._relative_index(scen, Dsup, ref)
        assert num % den == 0
        return num // den

    def sub_gens(self, scen, D):
        char = scen.sigma
        bound = max(max(D.shifts, default=0) + char.pre_len, D.start) + char.per_len
        return [GroupElement(self, (((n, 1),), 0)) for n in range(D.start, bound + 1)]

    def sub_is_trivial(self, D) -> bool:
        return False

    def transversal_in_H(self, scen, D):
        if D.shifts:
            raise UsageError("transversal only for plain tail subgroups")
        positions = range(1, D.start)
        out = []
        for vals in itertools.product(range(self.f), repeat=len(positions)):
            supp = tuple((p, v) for p, v in zip(positions, vals) if v)
            out.append(GroupElement(self, (supp, 0)))
        return out

    def coset_canon_coords(self, c):
        y, k = c
        return (tuple((p, v) for p, v in y if p < 1 + k), k)

    def dcoset_canon_coords(self, c):
        y, k = c
        return (tuple((p, v) for p, v in y if p < 1 + min(0, k)), k)

    def show(self, c):
        y, k = c
        return f"(({','.join(f'{p}:{v}' for p, v in y)}),shift {k})"


# ---------------------------------------------------------------------------
# scenario


@dataclass(frozen=True)
class Bounds:
    """Family-interpreted ball and window sizes (see each family's ball)."""
    height: int = 4
    depth: int = 2
    shift: int = 3
    window_shift: int = 2
    window_depth: int = 2
    denominators: tuple = ()


@dataclass(frozen=True)
class HeckeScenario:
    """A presented pair with a fixed finite-range character of H."""
    family: Family
    sigma: object
    K_desc: object
    bounds: Bounds
    precision: int = 64
    name: str = ""

    @property
    def H_desc(self):
        return self.family.H_descriptor()

    @property
    def dim(self) -> int:
        return self.sigma.dim

    def identity(self) -> GroupElement:
        return self.family.identity()


def in_H(scen: HeckeScenario, x: GroupElement) -> bool:
    return scen.family.in_H(x)


@lru_cache(maxsize=None)
def subgroup_Hx(scen: HeckeScenario, x: GroupElement):
    """H ∩ xHx^-1 as a descriptor plus generators enough to evaluate any
    finite-range character on it."""
    fam = scen.family
    D = fam.sub_meet(scen, fam.H_descriptor(), fam.sub_conj(scen, fam.H_descriptor(), x))
    return D, fam.sub_gens(scen, D)


@lru_cache(maxsize=None)
def index_L(scen: HeckeScenario, x: GroupElement) -> int:
    D, _ = subgroup_Hx(scen, x)
    return scen.family.sub_index(scen, D, scen.family.H_descriptor())


@lru_cache(maxsize=None)
def coset_reps(scen: HeckeScenario, x: GroupElement) -> tuple:
    """Representatives of HxH/H, exactly index_L(x) of them."""
    D, _ = subgroup_Hx(scen, x)
    return tuple(t * x for t in scen.family.transversal_in_H(scen, D))


@lru_cache(maxsize=None)
def _sub_L(scen: HeckeScenario, D, x: GroupElement) -> int:
    fam = scen.family
    meet = fam.sub_meet(scen, D, fam.sub_conj(scen, D, x))
    return fam.sub_index(scen, meet, D)


def modular_delta(scen: HeckeScenario, x: GroupElement, relative_to=None) -> Fraction:
    """L(x)/L(x^-1) computed against H or any given compact-open-type
    descriptor; the value does not depend on that choice."""
    D = relative_to if relative_to is not None else scen.H_desc
    return Fr(_sub_L(scen, D, x), _sub_L(scen, D, x.inv()))


@lru_cache(maxsize=None)
def double_coset_canonical(scen: HeckeScenario, x: GroupElement) -> GroupElement:
    return GroupElement(scen.family, scen.family.dcoset_canon_coords(x.coords))


@lru_cache(maxsize=None)
def coset_canonical(scen: HeckeScenario, x: GroupElement) -> GroupElement:
    return GroupElement(scen.family, scen.family.coset_canon_coords(x.coords))


# ---------------------------------------------------------------------------
# reducedness probe


@dataclass(frozen=True)
class ReducednessReport:
    intersection: object
    is_trivial: bool
    still_shrinking: bool
    witness: GroupElement | None

    @property
    def passed(self) -> bool:
        return self.is_trivial or self.still_shrinking


def reducedness_probe(scen: HeckeScenario, ball) -> ReducednessReport:
    """Intersect x K x^-1 over the ball and classify the result.

    The intersection is trivial, provably still shrinking (a further
    conjugator strictly cuts it down), or certified stuck, in which case a
    non-identity member is returned as the failure witness.
    """
    fam = scen.family
    ball = list(ball)
    if not ball:
        raise UsageError("reducedness probe needs a non-empty ball")
    D = fam.sub_conj(scen, scen.K_desc, ball[0])
    for x in ball[1:]:
        D = fam.sub_meet(scen, D, fam.sub_conj(scen, scen.K_desc, x))
    if fam.sub_is_trivial(D):
        return ReducednessReport(D, True, False, None)
    gens = fam.sub_gens(scen, D)
    if all(fam.in_H(g) and g == scen.identity() for g in gens):
        return ReducednessReport(D, True, False, None)
    for y in shrink_candidates(scen, len(ball) + 4):
        D2 = fam.sub_meet(scen, D, fam.sub_conj(scen, scen.K_desc, y))
        if fam.sub_contains(scen, D, D2) and not fam.sub_contains(scen, D2, D):
            return ReducednessReport(D, False, True, None)
    witness = next((g for g in gens if g != scen.identity()), None)
    return ReducednessReport(D, False, False, witness)


def shrink_candidates(scen: HeckeScenario, level: int):
    """Conjugators that keep cutting the kernel intersection down."""
    fam = scen.family
    if isinstance(fam, DihedralFamily):
        return [fam.element(m, 0) for m in range(1, level + 1)]
    if isinstance(fam, HeisenbergFamily):
        base = fam.padic_p or 2
        return [fam.element(Fr(1, base ** j), Fr(0), Fr(0)) for j in range(1, level + 1)] + \
               [fam.element(Fr(0), Fr(1, base ** j), Fr(0)) for j in range(1, level + 1)]
    if isinstance(fam, PadicAxbFamily):
        return [fam.element(Fr(0), k) for k in range(1, level + 1)]
    if isinstance(fam, FullAxbFamily):
        return [fam.element(Fr(0), Fr(pr)) for pr in (2, 3, 5, 7, 11, 13)[:level]]
    if isinstance(fam, LamplighterFamily):
        return [fam.element((), k) for k in range(1, level + 1)]
    raise UsageError("unknown family")


# ---------------------------------------------------------------------------
# balls and windows


def ball(scen: HeckeScenario) -> list[GroupElement]:
    """A deterministic finite sample of canonical elements, sized by bounds."""
    fam, b = scen.family, scen.bounds
    out: list[GroupElement] = []
    if isinstance(fam, DihedralFamily):
        for m in range(-b.height, b.height + 1):
            for e in (0, 1):
                out.append(fam.element(m, e))
    elif isinstance(fam, HeisenbergFamily):
        dens = b.denominators or (1, 2, 3, 6)
        vals = sorted({Fr(n, d) for d in dens for n in range(-b.height, b.height + 1)})
        wvals = sorted({fr_mod(v, Fr(1)) for v in vals})
        for u in vals:
            for v in vals:
                for w in wvals[: b.depth + 1]:
                    out.append(fam.element(u, v, w))
    elif isinstance(fam, PadicAxbFamily):
        p = fam.p
        bs = sorted({Fr(m, p ** e) for e in range(b.depth + 1)
                     for m in range(-b.height, b.height + 1)})
        for bb in bs:
            for k in range(-b.shift, b.shift + 1):
                out.append(fam.element(bb, k))
    elif isinstance(fam, FullAxbFamily):
        ts = sorted({Fr(u, v) for u in range(1, b.height + 1)
                     for v in range(1, b.height + 1) if math.gcd(u, v) == 1})
        bs = sorted({Fr(m, d) for d in range(1, b.depth + 1)
                     for m in range(-b.depth, b.depth + 1)})
        for bb in bs:
            for t in ts:
                out.append(fam.element(bb, t))
    elif isinstance(fam, LamplighterFamily):
        span = range(-b.depth, b.depth + 1)
        for vals in itertools.product(range(fam.f), repeat=len(span)):
            supp = tuple((p, v) for p, v in zip(span, vals) if v)
            for k in range(-b.shift, b.shift + 1):
                out.append(fam.element(supp, k))
    else:
        raise UsageError("unknown family")
    return out


def h_ball(scen: HeckeScenario) -> list[GroupElement]:
    return [x for x in ball(scen) if in_H(scen, x)]


def window(scen: HeckeScenario) -> tuple[GroupElement, ...]:
    """An ordered list of pairwise inequivalent left-coset representatives."""
    seen = []
    seen_set = set()
    for x in ball(scen):
        c = coset_canonical(scen, x)
        if c not in seen_set:
            seen_set.add(c)
            seen.append(c)
    return tuple(seen)
