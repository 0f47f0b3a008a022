"""Exact arithmetic in the biequivariant convolution algebra of a scenario.

An element is a finite map from canonical double-coset representatives to
values: cyclotomic scalars when dim sigma = 1, diagonal cyclotomic matrices
otherwise.  The invariance rule f(hxk) = sigma(h) f(x) sigma(k) recovers the
function from those values, and all operations below are exact.

Convolution is computed by expanding each support key through its left-coset
transversal and re-canonicalising products; pointwise_oracle evaluates the
defining sum directly from the invariance rule and serves as the independent
cross-check of that bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .characters import in_B, sigma_eval, sigma_eval_diag
from .groups import (DomainError, GroupElement, HeckeScenario, UsageError,
                     coset_canonical, coset_reps, double_coset_canonical,
                     index_L, in_H, modular_delta)
from .scalars import Cyclo, L1Value

Fr = Fraction


@lru_cache(maxsize=None)
def sigma_cyclo(scen: HeckeScenario, h: GroupElement) -> Cyclo:
    return Cyclo.root_of_unity(sigma_eval(scen, h))


@lru_cache(maxsize=None)
def sigma_diag(scen: HeckeScenario, h: GroupElement) -> "Diag":
    return Diag(tuple(Cyclo.root_of_unity(e) for e in sigma_eval_diag(scen, h)))


@dataclass(frozen=True)
class Diag:
    """A diagonal matrix of cyclotomic entries (the dim > 1 value type)."""
    entries: tuple

    def __mul__(self, o: "Diag") -> "Diag":
        return Diag(tuple(a * b for a, b in zip(self.entries, o.entries)))

    def __add__(self, o: "Diag") -> "Diag":
        return Diag(tuple(a + b for a, b in zip(self.entries, o.entries)))

    def conj_t(self) -> "Diag":
        return Diag(tuple(a.conj() for a in self.entries))

    def scale(self, r) -> "Diag":
        return Diag(tuple(a.scale(r) for a in self.entries))

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.entries)


class HeckeElement:
    """A finitely supported biequivariant function, keyed by canonical
    double-coset representatives; zero values are pruned."""

    __slots__ = ("scen", "support")

    def __init__(self, scen: HeckeScenario, support: dict):
        self.scen = scen
        self.support = {k: v for k, v in support.items() if not v.is_zero()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, HeckeElement):
            return NotImplemented
        if self.scen != other.scen or set(self.support) != set(other.support):
            return False
        return all(self.support[k] == other.support[k] for k in self.support)

    def is_zero(self) -> bool:
        return not self.support

    def __add__(self, other: "HeckeElement") -> "HeckeElement":
        if self.scen != other.scen:
            raise UsageError("elements of different scenarios")
        out = dict(self.support)
        for k, v in other.support.items():
            out[k] = out[k] + v if k in out else v
        return HeckeElement(self.scen, out)

    def scale(self, r) -> "HeckeElement":
        return HeckeElement(self.scen, {k: v.scale(r) for k, v in self.support.items()})

    def __repr__(self):
        items = ", ".join(f"{k}: {v}" for k, v in sorted_support(self))
        return f"HeckeElement({{{items}}})"


def sorted_support(f: HeckeElement):
    return sorted(f.support.items(), key=lambda kv: repr(kv[0]))


def zero_element(scen: HeckeScenario) -> HeckeElement:
    return HeckeElement(scen, {})


def identity_element(scen: HeckeScenario) -> HeckeElement:
    e = scen.identity()
    if scen.dim == 1:
        return HeckeElement(scen, {e: Cyclo.one()})
    return HeckeElement(scen, {e: Diag(tuple(Cyclo.one() for _ in range(scen.dim)))})


# ---------------------------------------------------------------------------
# the epsilon basis (dim 1)


def epsilon(scen: HeckeScenario, x: GroupElement) -> HeckeElement:
    """The basis element supported on HxH, normalised to value 1 at the
    canonical representative.  Rejected for x outside B: no nonzero
    biequivariant function lives on that double coset."""
    if scen.dim != 1:
        raise UsageError("epsilon basis requires dim sigma = 1")
    key = double_coset_canonical(scen, x)
    if not in_B(scen, key):
        raise DomainError(f"{x}: double coset supports no nonzero element")
    return HeckeElement(scen, {key: Cyclo.one()})


def epsilon_decompose(scen: HeckeScenario, g: GroupElement):
    """(key, h, k) with g = h * key * k, key canonical and h, k in H."""
    key = double_coset_canonical(scen, g)
    for rep in coset_reps(scen, key):
        k = rep.inv() * g
        if in_H(scen, k):
            return key, rep * key.inv(), k
    raise UsageError("element not decomposable over its double coset")


def epsilon_phase(scen: HeckeScenario, g: GroupElement):
    """Phase c with (the basis element anchored at g) = c * (anchored at the
    canonical representative); c = conj(sigma(h) sigma(k)) for g = h*key*k."""
    key, h, k = epsilon_decompose(scen, g)
    return key, (sigma_cyclo(scen, h) * sigma_cyclo(scen, k)).conj()


# ---------------------------------------------------------------------------
# evaluation


def evaluate(scen: HeckeScenario, f: HeckeElement, g: GroupElement):
    """f(g), reconstructed from the stored coefficient via invariance."""
    key = double_coset_canonical(scen, g)
    c = f.support.get(key)
    if c is None:
        return Cyclo.zero() if scen.dim == 1 else _zero_diag(scen)
    key2, h, k = epsilon_decompose(scen, g)
    assert key2 == key
    if scen.dim == 1:
        return sigma_cyclo(scen, h) * c * sigma_cyclo(scen, k)
    return sigma_diag(scen, h) * c * sigma_diag(scen, k)


def _zero_diag(scen: HeckeScenario) -> Diag:
    return Diag(tuple(Cyclo.zero() for _ in range(scen.dim)))


# ---------------------------------------------------------------------------
# convolution


def convolve(f: HeckeElement, g: HeckeElement) -> HeckeElement:
    """Exact convolution sum over left cosets meeting the support of f."""
    scen = f.scen
    if scen != g.scen:
        raise UsageError("elements of different scenarios")
    dim1 = scen.dim == 1
    sig = sigma_cyclo if dim1 else sigma_diag

    acc: dict[GroupElement, object] = {}
    for xk, cx in f.support.items():
        for r in coset_reps(scen, xk):
            t = r * xk.inv()
            fval = sig(scen, t) * cx
            for yk, cy in g.support.items():
                for s in coset_reps(scen, yk):
                    z = r * s
                    zc = coset_canonical(scen, z)
                    k = z.inv() * zc
                    term = fval * (sig(scen, s * yk.inv()) * cy * sig(scen, k))
                    acc[zc] = acc[zc] + term if zc in acc else term

    support: dict[GroupElement, object] = {}
    for zc, val in acc.items():
        if val.is_zero():
            continue
        key, h, k = epsilon_decompose(scen, zc)
        if dim1:
            coeff = (sigma_cyclo(scen, h) * sigma_cyclo(scen, k)).conj() * val
        else:
            coeff = sigma_diag(scen, h.inv()) * val * sigma_diag(scen, k.inv())
        if key in support:
            assert support[key] == coeff, "inconsistent values across a double coset"
        else:
            support[key] = coeff
    return HeckeElement(scen, support)


def pointwise_oracle(f: HeckeElement, g: HeckeElement, x: GroupElement):
    """The defining convolution sum evaluated at the single point x, using
    only invariance-based evaluation.  No canonicalisation bookkeeping."""
    scen = f.scen
    total = Cyclo.zero() if scen.dim == 1 else _zero_diag(scen)
    for xk in f.support:
        for r in coset_reps(scen, xk):
            total = total + evaluate(scen, f, r) * evaluate(scen, g, r.inv() * x)
    return total


# ---------------------------------------------------------------------------
# involution and norm


def involution(f: HeckeElement) -> HeckeElement:
    """f*(x) = Delta_K(x^-1) f(x^-1)^*, with the modular factor taken
    relative to the kernel of sigma."""
    scen = f.scen
    out: dict[GroupElement, object] = {}
    for key in f.support:
        ki = double_coset_canonical(scen, key.inv())
        val = evaluate(scen, f, ki.inv())
        delta = modular_delta(scen, ki.inv(), scen.K_desc)
        conj = val.conj() if scen.dim == 1 else val.conj_t()
        out[ki] = conj.scale(delta)
    return HeckeElement(scen, out)


def l1_norm(f: HeckeElement) -> L1Value:
    """Sum over left cosets of the value's operator norm, as a formal exact
    quantity (a rational when every modulus is rational)."""
    scen = f.scen
    total = L1Value()
    for key, c in f.support.items():
        L = index_L(scen, key)
        if scen.dim == 1:
            total = total + L1Value.of_abs(c, Fr(L))
        else:
            total = total + L1Value.of_abs(_diag_opnorm_entry(c), Fr(L))
    return total


def _diag_opnorm_entry(d: Diag) -> Cyclo:
    """The entry of largest modulus; requires rational moduli to order."""
    best, best_abs = None, None
    for a in d.entries:
        r = a.norm_sq().as_rational()
        if r is None:
            raise UsageError("operator norm needs rational entry moduli")
        if best is None or r > best_abs:
            best, best_abs = a, r
    return best


# ---------------------------------------------------------------------------
# corner elements and structure constants


def p_sigma_sandwich(scen: HeckeScenario, x: GroupElement) -> HeckeElement:
    """The compression of the group element x to the corner: supported on
    HxH with total mass 1 when x is compatible, zero otherwise."""
    if scen.dim != 1:
        raise UsageError("corner compression requires dim sigma = 1")
    key = double_coset_canonical(scen, x)
    if not in_B(scen, key):
        return zero_element(scen)
    return epsilon(scen, key).scale(Fr(1, index_L(scen, key)))


def structure_constants(scen: HeckeScenario, x: GroupElement, y: GroupElement) -> dict:
    """Coefficients m[z] with eps_x * eps_y = sum_z m[z] eps_z, validated
    against the pointwise oracle at every output representative."""
    ex, ey = epsilon(scen, x), epsilon(scen, y)
    conv = convolve(ex, ey)
    for z, coeff in conv.support.items():
        if not in_B(scen, z):
            raise UsageError("convolution support escaped B; broken invariants")
        if pointwise_oracle(ex, ey, z) != coeff:
            raise UsageError("structure constant disagrees with the oracle")
    return dict(conv.support)


# ---------------------------------------------------------------------------
# transport along a global character


def trivial_twin(scen: HeckeScenario) -> HeckeScenario:
    """The same pair with the trivial character (the plain double-coset
    algebra); target of the transport isomorphism."""
    from . import characters as ch
    fam = scen.family
    if isinstance(fam, ch.DihedralFamily):
        sig = ch.DihedralChar(Fr(0))
    elif isinstance(fam, ch.HeisenbergFamily):
        sig = ch.HeisenbergChar(Fr(0), Fr(0))
    elif isinstance(fam, (ch.PadicAxbFamily, ch.FullAxbFamily)):
        sig = ch.AxbChar(1)
    elif isinstance(fam, ch.LamplighterFamily):
        sig = ch.LampChar(fam.f, (), (0,))
    else:
        raise UsageError("unknown family")
    return HeckeScenario(fam, sig, ch.kernel_descriptor(fam, sig), scen.bounds,
                         scen.precision, name=scen.name + "-trivial")


def phi_transport(scen: HeckeScenario, cert, f: HeckeElement) -> HeckeElement:
    """Twist f by the conjugate global phase; lands in the trivial-character
    algebra and is a *-isomorphism onto it."""
    if not getattr(cert, "found", False):
        raise UsageError("transport needs an extension certificate")
    twin = trivial_twin(scen)
    out = {}
    for key, c in f.support.items():
        phase = Cyclo.root_of_unity(cert.exp(scen, key)).conj()
        out[key] = phase * c
    return HeckeElement(twin, out)


# ---------------------------------------------------------------------------
# seeded sampling for property checks


def random_element(scen: HeckeScenario, rng, pool, max_terms: int = 2) -> HeckeElement:
    """A small random combination of basis elements with keys from pool."""
    n = rng.randint(1, max_terms)
    out = zero_element(scen)
    order = scen.sigma.order
    for _ in range(n):
        x = pool[rng.randrange(len(pool))]
        num = rng.choice([-2, -1, 1, 2, 3])
        den = rng.choice([1, 2, 3])
        j = rng.randrange(max(order, 1))
        c = Cyclo.root_of_unity(Fr(j, order) if order > 1 else Fr(0)).scale(Fr(num, den))
        out = out + HeckeElement(scen, {double_coset_canonical(scen, x): c})
    return out
