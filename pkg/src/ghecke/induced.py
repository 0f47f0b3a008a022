"""Finite-window matrix models of the induced representation and of the
right convolution action, with honest truncation bookkeeping.

Operators are computed on a finite window of left-coset representatives.
Every entry inside the window is exact; truncation shows up only as columns
whose true image leaves the window, and those columns are flagged rather
than approximated.  Products and residuals are asserted on the flag-free
interior, where they agree with the infinite model exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import HeckeElement, evaluate, sigma_cyclo
from .characters import in_B
from .groups import (DihedralFamily, FullAxbFamily, GroupElement,
                     HeckeScenario, HeisenbergFamily, LamplighterFamily,
                     PadicAxbFamily, UsageError, coset_canonical, coset_reps,
                     double_coset_canonical, in_H, modular_delta)
from .scalars import Cyclo, QuadExt, sqrt_as_quadext

Fr = Fraction


class UnsupportedScenario(UsageError):
    """The scenario lacks the exact square roots the operator model needs."""


def delta_radicand(scen: HeckeScenario) -> int:
    fam = scen.family
    if isinstance(fam, PadicAxbFamily):
        return fam.p
    if isinstance(fam, LamplighterFamily):
        return fam.f
    if isinstance(fam, (DihedralFamily, HeisenbergFamily, FullAxbFamily)):
        return 1
    raise UsageError("unknown family")


class CosetWindow:
    """Ordered pairwise-inequivalent left-coset representatives."""

    def __init__(self, scen: HeckeScenario, reps: tuple):
        self.scen = scen
        self.reps = tuple(reps)
        self._pos = {r: i for i, r in enumerate(self.reps)}
        if len(self._pos) != len(self.reps):
            raise UsageError("window representatives are not pairwise inequivalent")

    @staticmethod
    def build(scen: HeckeScenario, elements) -> "CosetWindow":
        seen, reps = set(), []
        for x in elements:
            c = coset_canonical(scen, x)
            if c not in seen:
                seen.add(c)
                reps.append(c)
        return CosetWindow(scen, tuple(reps))

    def position(self, x: GroupElement):
        return self._pos.get(coset_canonical(self.scen, x))

    def __eq__(self, other):
        return isinstance(other, CosetWindow) and self.scen == other.scen \
            and self.reps == other.reps

    def __len__(self):
        return len(self.reps)


class WindowedOperator:
    """A sparse window matrix plus the set of truncation-leaking columns."""

    def __init__(self, window: CosetWindow, entries: dict, leaked_cols: frozenset,
                 rad: int):
        self.window = window
        self.entries = entries  # (row, col) -> QuadExt
        self.leaked_cols = leaked_cols
        self.rad = rad

    def clean_cols(self):
        return frozenset(range(len(self.window))) - self.leaked_cols

    def matmul(self, other: "WindowedOperator") -> "WindowedOperator":
        """Product, exact on columns where `other` did not leak."""
        assert self.window == other.window and self.rad == other.rad
        by_col: dict[int, list] = {}
        for (i, k), v in self.entries.items():
            by_col.setdefault(k, []).append((i, v))
        out: dict[tuple, QuadExt] = {}
        for (k, j), w in other.entries.items():
            for i, v in by_col.get(k, ()):
                key = (i, j)
                out[key] = out[key] + v * w if key in out else v * w
        return WindowedOperator(self.window, {k: v for k, v in out.items()
                                              if not v.is_zero()},
                                self.leaked_cols | other.leaked_cols, self.rad)

    def sub(self, other: "WindowedOperator") -> "WindowedOperator":
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] - v if k in out else QuadExt(Cyclo.zero(), Cyclo.zero(),
                                                         self.rad) - v
        return WindowedOperator(self.window, {k: v for k, v in out.items()
                                              if not v.is_zero()},
                                self.leaked_cols | other.leaked_cols, self.rad)

    def adjoint(self) -> "WindowedOperator":
        out = {(j, i): v.conj() for (i, j), v in self.entries.items()}
        return WindowedOperator(self.window, out, self.leaked_cols, self.rad)

    def column(self, j: int):
        return {i: v for (i, jj), v in self.entries.items() if jj == j}

    def is_zero_on(self, cols) -> bool:
        return all(j not in cols or v.is_zero() for (i, j), v in self.entries.items())

    def equals_on(self, other: "WindowedOperator", cols) -> bool:
        keys = {k for k in self.entries if k[1] in cols} | \
               {k for k in other.entries if k[1] in cols}
        zero = QuadExt(Cyclo.zero(), Cyclo.zero(), self.rad)
        return all(self.entries.get(k, zero) == other.entries.get(k, zero)
                   for k in keys)


def lambda_matrix(scen: HeckeScenario, w: GroupElement, window: CosetWindow
                  ) -> WindowedOperator:
    """Translation by w on the window: a partial permutation with unit
    phases; a column whose image coset leaves the window is flagged."""
    if scen.dim != 1:
        raise UsageError("the windowed model assumes dim sigma = 1")
    rad = delta_radicand(scen)
    entries, leaked = {}, set()
    for j, xj in enumerate(window.reps):
        g = w * xj
        i = window.position(g)
        if i is None:
            leaked.add(j)
            continue
        h = window.reps[i].inv() * g
        assert in_H(scen, h)
        entries[(i, j)] = QuadExt.of(sigma_cyclo(scen, h), rad)
    return WindowedOperator(window, entries, frozenset(leaked), rad)


def rtilde_matrix(scen: HeckeScenario, f: HeckeElement, window: CosetWindow
                  ) -> WindowedOperator:
    """The right convolution action of f on the window.

    Entry (y, x) is sqrt(Delta_K(y^-1 x)) * f(y^-1 x); rows are found by
    walking x through the inverse support cosets.  Scenarios whose modular
    values are not squares times the family radicand are refused.
    """
    rad = delta_radicand(scen)
    inv_keys = [double_coset_canonical(scen, key.inv()) for key in f.support]
    entries, leaked = {}, set()
    for j, xj in enumerate(window.reps):
        rows = set()
        off_window = False
        for key in inv_keys:
            for r in coset_reps(scen, key):
                i = window.position(xj * r)
                if i is None:
                    off_window = True
                else:
                    rows.add(i)
        if off_window:
            leaked.add(j)
        for i in rows:
            g = window.reps[i].inv() * xj
            val = evaluate(scen, f, g)
            if val.is_zero():
                continue
            try:
                root = sqrt_as_quadext(modular_delta(scen, g, scen.K_desc), rad)
            except ValueError as exc:
                raise UnsupportedScenario(
                    f"modular value at {g} is not a square times {rad}") from exc
            entries[(i, j)] = root * QuadExt.of(val, rad)
    return WindowedOperator(window, entries, frozenset(leaked), rad)


@dataclass(frozen=True)
class ResidualReport:
    interior_cols: frozenset
    window_size: int
    exact_zero: bool
    inconclusive: bool


def commutation_residual(scen: HeckeScenario, w: GroupElement, f: HeckeElement,
                         window: CosetWindow) -> ResidualReport:
    """Entries of [translation(w), action(f)] on columns where neither
    operator leaked; the exact answer there is zero."""
    lam = lambda_matrix(scen, w, window)
    rt = rtilde_matrix(scen, f, window)
    interior = lam.clean_cols() & rt.clean_cols()
    if not interior:
        return ResidualReport(interior, len(window), False, True)
    diff = lam.matmul(rt).sub(rt.matmul(lam))
    return ResidualReport(interior, len(window), diff.is_zero_on(interior), False)


@dataclass(frozen=True)
class IrreducibilityReport:
    reducible: bool
    witness: GroupElement | None
    ball_size: int

    @property
    def verdict(self) -> str:
        return "reducible" if self.reducible else "irreducible-on-ball"


def irreducibility_probe(scen: HeckeScenario, ball) -> IrreducibilityReport:
    """Any compatible element outside H spans a nontrivial commutant
    direction, so finding one settles reducibility; absence is only
    conclusive on the scanned ball."""
    if scen.dim != 1:
        raise UsageError("the probe assumes dim sigma = 1")
    ball = list(ball)
    for x in ball:
        if not in_H(scen, x) and in_B(scen, x):
            return IrreducibilityReport(True, x, len(ball))
    return IrreducibilityReport(False, None, len(ball))
