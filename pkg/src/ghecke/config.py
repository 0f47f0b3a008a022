"""Scenario configuration files.

A config is one TOML document with a [scenario] table (family plus family
parameters, optional [scenario.bounds]) and an optional [run] table:

    [scenario]
    family = "padic-axb"      # dihedral | heisenberg | padic-axb
    p = 2                     # | full-axb | lamplighter
    q = 3
    precision = 64
    name = "demo"

    [scenario.bounds]
    height = 4
    depth = 2
    shift = 4

    [run]
    seed = 7
    reports = ["describe-pair", "b-set"]

Rational-valued parameters (s, t) are strings like "1/2".  Unknown keys are
rejected so typos fail loudly.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from fractions import Fraction

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import characters as ch
from .groups import Bounds, HeckeScenario, UsageError

Fr = Fraction

_FAMILY_KEYS = {
    "dihedral": {"sign"},
    "heisenberg": {"s", "t", "padic_p"},
    "padic-axb": {"p", "q"},
    "full-axb": {"n"},
    "lamplighter": {"f", "pre", "per"},
}
_COMMON_KEYS = {"family", "precision", "name", "bounds"}
_BOUNDS_KEYS = {"height", "depth", "shift", "window_shift", "window_depth",
                "denominators"}


@dataclass(frozen=True)
class RunOptions:
    seed: int = 0
    reports: tuple = ()
    out: str | None = None
    fmt: str = "json"


def parse_config_text(text: str) -> tuple[HeckeScenario, RunOptions]:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"config is not valid TOML: {exc}") from exc
    if "scenario" not in doc:
        raise UsageError("config needs a [scenario] table")
    scen = _build_scenario(doc["scenario"])
    run = doc.get("run", {})
    opts = RunOptions(seed=int(run.get("seed", 0)),
                      reports=tuple(run.get("reports", ())),
                      fmt=str(run.get("format", "json")))
    return scen, opts


def parse_config(path: str) -> tuple[HeckeScenario, RunOptions]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _build_scenario(tab: dict) -> HeckeScenario:
    family = tab.get("family")
    if family not in _FAMILY_KEYS:
        raise UsageError(f"unknown family {family!r}; choose from "
                         f"{sorted(_FAMILY_KEYS)}")
    allowed = _FAMILY_KEYS[family] | _COMMON_KEYS
    unknown = set(tab) - allowed
    if unknown:
        raise UsageError(f"unknown scenario keys: {sorted(unknown)}")
    name = str(tab.get("name", ""))
    precision = int(tab.get("precision", 64))
    if precision < 1:
        raise UsageError("precision must be positive")

    if family == "dihedral":
        scen = ch.make_dihedral(sign=bool(tab.get("sign", True)), name=name)
    elif family == "heisenberg":
        if "s" not in tab or "t" not in tab:
            raise UsageError("heisenberg needs s and t")
        scen = ch.make_heisenberg(_rat(tab["s"]), _rat(tab["t"]),
                                  padic_p=tab.get("padic_p"), name=name)
    elif family == "padic-axb":
        if "p" not in tab or "q" not in tab:
            raise UsageError("padic-axb needs p and q")
        scen = ch.make_padic_axb(int(tab["p"]), int(tab["q"]),
                                 precision=precision, name=name)
    elif family == "full-axb":
        if "n" not in tab:
            raise UsageError("full-axb needs n")
        if int(tab["n"]) < 1:
            raise UsageError("n must be a positive integer")
        scen = ch.make_full_axb(int(tab["n"]), name=name)
    else:
        if "f" not in tab or "per" not in tab:
            raise UsageError("lamplighter needs f and per")
        scen = ch.make_lamplighter(int(tab["f"]), tuple(tab.get("pre", ())),
                                   tuple(tab["per"]), name=name)

    scen = replace(scen, precision=precision)
    if "bounds" in tab:
        scen = replace(scen, bounds=_build_bounds(scen.bounds, tab["bounds"]))
    return scen


def _build_bounds(base: Bounds, tab: dict) -> Bounds:
    unknown = set(tab) - _BOUNDS_KEYS
    if unknown:
        raise UsageError(f"unknown bounds keys: {sorted(unknown)}")
    kw = {k: (tuple(v) if k == "denominators" else int(v)) for k, v in tab.items()}
    return replace(base, **kw)


def _rat(v) -> Fraction:
    try:
        return Fr(str(v))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad rational {v!r}") from exc
