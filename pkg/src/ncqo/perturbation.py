"""Canonical vs noncanonical vacuum sandwiches and the resulting amplitude factors.

Every perturbative term of the noncanonical theory is the canonical term times
an X-factor, the ratio of the two vacuum expectations of the same operator
word.  Atomic matrix elements are identical in both theories and are not
modelled here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence, Union

from .algebra import (
    Generator,
    Kind,
    ModeLabel,
    ModeTable,
    NormalForm,
    OperatorWord,
    normal_order,
)
from .errors import InvalidVacuum, ZeroDenominator
from .vacuum import VacuumSpec, nphoton_norm, unit_moment, vev

__all__ = [
    "XFactorReport",
    "PatternFactor",
    "FlatVacuum",
    "NPhotonSame",
    "TwoDifferent",
    "Stimulated",
    "canonical_vev",
    "xfactor",
    "emission_factor",
    "decay_series_factors",
    "renormalize_coupling",
]


@dataclass(frozen=True)
class XFactorReport:
    """Both vacuum expectations of one word and their ratio.

    ``ratio`` is None exactly when the canonical value vanishes; the term then
    drops out of both expansions and ``vanishing`` is set.
    """

    canonical: complex
    noncanonical: complex
    ratio: Optional[float]
    vanishing: bool

    @property
    def defined(self) -> bool:
        return self.ratio is not None

    def to_dict(self) -> dict:
        return {
            "canonical": [self.canonical.real, self.canonical.imag],
            "noncanonical": [self.noncanonical.real, self.noncanonical.imag],
            "ratio": self.ratio,
            "vanishing": self.vanishing,
        }


@dataclass(frozen=True)
class PatternFactor:
    label: str
    word: OperatorWord
    report: XFactorReport

    def to_dict(self) -> dict:
        return {"pattern": self.label, "word": str(self.word), **self.report.to_dict()}


def canonical_vev(form_or_word: Union[OperatorWord, NormalForm]) -> complex:
    """CCR vacuum expectation: normal order, then set every unit to the identity."""
    form = form_or_word if isinstance(form_or_word, NormalForm) else normal_order(form_or_word)
    return complex(sum(t.coeff for t in form.terms if t.is_scalar_unit))


def xfactor(vac: VacuumSpec, word: OperatorWord) -> XFactorReport:
    bare = normal_order(OperatorWord(word.factors, 1))
    scalar_terms = [t for t in bare.terms if t.is_scalar_unit]
    # Word coefficients are positive integers after normal ordering, so the
    # canonical value is an exact integer.
    can_count = sum(t.coeff for t in scalar_terms)
    nonc = vev(vac, bare).real
    c = complex(word.coefficient)
    if can_count == 0:
        return XFactorReport(0j, c * nonc, None, True)
    return XFactorReport(c * can_count, c * nonc, nonc / can_count, False)


# -- emission processes -----------------------------------------------------------

ModeRef = Union[str, ModeLabel]


def _mid(m: ModeRef) -> str:
    return m.id if isinstance(m, ModeLabel) else m


@dataclass(frozen=True)
class NPhotonSame:
    """Spontaneous emission of ``n`` photons into the same mode, order n."""

    mode: ModeRef
    n: int


@dataclass(frozen=True)
class TwoDifferent:
    """Spontaneous emission of one photon into each of two distinct modes."""

    mode: ModeRef
    other: ModeRef


@dataclass(frozen=True)
class Stimulated:
    """First-order transition from n to n+1 photons in one mode."""

    mode: ModeRef
    n: int


ProcessKind = Union[NPhotonSame, TwoDifferent, Stimulated]


def emission_factor(vac: VacuumSpec, process: ProcessKind) -> float:
    """Multiplicative correction to the canonical emission amplitude."""
    if isinstance(process, NPhotonSame):
        return math.sqrt(nphoton_norm(vac, process.mode, process.n))
    if isinstance(process, TwoDifferent):
        if _mid(process.mode) == _mid(process.other):
            raise ValueError("TwoDifferent needs two distinct modes")
        return math.sqrt(unit_moment(vac, {_mid(process.mode): 1, _mid(process.other): 1}))
    if isinstance(process, Stimulated):
        if process.n < 1:
            raise ValueError("stimulated emission needs n >= 1 photons present")
        lower = nphoton_norm(vac, process.mode, process.n)
        if lower == 0:
            raise ZeroDenominator(f"<one({_mid(process.mode)})^{process.n}> vanishes")
        return math.sqrt(nphoton_norm(vac, process.mode, process.n + 1) / lower)
    raise TypeError(f"unknown process {process!r}")


# -- decay series -------------------------------------------------------------------

_FAMILIES = {2: ("01",), 4: ("0101", "0011")}


def _patterns(length: int, n_labels: int):
    """Restricted-growth strings over 'L', 'M' (first occurrence order)."""
    letters = "LM"[:n_labels]
    for combo in product(range(n_labels), repeat=length):
        if combo[0] != 0:
            continue
        if any(c > max(combo[:i], default=-1) + 1 for i, c in enumerate(combo)):
            continue
        yield "".join(letters[c] for c in combo)


def decay_series_factors(vac: VacuumSpec, order: int,
                         modes: Optional[Sequence[ModeRef]] = None) -> list[PatternFactor]:
    """X-factors of the nonvanishing excited-state amplitude terms at ``order``.

    Words are built on placeholder modes ``L`` (and ``M`` for order 4) bound to
    ``modes`` (default: the first two profile modes).  Family digits read left
    to right: ``0`` is an annihilator, ``1`` a creator.
    """
    if order not in _FAMILIES:
        raise ValueError("order must be 2 or 4")
    if modes is None:
        modes = list(vac.profile)[:2]
    ids = [_mid(m) for m in modes]
    if not ids:
        raise InvalidVacuum("vacuum has no modes")
    table = ModeTable.from_ids(dict.fromkeys(ids))
    bind = {"L": table[ids[0]]}
    if len(ids) > 1 and ids[1] != ids[0]:
        bind["M"] = table[ids[1]]
    out = []
    for family in _FAMILIES[order]:
        for pat in _patterns(len(family), len(bind)):
            word = OperatorWord(tuple(
                Generator(Kind.CREATE if bit == "1" else Kind.ANNIHILATE, bind[lab])
                for bit, lab in zip(family, pat)))
            rep = xfactor(vac, word)
            if not rep.vanishing:
                out.append(PatternFactor(f"X{family}[{pat}]", word, rep))
    return out


# -- flat vacuum ----------------------------------------------------------------------

@dataclass(frozen=True)
class FlatVacuum:
    """Constant amplitude ``C`` on ``mode_count`` modes below ``omega_max``."""

    C: float
    mode_count: int
    omega_max: float

    def __post_init__(self):
        if not (0 < self.C <= 1):
            raise InvalidVacuum(f"C must lie in (0, 1], got {self.C}")
        if self.mode_count < 1 or not self.omega_max > 0:
            raise InvalidVacuum("need mode_count >= 1 and omega_max > 0")
        if abs(self.C ** 2 * self.mode_count - 1) > 1e-12:
            raise InvalidVacuum(f"C^2 * M = {self.C ** 2 * self.mode_count!r}, not 1")

    @classmethod
    def for_mode_count(cls, mode_count: int, omega_max: float = math.inf) -> "FlatVacuum":
        return cls(1.0 / math.sqrt(mode_count), mode_count, omega_max)

    @classmethod
    def from_table(cls, table: ModeTable, omega_max: float) -> "FlatVacuum":
        inband = sum(1 for m in table.values() if m.omega < omega_max)
        if inband == 0:
            raise InvalidVacuum(f"no modes below omega_max={omega_max}")
        return cls.for_mode_count(inband, omega_max)

    def vacuum(self, p, table: Optional[ModeTable] = None) -> VacuumSpec:
        """Product vacuum with this profile; modes ``k1..kM`` when no table is given."""
        if table is None:
            table = ModeTable.from_ids(f"k{i}" for i in range(1, self.mode_count + 1))
        inband = [m.id for m in table.values() if m.omega < self.omega_max]
        if len(inband) != self.mode_count:
            raise InvalidVacuum(
                f"table has {len(inband)} modes below omega_max, expected {self.mode_count}")
        profile = {m.id: (self.C if m.omega < self.omega_max else 0.0) for m in table.values()}
        return VacuumSpec(p, profile)


def renormalize_coupling(flat: FlatVacuum, bare_e_over_m: float) -> float:
    """Observed charge-to-mass ratio for bare ``e/m``: ``C * e/m``."""
    return flat.C * bare_e_over_m
