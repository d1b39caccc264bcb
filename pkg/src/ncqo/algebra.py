"""Symbolic non-CCR operator algebra.

Generators are the annihilators ``a(l)``, creators ``ad(l)`` and the central
units ``one(l)`` of each mode ``l``.  The only nontrivial relation is

    a(l) ad(m) = ad(m) a(l) + delta(l, m) one(l)

with every ``one(l)`` commuting with everything.  Powers of units are never
reduced: ``one(l) one(l)`` is *not* ``one(l)`` in this algebra.

Coefficients stay exact (``int`` / ``fractions.Fraction``) as long as the
inputs are exact; floats and complex numbers are carried through unchanged.
"""

from __future__ import annotations

import bisect
import enum
import json
import numbers
import re
from collections import defaultdict
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .errors import ParseError, TermExplosion, UnknownMode

__all__ = [
    "ModeLabel",
    "ModeTable",
    "Kind",
    "Generator",
    "OperatorWord",
    "Term",
    "NormalForm",
    "parse_word",
    "normal_order",
    "multiply",
    "DEFAULT_MAX_TERMS",
]

Coefficient = Union[int, Fraction, float, complex]

DEFAULT_MAX_TERMS = 10**6

_ID_RE = re.compile(r"[^()\s]+\Z")


@dataclass(frozen=True, order=True)
class ModeLabel:
    """A field mode: an opaque id plus its angular frequency.

    Equality, hashing and ordering use the id only.
    """

    id: str
    omega: float = field(default=1.0, compare=False)

    def __post_init__(self):
        if not isinstance(self.id, str) or not _ID_RE.match(self.id):
            raise ValueError(f"invalid mode id {self.id!r}")
        if not self.omega > 0:
            raise ValueError(f"mode {self.id!r}: omega must be positive, got {self.omega}")

    def __str__(self):
        return self.id


class ModeTable(Mapping):
    """Id -> ModeLabel lookup.  Missing ids raise :class:`UnknownMode`."""

    def __init__(self, modes: Iterable[ModeLabel] = ()):
        self._modes: dict[str, ModeLabel] = {}
        for m in modes:
            if m.id in self._modes:
                raise ValueError(f"duplicate mode id {m.id!r}")
            self._modes[m.id] = m

    @classmethod
    def from_ids(cls, ids: Iterable[str], omega: float = 1.0) -> "ModeTable":
        return cls(ModeLabel(i, omega) for i in ids)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float]]) -> "ModeTable":
        return cls(ModeLabel(i, w) for i, w in pairs)

    def __getitem__(self, key: str) -> ModeLabel:
        try:
            return self._modes[key]
        except KeyError:
            raise UnknownMode(key) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._modes)

    def __len__(self) -> int:
        return len(self._modes)

    def __repr__(self):
        return f"ModeTable({list(self._modes.values())!r})"

    def merged(self, other: Iterable[ModeLabel]) -> "ModeTable":
        """Table with the modes of ``other`` added (existing ids win)."""
        extra = [m for m in other if m.id not in self._modes]
        return ModeTable([*self._modes.values(), *extra])


class Kind(enum.Enum):
    ANNIHILATE = "a"
    CREATE = "ad"
    UNIT = "one"


@dataclass(frozen=True)
class Generator:
    kind: Kind
    mode: ModeLabel

    def __str__(self):
        return f"{self.kind.value}({self.mode.id})"

    def adjoint(self) -> "Generator":
        if self.kind is Kind.ANNIHILATE:
            return Generator(Kind.CREATE, self.mode)
        if self.kind is Kind.CREATE:
            return Generator(Kind.ANNIHILATE, self.mode)
        return self


@dataclass(frozen=True)
class OperatorWord:
    """An ordered product of generators times a scalar."""

    factors: tuple[Generator, ...] = ()
    coefficient: Coefficient = 1

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def __mul__(self, other):
        if isinstance(other, OperatorWord):
            return OperatorWord(self.factors + other.factors, self.coefficient * other.coefficient)
        if isinstance(other, Generator):
            return OperatorWord(self.factors + (other,), self.coefficient)
        if isinstance(other, numbers.Number):
            return OperatorWord(self.factors, self.coefficient * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return OperatorWord(self.factors, other * self.coefficient)
        if isinstance(other, Generator):
            return OperatorWord((other,) + self.factors, self.coefficient)
        return NotImplemented

    def __len__(self):
        return len(self.factors)

    def __str__(self):
        body = " ".join(str(g) for g in self.factors) or "1"
        if self.coefficient == 1:
            return body
        return f"{_format_coeff(self.coefficient)} {body}"

    def adjoint(self) -> "OperatorWord":
        c = self.coefficient
        return OperatorWord(
            tuple(g.adjoint() for g in reversed(self.factors)),
            c.conjugate() if isinstance(c, complex) else c,
        )

    @property
    def modes(self) -> frozenset[ModeLabel]:
        return frozenset(g.mode for g in self.factors)

    @property
    def imbalance(self) -> int:
        """Number of creators minus number of annihilators."""
        return sum(
            (g.kind is Kind.CREATE) - (g.kind is Kind.ANNIHILATE) for g in self.factors
        )


# -- parsing -----------------------------------------------------------------

_TOKEN_RE = re.compile(r"(ad|a|one)\(([^()\s]+)\)")
_KINDS = {"a": Kind.ANNIHILATE, "ad": Kind.CREATE, "one": Kind.UNIT}


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def parse_word(text: str, table: Mapping[str, ModeLabel]) -> OperatorWord:
    """Parse ``"a(k1) ad(k2) one(k1)"`` into an :class:`OperatorWord`.

    Items may be separated by whitespace or written adjacently.  Unknown ids
    raise :class:`UnknownMode`; anything else malformed raises
    :class:`ParseError` carrying the byte offset of the offending position.
    """
    factors = []
    pos, end = 0, len(text)
    while True:
        while pos < end and text[pos].isspace():
            pos += 1
        if pos == end:
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"expected a(id), ad(id) or one(id), found {text[pos:pos + 12]!r}",
                             _byte_offset(text, pos))
        kind, mode_id = m.groups()
        try:
            mode = table[mode_id]
        except KeyError:
            raise UnknownMode(mode_id) from None
        factors.append(Generator(_KINDS[kind], mode))
        pos = m.end()
    if not factors:
        raise ParseError("empty operator word", _byte_offset(text, pos))
    return OperatorWord(tuple(factors), 1)


def mode_ids_in(text: str) -> list[str]:
    """Mode ids mentioned in an operator word, in order of first appearance."""
    seen = {}
    for m in _TOKEN_RE.finditer(text):
        seen.setdefault(m.group(2), None)
    return list(seen)


# -- normal forms --------------------------------------------------------------

Units = tuple[tuple[ModeLabel, int], ...]
TermKey = tuple[Units, tuple[ModeLabel, ...], tuple[ModeLabel, ...]]

_IDENTITY_KEY: TermKey = ((), (), ())


@dataclass(frozen=True)
class Term:
    """coeff * prod(one^pow) * prod(creators) * prod(annihilators)"""

    coeff: Coefficient
    units: Units
    creators: tuple[ModeLabel, ...]
    annihilators: tuple[ModeLabel, ...]

    @property
    def key(self) -> TermKey:
        return (self.units, self.creators, self.annihilators)

    @property
    def is_scalar_unit(self) -> bool:
        """True if the term contains no creators or annihilators."""
        return not self.creators and not self.annihilators

    @property
    def unit_power(self) -> int:
        return sum(p for _, p in self.units)

    def generators(self) -> tuple[Generator, ...]:
        out = []
        for mode, power in self.units:
            out.extend([Generator(Kind.UNIT, mode)] * power)
        out.extend(Generator(Kind.CREATE, m) for m in self.creators)
        out.extend(Generator(Kind.ANNIHILATE, m) for m in self.annihilators)
        return tuple(out)

    def to_word(self) -> OperatorWord:
        return OperatorWord(self.generators(), self.coeff)


def _sort_key(key: TermKey):
    units, cre, ann = key
    return (-(len(cre) + len(ann)), cre, ann, units)


def _is_zero(c) -> bool:
    return c == 0


class NormalForm:
    """Canonical normal-ordered polynomial in the non-CCR algebra.

    Immutable.  Terms are merged by (units, creators, annihilators) and kept in
    a deterministic order: higher operator degree first, then by mode ids.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[TermKey, Coefficient] | Iterable[Term] = ()):
        if isinstance(terms, Mapping):
            items = terms.items()
        else:
            acc = defaultdict(int)
            for t in terms:
                acc[t.key] += t.coeff
            items = acc.items()
        clean = {k: c for k, c in items if not _is_zero(c)}
        self._terms = {k: clean[k] for k in sorted(clean, key=_sort_key)}

    @classmethod
    def identity(cls) -> "NormalForm":
        return cls({_IDENTITY_KEY: 1})

    @classmethod
    def zero(cls) -> "NormalForm":
        return cls({})

    @classmethod
    def from_generator(cls, g: Generator, coeff: Coefficient = 1) -> "NormalForm":
        return normal_order(OperatorWord((g,), coeff))

    @property
    def terms(self) -> tuple[Term, ...]:
        return tuple(Term(c, *k) for k, c in self._terms.items())

    def coefficient(self, key: TermKey) -> Coefficient:
        return self._terms.get(key, 0)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, NormalForm):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __add__(self, other: "NormalForm") -> "NormalForm":
        if not isinstance(other, NormalForm):
            return NotImplemented
        acc = defaultdict(int, self._terms)
        for k, c in other._terms.items():
            acc[k] += c
        return NormalForm(acc)

    def __sub__(self, other: "NormalForm") -> "NormalForm":
        if not isinstance(other, NormalForm):
            return NotImplemented
        return self + other.scale(-1)

    def scale(self, factor: Coefficient) -> "NormalForm":
        return NormalForm({k: c * factor for k, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, NormalForm):
            return multiply(self, other)
        if isinstance(other, numbers.Number):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return self.scale(other)
        return NotImplemented

    @property
    def imbalances(self) -> set[int]:
        return {len(cre) - len(ann) for _, cre, ann in self._terms}

    @property
    def modes(self) -> frozenset[ModeLabel]:
        out = set()
        for units, cre, ann in self._terms:
            out.update(m for m, _ in units)
            out.update(cre)
            out.update(ann)
        return frozenset(out)

    def words(self) -> list[OperatorWord]:
        return [t.to_word() for t in self.terms]

    def __repr__(self):
        return f"NormalForm({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for t in self.terms:
            body = " ".join(str(g) for g in t.generators()) or "1"
            if t.coeff == 1:
                parts.append(body)
            else:
                parts.append(f"{_format_coeff(t.coeff)} {body}" if body != "1"
                             else _format_coeff(t.coeff))
        return " + ".join(parts)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        terms = []
        for (units, cre, ann), c in self._terms.items():
            cc = complex(c)
            terms.append({
                "coeff": [cc.real, cc.imag],
                "units": [[m.id, p] for m, p in units],
                "creators": [m.id for m in cre],
                "annihilators": [m.id for m in ann],
            })
        return {"terms": terms}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping, table: Mapping[str, ModeLabel] | None = None) -> "NormalForm":
        def look(mode_id):
            return table[mode_id] if table is not None else ModeLabel(mode_id)

        acc = defaultdict(int)
        for t in data["terms"]:
            re_, im = t["coeff"]
            coeff = _coeff_from_parts(re_, im)
            units = {}
            for mode_id, power in t.get("units", []):
                if int(power) != power or power < 1:
                    raise ValueError(f"unit power must be a positive integer, got {power!r}")
                m = look(mode_id)
                units[m] = units.get(m, 0) + int(power)
            key = (
                tuple(sorted(units.items())),
                tuple(sorted(look(i) for i in t.get("creators", []))),
                tuple(sorted(look(i) for i in t.get("annihilators", []))),
            )
            acc[key] += coeff
        return cls(acc)

    @classmethod
    def from_json(cls, text: str, table: Mapping[str, ModeLabel] | None = None) -> "NormalForm":
        return cls.from_dict(json.loads(text), table)


def _coeff_from_parts(re_: float, im: float) -> Coefficient:
    if im:
        return complex(re_, im)
    if float(re_).is_integer():
        return int(re_)
    return float(re_)


def _format_coeff(c) -> str:
    if isinstance(c, complex):
        return f"({c.real:g}{c.imag:+g}j)"
    return str(c)


# -- rewriting ------------------------------------------------------------------

def _add_unit(units: Units, mode: ModeLabel, power: int = 1) -> Units:
    d = dict(units)
    d[mode] = d.get(mode, 0) + power
    return tuple(sorted(d.items()))


def _insort(seq: tuple[ModeLabel, ...], mode: ModeLabel) -> tuple[ModeLabel, ...]:
    i = bisect.bisect_right(seq, mode)
    return seq[:i] + (mode,) + seq[i:]


def _remove_one(seq: tuple[ModeLabel, ...], mode: ModeLabel) -> tuple[ModeLabel, ...]:
    i = bisect.bisect_left(seq, mode)
    return seq[:i] + seq[i + 1:]


def _times_generator(key: TermKey, g: Generator) -> list[tuple[TermKey, int]]:
    """Normal-ordered expansion of (term with ``key``) * g, as (key, multiplicity)."""
    units, cre, ann = key
    if g.kind is Kind.UNIT:
        return [((_add_unit(units, g.mode), cre, ann), 1)]
    if g.kind is Kind.ANNIHILATE:
        return [((units, cre, _insort(ann, g.mode)), 1)]
    # The new creator has to pass every annihilator to its left.  Swapping with
    # a(m), m != l, is free; each a(l) leaves behind one copy of one(l), and
    # since one(l) is central all k copies are identical terms.
    out = [((units, _insort(cre, g.mode), ann), 1)]
    k = ann.count(g.mode)
    if k:
        out.append(((_add_unit(units, g.mode), cre, _remove_one(ann, g.mode)), k))
    return out


def _absorb(state: dict[TermKey, Coefficient], factors: Iterable[Generator],
            max_terms: int) -> dict[TermKey, Coefficient]:
    for g in factors:
        nxt: dict[TermKey, Coefficient] = defaultdict(int)
        for key, c in state.items():
            for k2, mult in _times_generator(key, g):
                nxt[k2] += c * mult
        state = {k: c for k, c in nxt.items() if not _is_zero(c)}
        if len(state) > max_terms:
            raise TermExplosion(f"normal ordering produced {len(state)} terms (cap {max_terms})")
    return state


def normal_order(word: OperatorWord | NormalForm | Generator, *,
                 max_terms: int = DEFAULT_MAX_TERMS) -> NormalForm:
    """Rewrite a word (or re-normalize a form) into its unique normal form.

    The word is absorbed one generator at a time from the left, so the partial
    product is always normal ordered and only the incoming creator needs to be
    commuted leftwards through the annihilator block.
    """
    if isinstance(word, Generator):
        word = OperatorWord((word,))
    if isinstance(word, NormalForm):
        total: dict[TermKey, Coefficient] = defaultdict(int)
        for t in word.terms:
            for k, c in _absorb({_IDENTITY_KEY: t.coeff}, t.generators(), max_terms).items():
                total[k] += c
        return NormalForm(total)
    return NormalForm(_absorb({_IDENTITY_KEY: word.coefficient}, word.factors, max_terms))


def multiply(lhs: NormalForm, rhs: NormalForm, *, max_terms: int = DEFAULT_MAX_TERMS) -> NormalForm:
    """Normal form of the product ``lhs * rhs``."""
    total: dict[TermKey, Coefficient] = defaultdict(int)
    base = dict(lhs._terms)
    for t in rhs.terms:
        part = _absorb(base, t.generators(), max_terms)
        for k, c in part.items():
            total[k] += c * t.coeff
        if len(total) > max_terms:
            raise TermExplosion(f"product produced {len(total)} terms (cap {max_terms})")
    return NormalForm(total)
