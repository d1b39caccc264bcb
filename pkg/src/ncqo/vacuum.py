"""Vacuum expectation values for product-form multi-oscillator vacua.

A product vacuum is ``sum_n sqrt(p_n) |O>^{(x)n}``: a superposition over the
number of oscillators ``n`` of ``n`` copies of one single-oscillator ground
state ``|O> = sum_l O_l |l, 0>``.  On the ``n``-oscillator sector the unit
``one(l)`` acts as ``(1/n) sum_j P_l^(j)`` with ``P_l^(j)`` the projector of
oscillator ``j`` onto mode ``l``.

Expanding a product of ``k`` units over oscillator assignments gives

    <one(l1) ... one(lk)> = sum_n p_n n^-k  sum_P  [P mode-homogeneous]
                            * n(n-1)...(n-|P|+1) * prod_blocks |O_block|^2

where ``P`` runs over set partitions of the ``k`` slots (slots sharing an
oscillator form a block; a block is nonzero only if all its slots carry the
same mode since the projectors are orthogonal).
"""

from __future__ import annotations

import json
import math
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from functools import lru_cache
from types import MappingProxyType
from typing import Union

from .algebra import ModeLabel, NormalForm
from .errors import InvalidVacuum, MomentTooLarge, UnsupportedVacuum

__all__ = [
    "VacuumSpec",
    "MomentRequest",
    "DEFAULT_MOMENT_CAP",
    "inv_n_moment",
    "unit_moment",
    "unit_moment_enumerated",
    "vev",
    "nphoton_norm",
    "set_partitions",
    "stirling2",
]

DEFAULT_MOMENT_CAP = 12
NORMALIZATION_TOL = 1e-12

ModeRef = Union[str, ModeLabel]


def _mode_id(m: ModeRef) -> str:
    return m.id if isinstance(m, ModeLabel) else m


class VacuumSpec:
    """Product-form vacuum: oscillator-number distribution ``p`` and profile ``O``.

    Parameters
    ----------
    p : mapping n -> p_n
        Probabilities over positive oscillator numbers; must sum to 1.
    profile : mapping mode -> complex amplitude
        Single-oscillator ground-state amplitudes ``O_l``; ``sum |O_l|^2 = 1``.
    renormalize : bool
        Rescale the profile to unit norm instead of rejecting it.
    """

    __slots__ = ("_p", "_profile")

    def __init__(self, p: Mapping[int, float], profile: Mapping[ModeRef, complex],
                 renormalize: bool = False):
        pp = {}
        for n, w in p.items():
            if int(n) != n or int(n) < 1:
                raise InvalidVacuum(f"oscillator numbers must be positive integers, got {n!r}")
            w = float(w)
            if not w >= 0:
                raise InvalidVacuum(f"p[{n}] = {w} is negative")
            if w > 0:
                pp[int(n)] = w
        if abs(math.fsum(pp.values()) - 1.0) > NORMALIZATION_TOL:
            raise InvalidVacuum(f"p sums to {math.fsum(pp.values())!r}, not 1")

        prof = {_mode_id(m): complex(a) for m, a in profile.items()}
        norm = math.fsum(abs(a) ** 2 for a in prof.values())
        if renormalize:
            if norm == 0:
                raise InvalidVacuum("cannot renormalize an all-zero profile")
            scale = 1.0 / math.sqrt(norm)
            prof = {k: a * scale for k, a in prof.items()}
        elif abs(norm - 1.0) > NORMALIZATION_TOL:
            raise InvalidVacuum(f"profile has squared norm {norm!r}, not 1")

        self._p = MappingProxyType(dict(sorted(pp.items())))
        self._profile = MappingProxyType(prof)

    @classmethod
    def geometric(cls, ratio: float, n_max: int, profile: Mapping[ModeRef, complex],
                  renormalize: bool = False) -> "VacuumSpec":
        """Truncated geometric distribution ``p_n ~ ratio**(n-1)`` on ``1..n_max``."""
        if not (ratio > 0 and n_max >= 1):
            raise InvalidVacuum("geometric vacuum needs ratio > 0 and n_max >= 1")
        w = [ratio ** (n - 1) for n in range(1, n_max + 1)]
        total = math.fsum(w)
        return cls({n: x / total for n, x in enumerate(w, start=1)}, profile, renormalize)

    @classmethod
    def flat(cls, mode_ids: Sequence[ModeRef], p: Mapping[int, float]) -> "VacuumSpec":
        """Equal amplitude ``1/sqrt(M)`` on each of the ``M`` given modes."""
        c = 1.0 / math.sqrt(len(mode_ids))
        return cls(p, {m: c for m in mode_ids}, renormalize=True)

    @property
    def p(self) -> Mapping[int, float]:
        return self._p

    @property
    def profile(self) -> Mapping[str, complex]:
        return self._profile

    @property
    def max_oscillators(self) -> int:
        return max(self._p)

    def weight(self, mode: ModeRef) -> float:
        """``|O_l|^2`` (zero for modes outside the profile)."""
        return abs(self._profile.get(_mode_id(mode), 0.0)) ** 2

    def inv_n(self, k: int = 1) -> float:
        return inv_n_moment(self, k)

    def __repr__(self):
        return f"VacuumSpec(p={dict(self._p)!r}, profile={dict(self._profile)!r})"

    # -- file format -----------------------------------------------------------

    _KEYS = {"p", "profile", "renormalize"}

    @classmethod
    def from_dict(cls, data: Mapping) -> "VacuumSpec":
        extra = set(data) - cls._KEYS
        if extra:
            raise UnsupportedVacuum(
                f"only product-form vacua (keys p, profile, renormalize) are supported; "
                f"got extra keys {sorted(extra)}")
        try:
            p = {int(n): float(w) for n, w in data["p"].items()}
            profile = {e["id"]: complex(float(e.get("re", 0.0)), float(e.get("im", 0.0)))
                       for e in data["profile"]}
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise InvalidVacuum(f"malformed vacuum description: {exc}") from None
        if len(profile) != len(data["profile"]):
            raise InvalidVacuum("duplicate mode id in profile")
        return cls(p, profile, bool(data.get("renormalize", False)))

    @classmethod
    def from_json(cls, text: str) -> "VacuumSpec":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "VacuumSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_dict(self) -> dict:
        return {
            "p": {str(n): w for n, w in self._p.items()},
            "profile": [{"id": k, "re": a.real, "im": a.imag} for k, a in self._profile.items()],
            "renormalize": False,
        }


class MomentRequest:
    """Multiset of unit powers, e.g. ``{"k1": 2, "k2": 1}`` for one(k1)^2 one(k2)."""

    __slots__ = ("powers",)

    def __init__(self, powers: Mapping[ModeRef, int] | Iterable[tuple[ModeRef, int]]):
        items = powers.items() if isinstance(powers, Mapping) else powers
        acc: Counter = Counter()
        for m, k in items:
            if int(k) != k or k < 1:
                raise ValueError(f"unit powers must be positive integers, got {k!r}")
            acc[_mode_id(m)] += int(k)
        self.powers: Mapping[str, int] = MappingProxyType(dict(sorted(acc.items())))

    @property
    def total(self) -> int:
        return sum(self.powers.values())

    def slots(self) -> list[str]:
        """The request spelled out as one mode id per unit factor."""
        return [m for m, k in self.powers.items() for _ in range(k)]

    def __repr__(self):
        return f"MomentRequest({dict(self.powers)!r})"


def _as_request(req) -> MomentRequest:
    return req if isinstance(req, MomentRequest) else MomentRequest(req)


def inv_n_moment(vac: VacuumSpec, k: int) -> float:
    """``<1/n^k> = sum_n p_n / n^k``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return math.fsum(w / n ** k for n, w in vac.p.items())


@lru_cache(maxsize=None)
def stirling2(k: int, b: int) -> int:
    """Number of partitions of a k-set into b nonempty blocks."""
    if k == b:
        return 1
    if b == 0 or b > k:
        return 0
    return b * stirling2(k - 1, b) + stirling2(k - 1, b - 1)


def _falling_ratio(n: int, b: int, k: int) -> float:
    """n(n-1)...(n-b+1) / n^k, evaluated without overflow for large n."""
    if b > n:
        return 0.0
    r = 1.0
    for i in range(b):
        r *= 1.0 - i / n
    return r * float(n) ** (b - k)


def _check_cap(total: int, cap: int):
    if total > cap:
        raise MomentTooLarge(f"total unit power {total} exceeds cap {cap}")


def unit_moment(vac: VacuumSpec, req, *, cap: int = DEFAULT_MOMENT_CAP) -> float:
    """``<0| one(l1)^k1 ... one(lr)^kr |0>`` for a product vacuum.

    Mode-homogeneous partitions factorize over modes, so the Bell(k) partitions
    are counted per mode with Stirling numbers: a mode with power ``k_l``
    split into ``b_l`` blocks contributes ``S(k_l, b_l) |O_l|^(2 b_l)``, and the
    oscillator assignment count depends only on the total block number.
    """
    req = _as_request(req)
    k = req.total
    _check_cap(k, cap)
    if k == 0:
        return 1.0
    # poly[b] = sum over partitions with b blocks of prod |O_block|^2
    poly = [1.0]
    for mode, power in req.powers.items():
        w = vac.weight(mode)
        if w == 0.0:
            return 0.0
        factor = [0.0] + [stirling2(power, b) * w ** b for b in range(1, power + 1)]
        new = [0.0] * (len(poly) + len(factor) - 1)
        for i, x in enumerate(poly):
            for j, y in enumerate(factor):
                new[i + j] += x * y
        poly = new
    return math.fsum(
        pn * math.fsum(coef * _falling_ratio(n, b, k) for b, coef in enumerate(poly) if coef)
        for n, pn in vac.p.items()
    )


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    """All set partitions of ``items`` (Bell(len(items)) of them)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def unit_moment_enumerated(vac: VacuumSpec, req, *, cap: int = 9) -> float:
    """Same quantity as :func:`unit_moment` by walking every set partition.

    Exponential in the total power; intended as a cross-check.
    """
    req = _as_request(req)
    _check_cap(req.total, cap)
    slots = req.slots()
    k = len(slots)
    by_blocks: Counter = Counter()
    for part in set_partitions(slots):
        weight = 1.0
        for block in part:
            if any(m != block[0] for m in block):
                weight = 0.0
                break
            weight *= vac.weight(block[0])
        if weight:
            by_blocks[len(part)] += weight
    return math.fsum(
        pn * math.fsum(w * _falling_ratio(n, b, k) for b, w in by_blocks.items())
        for n, pn in vac.p.items()
    )


def vev(vac: VacuumSpec, form: NormalForm, *, cap: int = DEFAULT_MOMENT_CAP) -> complex:
    """Vacuum expectation of a normal form.

    Any term holding a creator or an annihilator vanishes on the vacuum;
    pure-unit terms contribute ``coeff * unit_moment``.
    """
    total = 0j
    for t in form.terms:
        if t.is_scalar_unit:
            req = MomentRequest([(m.id, p) for m, p in t.units])
            total += complex(t.coeff) * unit_moment(vac, req, cap=cap)
    return total


def nphoton_norm(vac: VacuumSpec, mode: ModeRef, n_photons: int, *,
                 cap: int = DEFAULT_MOMENT_CAP) -> float:
    """``<0| one(l)^N |0>``: the norm factor of the N-photon state in mode l."""
    if n_photons < 1:
        raise ValueError("photon number must be positive")
    return unit_moment(vac, {_mode_id(mode): n_photons}, cap=cap)
