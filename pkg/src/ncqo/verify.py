"""Randomized agreement between the symbolic VEV and the matrix oracle."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .algebra import Generator, Kind, ModeTable, OperatorWord, normal_order
from .oracle import OracleConfig, build_generators, vacuum_state, apply_word
from .vacuum import VacuumSpec, vev

__all__ = ["AgreementConfig", "AgreementRow", "random_word", "random_vacuum", "agreement_suite"]


@dataclass(frozen=True)
class AgreementConfig:
    modes: tuple[str, ...] = ("k1", "k2")
    fock_dim: int = 8
    max_oscillators: int = 3
    words: int = 200
    max_length: int = 6
    tol: float = 1e-10
    seed: int = 0

    _KEYS = ("modes", "fock_dim", "max_oscillators", "words", "max_length", "tol", "seed")

    @classmethod
    def from_dict(cls, data: Mapping) -> "AgreementConfig":
        unknown = set(data) - set(cls._KEYS)
        if unknown:
            raise ValueError(f"unknown oracle config keys {sorted(unknown)}")
        kw = dict(data)
        if "modes" in kw:
            kw["modes"] = tuple(str(m) for m in kw["modes"])
        cfg = cls(**kw)
        if cfg.max_length >= cfg.fock_dim:
            # more creators than levels would hit the truncation edge
            raise ValueError("max_length must be below fock_dim")
        return cfg

    @classmethod
    def load(cls, path) -> "AgreementConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class AgreementRow:
    index: int
    word: str
    symbolic: complex
    matrix: complex

    @property
    def error(self) -> float:
        return abs(self.symbolic - self.matrix)

    def to_dict(self, tol: float) -> dict:
        return {
            "index": self.index,
            "word": self.word,
            "symbolic": [self.symbolic.real, self.symbolic.imag],
            "matrix": [self.matrix.real, self.matrix.imag],
            "error": self.error,
            "pass": self.error < tol,
        }


_KINDS = (Kind.ANNIHILATE, Kind.CREATE, Kind.UNIT)


def random_word(rng: np.random.Generator, table: ModeTable, max_length: int,
                balanced: bool = False) -> OperatorWord:
    """Uniform random word, or with ``balanced`` one whose creators and
    annihilators pair up mode by mode (the only words with a nonzero VEV)."""
    modes = list(table.values())
    n = int(rng.integers(1, max_length + 1))
    if not balanced:
        return OperatorWord(tuple(
            Generator(_KINDS[int(rng.integers(3))], modes[int(rng.integers(len(modes)))])
            for _ in range(n)))
    factors = []
    pairs = int(rng.integers(0, n // 2 + 1))
    for _ in range(pairs):
        m = modes[int(rng.integers(len(modes)))]
        factors += [Generator(Kind.ANNIHILATE, m), Generator(Kind.CREATE, m)]
    factors += [Generator(Kind.UNIT, modes[int(rng.integers(len(modes)))])
                for _ in range(n - 2 * pairs)]
    order = rng.permutation(len(factors))
    return OperatorWord(tuple(factors[i] for i in order))


def random_vacuum(rng: np.random.Generator, mode_ids, max_oscillators: int) -> VacuumSpec:
    p = rng.dirichlet(np.ones(max_oscillators))
    amps = rng.normal(size=len(mode_ids)) + 1j * rng.normal(size=len(mode_ids))
    return VacuumSpec({n: float(w) for n, w in enumerate(p, start=1)},
                      dict(zip(mode_ids, amps)), renormalize=True)


def agreement_suite(cfg: AgreementConfig = AgreementConfig()) -> list[AgreementRow]:
    """Evaluate ``cfg.words`` seeded random words both ways.

    A fresh random vacuum is drawn for every word, with weight on every
    sector ``1..max_oscillators``; odd-indexed words are drawn balanced.
    """
    table = ModeTable.from_ids(cfg.modes)
    ocfg = OracleConfig(tuple(table.values()), cfg.fock_dim, cfg.max_oscillators)
    gens = build_generators(ocfg)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for i in range(cfg.words):
        vac = random_vacuum(rng, cfg.modes, cfg.max_oscillators)
        word = random_word(rng, table, cfg.max_length, balanced=bool(i % 2))
        state = vacuum_state(ocfg, vac)
        mat = state.vdot(apply_word(gens, word, state))
        sym = vev(vac, normal_order(word))
        rows.append(AgreementRow(i, str(word), complex(sym), complex(mat)))
    return rows
