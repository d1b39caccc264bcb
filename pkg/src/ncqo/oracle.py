"""Dense-matrix realization of the one- and multi-oscillator constructions.

One oscillator lives on ``C^M (x) C^D``: a mode register (``M`` modes) times a
truncated number basis (``D`` levels), index ``mode * D + level``.  The
multi-oscillator space is the direct sum of ``n``-fold tensor powers,
``n = 1..N``; every operator here is block diagonal over that sum and is stored
as one dense block per sector.

One-oscillator operators ``X`` are extended sector-wise as
``c_n * sum_j 1 (x) ... (x) X_j (x) ... (x) 1``; the units pick up ``c_n**2``.

Truncation only corrupts matrix elements that touch the top number level, so
checks are restricted to columns whose oscillators all sit at or below
``D - 2`` (see :func:`safe_columns`).

Nothing in this module uses the symbolic engine; it is the independent check
for it.
"""

from __future__ import annotations

import itertools
import math
import struct
import warnings
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .algebra import Generator, Kind, ModeLabel, NormalForm, OperatorWord
from .errors import DimensionCap, TruncationWarning, UnsupportedVacuum
from .vacuum import VacuumSpec

__all__ = [
    "OracleConfig",
    "FieldMode",
    "DenseOperator",
    "SectorState",
    "build_generators",
    "vacuum_state",
    "vev_oracle",
    "ccr_vev",
    "safe_columns",
    "algebra_deviations",
    "hamiltonians",
    "heisenberg_phase_check",
    "coherent_state",
    "coherent_superposition",
    "one_oscillator_state",
    "field_averages",
    "classical_field_averages",
    "circular_polarization",
    "dump_matrix",
    "load_matrix",
]

DEFAULT_DIM_CAP = 20_000
_SPARSE_PRODUCT_MIN = 400  # block size above which products go through CSR


def inverse_sqrt_weights(n: int) -> float:
    return 1.0 / math.sqrt(n)


@dataclass(frozen=True)
class FieldMode:
    """Geometric data of a mode: wave vector and (complex, unit) polarization."""

    kappa: tuple[float, float, float]
    polarization: tuple[complex, complex, complex]

    def __post_init__(self):
        object.__setattr__(self, "kappa", tuple(float(k) for k in self.kappa))
        object.__setattr__(self, "polarization", tuple(complex(e) for e in self.polarization))

    @property
    def direction(self) -> np.ndarray:
        k = np.asarray(self.kappa)
        return k / np.linalg.norm(k)


def circular_polarization(kappa: Sequence[float], s: int) -> tuple[complex, complex, complex]:
    """Helicity ``s = +-1`` polarization vector transverse to ``kappa``."""
    n = np.asarray(kappa, dtype=float)
    n = n / np.linalg.norm(n)
    trial = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = trial - n * (trial @ n)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    e = (u + 1j * s * v) / math.sqrt(2.0)
    return tuple(complex(x) for x in e)


@dataclass(frozen=True)
class OracleConfig:
    modes: tuple[ModeLabel, ...]
    fock_dim: int
    max_oscillators: int = 1
    weights: Callable[[int], float] = inverse_sqrt_weights
    dim_cap: int = DEFAULT_DIM_CAP
    field_data: Optional[Mapping[str, FieldMode]] = None
    volume: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("need at least one mode")
        if len({m.id for m in self.modes}) != len(self.modes):
            raise ValueError("duplicate mode ids")
        if self.fock_dim < 2:
            raise ValueError("fock_dim must be >= 2")
        if self.max_oscillators < 1:
            raise ValueError("max_oscillators must be >= 1")

    @property
    def local_dim(self) -> int:
        return len(self.modes) * self.fock_dim

    def sector_dim(self, n: int) -> int:
        return self.local_dim ** n

    @property
    def total_dim(self) -> int:
        return sum(self.sector_dim(n) for n in self.sectors)

    @property
    def sectors(self) -> range:
        return range(1, self.max_oscillators + 1)

    def mode_index(self, mode: Union[str, ModeLabel]) -> int:
        mid = mode.id if isinstance(mode, ModeLabel) else mode
        for i, m in enumerate(self.modes):
            if m.id == mid:
                return i
        raise KeyError(mid)

    def check_dims(self):
        if self.total_dim > self.dim_cap:
            raise DimensionCap(f"direct-sum dimension {self.total_dim} exceeds cap {self.dim_cap}")

    def c(self, n: int) -> float:
        return float(self.weights(n))


# -- block containers --------------------------------------------------------------

def _is_big(x) -> bool:
    return x.shape[0] >= _SPARSE_PRODUCT_MIN


def _matmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Dense product; large blocks are routed through CSR (same entries, far fewer flops)."""
    if _is_big(x):
        return np.asarray((sp.csr_array(x) @ sp.csr_array(y)).toarray())
    return x @ y


class DenseOperator:
    """Block-diagonal operator: ``blocks[n - 1]`` acts on the n-oscillator sector."""

    __slots__ = ("blocks", "_csr")

    def __init__(self, blocks: Sequence[np.ndarray]):
        self.blocks = tuple(blocks)
        self._csr = None

    def _apply(self, vectors):
        if self._csr is None:
            self._csr = tuple(sp.csr_array(b) if _is_big(b) else None for b in self.blocks)
        return (x @ v if s is None else s @ v
                for x, s, v in zip(self.blocks, self._csr, vectors))

    @property
    def shape(self) -> tuple[int, int]:
        d = sum(b.shape[0] for b in self.blocks)
        return d, d

    def sector(self, n: int) -> np.ndarray:
        return self.blocks[n - 1]

    def adjoint(self) -> "DenseOperator":
        return DenseOperator(b.conj().T if np.iscomplexobj(b) else b.T for b in self.blocks)

    def __matmul__(self, other):
        if isinstance(other, DenseOperator):
            return DenseOperator(_matmul(x, y) for x, y in zip(self.blocks, other.blocks))
        if isinstance(other, SectorState):
            return SectorState(self._apply(other.blocks))
        return NotImplemented

    def __add__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(x + y for x, y in zip(self.blocks, other.blocks))

    def __sub__(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(x - y for x, y in zip(self.blocks, other.blocks))

    def __mul__(self, scalar) -> "DenseOperator":
        return DenseOperator(scalar * x for x in self.blocks)

    __rmul__ = __mul__

    def dense(self) -> np.ndarray:
        """Full direct-sum matrix (small configurations only)."""
        return scipy.linalg.block_diag(*self.blocks)

    def expectation(self, state: "SectorState") -> complex:
        return complex(sum(np.vdot(v, x @ v) for x, v in zip(self.blocks, state.blocks)))


class SectorState:
    """A vector of the direct-sum space, one array per sector."""

    __slots__ = ("blocks",)

    def __init__(self, blocks: Sequence[np.ndarray]):
        self.blocks = tuple(np.asarray(b) for b in blocks)

    def __add__(self, other: "SectorState") -> "SectorState":
        return SectorState(x + y for x, y in zip(self.blocks, other.blocks))

    def __sub__(self, other: "SectorState") -> "SectorState":
        return SectorState(x - y for x, y in zip(self.blocks, other.blocks))

    def __mul__(self, scalar) -> "SectorState":
        return SectorState(scalar * x for x in self.blocks)

    __rmul__ = __mul__

    def vdot(self, other: "SectorState") -> complex:
        return complex(sum(np.vdot(x, y) for x, y in zip(self.blocks, other.blocks)))

    def norm(self) -> float:
        return math.sqrt(sum(float(np.vdot(x, x).real) for x in self.blocks))

    def flat(self) -> np.ndarray:
        return np.concatenate(self.blocks)


# -- construction -----------------------------------------------------------------------

def _lowering(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)


def _projector(m: int, i: int) -> np.ndarray:
    p = np.zeros((m, m))
    p[i, i] = 1.0
    return p


def _kron_sum(x: np.ndarray, n: int) -> np.ndarray:
    """sum_j 1 (x) ... (x) x_j (x) ... (x) 1 over n tensor factors."""
    d = x.shape[0]
    xs = sp.csr_array(x)
    acc = None
    for j in range(n):
        term = sp.kron(sp.kron(sp.identity(d ** j, format="csr"), xs),
                       sp.identity(d ** (n - j - 1), format="csr"), format="csr")
        acc = term if acc is None else acc + term
    return acc.toarray()


def local_operators(cfg: OracleConfig) -> dict[Generator, np.ndarray]:
    """One-oscillator matrices ``P_l (x) a``, ``P_l (x) a^dag``, ``P_l (x) 1``."""
    m, d = len(cfg.modes), cfg.fock_dim
    low = _lowering(d)
    out = {}
    for i, mode in enumerate(cfg.modes):
        p = _projector(m, i)
        out[Generator(Kind.ANNIHILATE, mode)] = np.kron(p, low)
        out[Generator(Kind.CREATE, mode)] = np.kron(p, low.T)
        out[Generator(Kind.UNIT, mode)] = np.kron(p, np.eye(d))
    return out


def build_generators(cfg: OracleConfig) -> dict[Generator, DenseOperator]:
    """Multi-oscillator matrices of every ``a``, ``ad`` and ``one`` in ``cfg``.

    Creators are stored as transposed views of the annihilators.
    """
    cfg.check_dims()
    local = local_operators(cfg)
    out: dict[Generator, DenseOperator] = {}
    for mode in cfg.modes:
        a_loc = local[Generator(Kind.ANNIHILATE, mode)]
        u_loc = local[Generator(Kind.UNIT, mode)]
        a_blocks, u_blocks = [], []
        for n in cfg.sectors:
            c = cfg.c(n)
            a_blocks.append(c * _kron_sum(a_loc, n))
            u_blocks.append(c * c * _kron_sum(u_loc, n))
        a_op = DenseOperator(a_blocks)
        out[Generator(Kind.ANNIHILATE, mode)] = a_op
        out[Generator(Kind.CREATE, mode)] = a_op.adjoint()
        out[Generator(Kind.UNIT, mode)] = DenseOperator(u_blocks)
    return out


def _symmetrize(vec: np.ndarray, n: int, d: int) -> np.ndarray:
    if n == 1:
        return vec
    t = vec.reshape((d,) * n)
    perms = list(itertools.permutations(range(n)))
    acc = sum(np.transpose(t, p) for p in perms) / len(perms)
    return acc.reshape(-1)


def _tensor_power(v: np.ndarray, n: int) -> np.ndarray:
    out = v
    for _ in range(n - 1):
        out = np.kron(out, v)
    return out


def vacuum_state(cfg: OracleConfig, vac: VacuumSpec) -> SectorState:
    """``sum_n sqrt(p_n) |O>^{(x)n}`` truncated to the configured sectors."""
    if vac.max_oscillators > cfg.max_oscillators:
        raise UnsupportedVacuum(
            f"vacuum has p_n > 0 for n = {vac.max_oscillators} > N = {cfg.max_oscillators}")
    one = np.zeros(cfg.local_dim, dtype=complex)
    for mid, amp in vac.profile.items():
        if amp != 0:
            one[cfg.mode_index(mid) * cfg.fock_dim] = amp
    blocks = []
    for n in cfg.sectors:
        w = vac.p.get(n, 0.0)
        vec = math.sqrt(w) * _tensor_power(one, n) if w else np.zeros(cfg.sector_dim(n), complex)
        blocks.append(_symmetrize(vec, n, cfg.local_dim))
    return SectorState(blocks)


def apply_word(gens: Mapping[Generator, DenseOperator], word: OperatorWord,
               state: SectorState) -> SectorState:
    for g in reversed(word.factors):
        state = gens[g] @ state
    return state * word.coefficient


def apply_form(gens: Mapping[Generator, DenseOperator], form: NormalForm,
               state: SectorState) -> SectorState:
    """Matrix action of a normal form: sum over its terms of the term products."""
    out = state * 0
    for t in form.terms:
        out = out + apply_word(gens, t.to_word(), state)
    return out


def vev_oracle(cfg: OracleConfig, vac: VacuumSpec, word: OperatorWord,
               gens: Optional[Mapping[Generator, DenseOperator]] = None) -> complex:
    """``<0|word|0>`` by explicit matrix-vector products."""
    creators = sum(g.kind is Kind.CREATE for g in word.factors)
    if creators >= cfg.fock_dim:
        raise ValueError(f"word has {creators} creators; fock_dim {cfg.fock_dim} too small")
    if gens is None:
        gens = build_generators(cfg)
    vac_state = vacuum_state(cfg, vac)
    return vac_state.vdot(apply_word(gens, word, vac_state))


def ccr_vev(modes: Sequence[ModeLabel], fock_dim: int, word: OperatorWord) -> complex:
    """Canonical (independent oscillators, ``[a, a^dag] = 1``) vacuum expectation.

    Units are the identity here.
    """
    modes = list(modes)
    creators = sum(g.kind is Kind.CREATE for g in word.factors)
    if creators >= fock_dim:
        raise ValueError("fock_dim too small for this word")
    low = _lowering(fock_dim)
    eye = np.eye(fock_dim)
    ops = {}
    for i, mode in enumerate(modes):
        mats = [low if j == i else eye for j in range(len(modes))]
        a_full = mats[0]
        for mat in mats[1:]:
            a_full = np.kron(a_full, mat)
        ops[Generator(Kind.ANNIHILATE, mode)] = a_full
        ops[Generator(Kind.CREATE, mode)] = a_full.T
        ops[Generator(Kind.UNIT, mode)] = np.eye(a_full.shape[0])
    vec = np.zeros(fock_dim ** len(modes))
    vec[0] = 1.0
    out = vec.astype(complex)
    for g in reversed(word.factors):
        out = ops[g] @ out
    return complex(word.coefficient) * complex(vec @ out)


# -- truncation-safe index sets ----------------------------------------------------------

def _levels(cfg: OracleConfig, n: int) -> np.ndarray:
    """(sector_dim, n) array of number levels per oscillator."""
    idx = np.arange(cfg.sector_dim(n))
    digits = np.empty((idx.size, n), dtype=np.int64)
    rest = idx
    for j in range(n - 1, -1, -1):
        digits[:, j] = rest % cfg.local_dim
        rest = rest // cfg.local_dim
    return digits % cfg.fock_dim


def safe_columns(cfg: OracleConfig, n: int, margin: int = 1) -> np.ndarray:
    """Indices of sector-n basis states with every level <= D - 1 - margin."""
    return np.flatnonzero((_levels(cfg, n) <= cfg.fock_dim - 1 - margin).all(axis=1))


def low_excitation_columns(cfg: OracleConfig, n: int, max_total: int) -> np.ndarray:
    """Indices of sector-n basis states with total excitation <= max_total."""
    return np.flatnonzero(_levels(cfg, n).sum(axis=1) <= max_total)


def _max_abs(x) -> float:
    if sp.issparse(x):
        return float(np.abs(x.data).max(initial=0.0))
    return float(np.abs(x).max(initial=0.0))


def algebra_deviations(cfg: OracleConfig,
                       gens: Optional[Mapping[Generator, DenseOperator]] = None) -> dict[str, float]:
    """Largest entrywise violation of each non-CCR relation on the safe subspace.

    Keys: ``[a,ad]``, ``[a,a]``, ``[ad,ad]``, ``[one,a]``, ``[one,ad]`` and
    ``sum one`` (resolution of identity, checked on the full space).
    """
    if gens is None:
        gens = build_generators(cfg)
    dev = dict.fromkeys(["[a,ad]", "[a,a]", "[ad,ad]", "[one,a]", "[one,ad]", "sum one"], 0.0)

    def G(kind, mode):
        return gens[Generator(kind, mode)]

    A, C, U = Kind.ANNIHILATE, Kind.CREATE, Kind.UNIT
    for n in cfg.sectors:
        safe = safe_columns(cfg, n)
        # large sectors are checked in CSR form so no dense product is ever held
        big = _is_big(G(U, cfg.modes[0]).sector(n))
        mats = {g: (sp.csr_array(op.sector(n)) if big else op.sector(n)) for g, op in gens.items()}

        def comm(x, y):
            # all rows, safe columns
            return x @ y[:, safe] - y @ x[:, safe]

        total_one = sum(mats[Generator(U, m)] for m in cfg.modes)
        eye = sp.identity(total_one.shape[0], format="csr") if big else np.eye(total_one.shape[0])
        dev["sum one"] = max(dev["sum one"], _max_abs(total_one - eye))
        for l, m in itertools.product(cfg.modes, repeat=2):
            expect = mats[Generator(U, l)][:, safe] if l == m else 0.0
            pairs = (("[a,ad]", A, C), ("[a,a]", A, A), ("[ad,ad]", C, C),
                     ("[one,a]", U, A), ("[one,ad]", U, C))
            for key, kl, km in pairs:
                val = comm(mats[Generator(kl, l)], mats[Generator(km, m)])
                if key == "[a,ad]":
                    val = val - expect
                dev[key] = max(dev[key], _max_abs(val))
        del mats
    return dev


# -- Hamiltonians and dynamics ----------------------------------------------------------------

def _one_oscillator_energy(cfg: OracleConfig) -> np.ndarray:
    """sum_l omega_l P_l (x) (1/2){a, a^dag} with the truncated ladder matrices."""
    low = _lowering(cfg.fock_dim)
    anti = 0.5 * (low.T @ low + low @ low.T)
    m = len(cfg.modes)
    return sum(mode.omega * np.kron(_projector(m, i), anti) for i, mode in enumerate(cfg.modes))


def hamiltonians(cfg: OracleConfig, gens: Optional[Mapping[Generator, DenseOperator]] = None
                 ) -> tuple[DenseOperator, DenseOperator]:
    """``(H_script, H_bold)``.

    ``H_script`` is the noninteracting extension (sum of one-oscillator
    energies, weight 1 on every sector); ``H_bold`` is the field bilinear
    ``(1/2) sum_l omega_l (a^dag a + a a^dag)`` built from the multi-oscillator
    generators.
    """
    cfg.check_dims()
    if gens is None:
        gens = build_generators(cfg)
    h1 = _one_oscillator_energy(cfg)
    script = DenseOperator(_kron_sum(h1, n) for n in cfg.sectors)
    bold_blocks = []
    for n in cfg.sectors:
        acc = np.zeros((cfg.sector_dim(n),) * 2)
        for mode in cfg.modes:
            a = gens[Generator(Kind.ANNIHILATE, mode)].sector(n)
            ad = gens[Generator(Kind.CREATE, mode)].sector(n)
            acc += 0.5 * mode.omega * (_matmul(ad, a) + _matmul(a, ad))
        bold_blocks.append(acc)
    return script, DenseOperator(bold_blocks)


def heisenberg_phase_check(cfg: OracleConfig, mode: Union[str, ModeLabel], t: float,
                           generator: str = "script", target: Optional[str] = None,
                           gens=None, hams=None) -> float:
    """Max deviation of ``e^{iHt} a e^{-iHt}`` from the expected evolved operator.

    ``generator`` picks ``H_script`` or ``H_bold``.  ``target`` picks the
    comparison: ``"phase"`` is ``e^{-i omega t} a``, ``"unit"`` is
    ``e^{-i omega t one} a``; by default each Hamiltonian is compared with the
    form it is expected to produce (script -> phase, bold -> unit).  Columns
    touching the top number level are excluded.
    """
    if gens is None:
        gens = build_generators(cfg)
    if hams is None:
        hams = hamiltonians(cfg, gens)
    ham = {"script": hams[0], "bold": hams[1]}[generator]
    target = target or {"script": "phase", "bold": "unit"}[generator]
    label = cfg.modes[cfg.mode_index(mode)]
    a = gens[Generator(Kind.ANNIHILATE, label)]
    unit = gens[Generator(Kind.UNIT, label)]
    worst = 0.0
    for n in cfg.sectors:
        h = ham.sector(n)
        u = scipy.linalg.expm(1j * t * h)
        evolved = u @ a.sector(n) @ u.conj().T
        if target == "phase":
            expected = np.exp(-1j * label.omega * t) * a.sector(n)
        else:
            expected = scipy.linalg.expm(-1j * label.omega * t * unit.sector(n)) @ a.sector(n)
        if generator == "bold":
            cols = low_excitation_columns(cfg, n, cfg.fock_dim - 2)
        else:
            cols = safe_columns(cfg, n)
        worst = max(worst, float(np.abs(evolved[:, cols] - expected[:, cols]).max(initial=0.0)))
    return worst


# -- states --------------------------------------------------------------------------------------

def _coherent_vector(beta: complex, d: int) -> tuple[np.ndarray, float]:
    """Normalized truncated coherent state and the discarded probability."""
    k = np.arange(d)
    log_fact = np.array([math.lgamma(i + 1) for i in k])
    if beta == 0:
        amps = np.zeros(d, complex)
        amps[0] = 1.0
        return amps, 0.0
    amps = np.exp(-abs(beta) ** 2 / 2 + k * np.log(complex(beta)) - 0.5 * log_fact)
    kept = float(np.vdot(amps, amps).real)
    return amps / math.sqrt(kept), max(0.0, 1.0 - kept)


def _f_table(f, n_max: int) -> dict[int, complex]:
    if isinstance(f, Mapping):
        table = {int(n): complex(v) for n, v in f.items()}
    else:
        table = {n: complex(v) for n, v in enumerate(f, start=1)}
    if any(n < 1 or n > n_max for n, v in table.items() if v != 0):
        raise UnsupportedVacuum(f"f has weight outside sectors 1..{n_max}")
    if abs(sum(abs(v) ** 2 for v in table.values()) - 1) > 1e-12:
        raise ValueError("sum |f_n|^2 must be 1")
    return table


def coherent_state(cfg: OracleConfig, mode: Union[str, ModeLabel], alpha: complex,
                   f=(1.0,), *, fidelity: float = 1e-6) -> SectorState:
    """Eigenvector of the multi-oscillator annihilator of ``mode`` with eigenvalue ``alpha``.

    Sector n holds ``f_n |mode, alpha / (n c_n)>^{(x)n}``.
    """
    table = _f_table(f, cfg.max_oscillators)
    i = cfg.mode_index(mode)
    d = cfg.fock_dim
    blocks = []
    for n in cfg.sectors:
        fn = table.get(n, 0)
        if fn == 0:
            blocks.append(np.zeros(cfg.sector_dim(n), complex))
            continue
        amps, lost = _coherent_vector(alpha / (n * cfg.c(n)), d)
        if lost > fidelity:
            warnings.warn(f"coherent amplitude {alpha / (n * cfg.c(n)):.3g} loses {lost:.2e} "
                          f"of its norm at fock_dim={d}", TruncationWarning, stacklevel=2)
        one = np.zeros(cfg.local_dim, complex)
        one[i * d:(i + 1) * d] = amps
        blocks.append(_symmetrize(fn * _tensor_power(one, n), n, cfg.local_dim))
    return SectorState(blocks)


def coherent_superposition(cfg: OracleConfig, components: Mapping[str, tuple[complex, complex]],
                           f=(1.0,)) -> SectorState:
    """``sum_l Phi_l |alpha_l>`` from ``{mode_id: (Phi_l, alpha_l)}``."""
    state = None
    for mid, (phi, alpha) in components.items():
        part = coherent_state(cfg, mid, alpha, f) * phi
        state = part if state is None else state + part
    return state


def one_oscillator_state(cfg: OracleConfig, components: Mapping[str, tuple[complex, complex]]
                         ) -> SectorState:
    """One-oscillator state ``sum_l Phi_l |l>|alpha_l>`` (sector 1 only)."""
    d = cfg.fock_dim
    vec = np.zeros(cfg.local_dim, complex)
    for mid, (phi, alpha) in components.items():
        i = cfg.mode_index(mid)
        amps, lost = _coherent_vector(alpha, d)
        if lost > 1e-6:
            warnings.warn(f"coherent amplitude {alpha} truncated at fock_dim={d}",
                          TruncationWarning, stacklevel=2)
        vec[i * d:(i + 1) * d] += phi * amps
    blocks = [vec] + [np.zeros(cfg.sector_dim(n), complex) for n in cfg.sectors if n > 1]
    return SectorState(blocks)


# -- classical field averages ------------------------------------------------------------------

def _field_operator_sum(cfg: OracleConfig, t: float, x: Sequence[float]):
    """Component matrices of A, E, B on the one-oscillator space."""
    if cfg.field_data is None:
        raise ValueError("OracleConfig.field_data is required for field averages")
    local = local_operators(cfg)
    dim = cfg.local_dim
    A = np.zeros((3, dim, dim), complex)
    E = np.zeros((3, dim, dim), complex)
    B = np.zeros((3, dim, dim), complex)
    xv = np.asarray(x, dtype=float)
    for mode in cfg.modes:
        fm = cfg.field_data[mode.id]
        w = mode.omega
        a = local[Generator(Kind.ANNIHILATE, mode)]
        ad = local[Generator(Kind.CREATE, mode)]
        phase = np.exp(-1j * w * t + 1j * np.dot(fm.kappa, xv))
        e = np.asarray(fm.polarization)
        ne = np.cross(fm.direction, e)
        for i in range(3):
            A[i] += math.sqrt(1 / (2 * w * cfg.volume)) * (a * phase * e[i] + ad * np.conj(phase * e[i]))
            E[i] += 1j * math.sqrt(w / (2 * cfg.volume)) * (a * phase * e[i] - ad * np.conj(phase * e[i]))
            B[i] += 1j * math.sqrt(w / (2 * cfg.volume)) * (a * phase * ne[i] - ad * np.conj(phase * ne[i]))
    return A, E, B


def field_averages(cfg: OracleConfig, state: SectorState, t: float, x: Sequence[float]
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``<A(t,x)>, <E(t,x)>, <B(t,x)>`` for a one-oscillator state, by matrix evaluation."""
    if any(np.any(b) for b in state.blocks[1:]):
        raise ValueError("field averages are defined for one-oscillator states only")
    v = state.blocks[0]
    out = []
    for ops in _field_operator_sum(cfg, t, x):
        vals = np.array([np.vdot(v, ops[i] @ v) for i in range(3)])
        out.append(vals.real)
    return out[0], out[1], out[2]


def classical_field_averages(cfg: OracleConfig, components: Mapping[str, tuple[complex, complex]],
                             t: float, x: Sequence[float]):
    """Closed-form averages: probability-weighted monochromatic classical waves."""
    A, E, B = (np.zeros(3, complex) for _ in range(3))
    xv = np.asarray(x, dtype=float)
    for mid, (phi, alpha) in components.items():
        mode = cfg.modes[cfg.mode_index(mid)]
        fm = cfg.field_data[mid]
        w, prob = mode.omega, abs(phi) ** 2
        wave = alpha * np.exp(-1j * (w * t - np.dot(fm.kappa, xv)))
        e = np.asarray(fm.polarization)
        ne = np.cross(fm.direction, e)
        A += prob * math.sqrt(1 / (2 * w * cfg.volume)) * (wave * e + np.conj(wave * e))
        E += prob * 1j * math.sqrt(w / (2 * cfg.volume)) * (wave * e - np.conj(wave * e))
        B += prob * 1j * math.sqrt(w / (2 * cfg.volume)) * (wave * ne - np.conj(wave * ne))
    return A.real, E.real, B.real


# -- binary dump --------------------------------------------------------------------------------

_MAGIC = b"NCQO"


def dump_matrix(path, matrix: np.ndarray) -> None:
    """Row-major little-endian complex128 with a 16-byte header (magic, rows, cols, pad)."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    rows, cols = m.shape
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<II", rows, cols) + b"\0" * 4)
        fh.write(np.ascontiguousarray(m, dtype="<c16").tobytes())


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != _MAGIC:
            raise ValueError("not an NCQO matrix file")
        rows, cols = struct.unpack("<II", header[4:12])
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != rows * cols:
        raise ValueError("truncated NCQO matrix file")
    return data.reshape(rows, cols).astype(complex)
