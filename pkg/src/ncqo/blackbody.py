"""Blackbody spectrum when the number of oscillators is a conserved boson number.

Natural units throughout (hbar = c = k_B = 1).  A mode of frequency ``omega``
carrying ``m`` oscillators with ``n`` excitations has energy
``m * omega * (n + 1/2)``; oscillators have chemical potential ``mu <= 0``.
Writing ``g = omega/2 - mu`` and ``x_m = exp(-beta m omega)``, the sums over
``n`` are geometric and only the Lambert-type series over ``m`` is truncated:

    Z       = sum_m exp(-beta m g) / (1 - x_m)
    n_bar   = Z^-1 sum_m m exp(-beta m g) x_m / (1 - x_m)^2
    rho_new = omega^3 / pi^2 * n_bar

Each truncated series reports a rigorous geometric bound on its tail.  The
m-sum stops once both tails are below ``tol * min(1, partial sum)``: absolute
for sums of order one and above, relative for the tiny sums at large ``|mu|``.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, Optional, Sequence

import numpy as np

from .errors import ConvergenceFailure

__all__ = [
    "ThermoParams",
    "SeriesResult",
    "SpectrumPoint",
    "partition_function",
    "mean_excitations",
    "mean_excitations_single",
    "series_result",
    "rho_new",
    "rho_planck",
    "rho_tsallis",
    "planck_peak",
    "sweep",
    "sweep_surface",
    "write_sweep_csv",
    "write_surface_csv",
    "default_grid",
    "DEFAULT_TOL",
    "DEFAULT_M_CAP",
]

DEFAULT_TOL = 1e-14
DEFAULT_M_CAP = 10**6
_CHUNK = 4096


@dataclass(frozen=True)
class ThermoParams:
    beta: float = 1.0
    mu: float = 0.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.mu <= 0:
            raise ValueError(f"mu must be <= 0, got {self.mu}")

    @classmethod
    def from_ratio(cls, mu_over_kT: float, beta: float = 1.0) -> "ThermoParams":
        return cls(beta=beta, mu=mu_over_kT / beta)


@dataclass(frozen=True)
class SeriesResult:
    z: float
    numerator: float
    terms: int
    tail_bound: float

    @property
    def n_bar(self) -> float:
        return self.numerator / self.z


def _tail_bounds(m: int, beta: float, omega: float, g: float) -> tuple[float, float]:
    """Bounds on the Z and numerator tails beyond term ``m``.

    For k > m: 1/(1 - x_k) <= 1/(1 - x_1), and x_k/(1 - x_k)^2 <= e^{-beta k omega}/(1 - x_1)^2.
    """
    one_minus_x1 = -math.expm1(-beta * omega)
    r = math.exp(-beta * g)
    z_tail = r ** (m + 1) / (-math.expm1(-beta * g)) / one_minus_x1
    s = math.exp(-beta * (g + omega))
    # sum_{k>m} k s^k = s^{m+1} ((m+1) - m s) / (1 - s)^2
    num_tail = s ** (m + 1) * ((m + 1) - m * s) / (-math.expm1(-beta * (g + omega))) ** 2 \
        / one_minus_x1 ** 2
    return z_tail, num_tail


def _series(p: ThermoParams, omega: float, tol: float, m_cap: int,
            m_max: Optional[int] = None) -> SeriesResult:
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    beta = p.beta
    g = omega / 2 - p.mu
    z_parts, num_parts = [], []
    start = 1
    last = m_max if m_max is not None else m_cap
    while start <= last:
        m = np.arange(start, min(start + _CHUNK, last + 1), dtype=float)
        decay = np.exp(-beta * m * g)
        one_minus_x = -np.expm1(-beta * m * omega)
        x = np.exp(-beta * m * omega)
        z_terms = decay / one_minus_x
        num_terms = m * decay * x / one_minus_x ** 2
        z_tail, num_tail = 0.0, 0.0
        if m_max is None:
            # first index whose tail is below tol on both series; sums below 1
            # (strongly negative mu) use tol relative to the partial sum instead
            z_acc = math.fsum(z_parts) + np.cumsum(z_terms)
            num_acc = math.fsum(num_parts) + np.cumsum(num_terms)
            for i, mi in enumerate(m):
                z_tail, num_tail = _tail_bounds(int(mi), beta, omega, g)
                if z_tail < tol * min(1.0, z_acc[i]) and num_tail < tol * min(1.0, num_acc[i]):
                    z_parts.extend(z_terms[: i + 1])
                    num_parts.extend(num_terms[: i + 1])
                    return SeriesResult(math.fsum(z_parts), math.fsum(num_parts), int(mi),
                                        max(z_tail, num_tail))
        z_parts.extend(z_terms)
        num_parts.extend(num_terms)
        start = int(m[-1]) + 1
    if m_max is not None:
        z_tail, num_tail = _tail_bounds(last, beta, omega, g)
        return SeriesResult(math.fsum(z_parts), math.fsum(num_parts), last, max(z_tail, num_tail))
    raise ConvergenceFailure(f"series not converged after {m_cap} terms (omega={omega}, mu={p.mu})")


def partition_function(p: ThermoParams, omega: float, *, tol: float = DEFAULT_TOL,
                       m_cap: int = DEFAULT_M_CAP) -> float:
    return _series(p, omega, tol, m_cap).z


def mean_excitations(p: ThermoParams, omega: float, *, tol: float = DEFAULT_TOL,
                     m_cap: int = DEFAULT_M_CAP) -> float:
    return _series(p, omega, tol, m_cap).n_bar


def series_result(p: ThermoParams, omega: float, *, tol: float = DEFAULT_TOL,
                  m_cap: int = DEFAULT_M_CAP, m_max: Optional[int] = None) -> SeriesResult:
    """Full truncated-series data; ``m_max`` forces a fixed number of terms."""
    return _series(p, omega, tol, m_cap, m_max)


def mean_excitations_single(p: ThermoParams, omega: float) -> float:
    """Mean excitation number with the oscillator sum restricted to ``m = 1``."""
    return _series(p, omega, 0.0, 1, m_max=1).n_bar


def rho_new(p: ThermoParams, omega: float, **kw) -> float:
    return omega ** 3 / math.pi ** 2 * mean_excitations(p, omega, **kw)


def rho_planck(p: ThermoParams, omega: float) -> float:
    x = p.beta * omega
    # e^-x / (1 - e^-x) underflows to 0 instead of overflowing at large x
    return omega ** 3 / math.pi ** 2 * math.exp(-x) / -math.expm1(-x)


def rho_tsallis(p: ThermoParams, omega: float, q: float) -> float:
    """Planck law with the Boltzmann factor replaced by a q-exponential.

    ``omega^3 / pi^2 / ([1 + (q-1) beta omega]^(1/(q-1)) - 1)``; for ``q < 1``
    the density vanishes beyond the cut-off ``1 + (q-1) beta omega <= 0``.
    """
    if not abs(q - 1) < 0.5:
        raise ValueError(f"|q - 1| must be below 0.5, got q={q}")
    x = p.beta * omega
    if q == 1:
        return rho_planck(p, omega)
    base = 1 + (q - 1) * x
    if base <= 0:
        return 0.0
    # (base^(1/(q-1)) - 1) computed as expm1 to keep precision near q = 1
    expo = math.log1p((q - 1) * x) / (q - 1)
    if expo > 700.0:
        return 0.0
    return omega ** 3 / math.pi ** 2 / math.expm1(expo)


def planck_peak(p: ThermoParams = ThermoParams()) -> float:
    """Frequency maximizing rho_planck: the root of ``3 (1 - e^-x) = x``, ``x = beta omega``."""
    from scipy.optimize import brentq

    x = brentq(lambda x: 3.0 * -math.expm1(-x) - x, 1.0, 5.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return x / p.beta


def default_grid(lo: float = 0.01, hi: float = 10.0, count: int = 512) -> np.ndarray:
    return np.linspace(lo, hi, count)


@dataclass(frozen=True)
class SpectrumPoint:
    omega: float
    rho_new: float
    rho_planck: float
    rho_tsallis: tuple[float, ...]
    m_terms_used: int
    tail_bound: float
    q_values: tuple[float, ...] = ()
    mu: float = 0.0

    @property
    def rho_tsallis_lo(self) -> Optional[float]:
        """Tsallis density for the smallest q requested."""
        if not self.q_values:
            return None
        return self.rho_tsallis[int(np.argmin(self.q_values))]

    @property
    def rho_tsallis_hi(self) -> Optional[float]:
        if not self.q_values:
            return None
        return self.rho_tsallis[int(np.argmax(self.q_values))]


def _threads() -> int:
    raw = os.environ.get("NCQO_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"NCQO_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"NCQO_THREADS must be a positive integer, got {raw!r}")
    return n


def _check_grid(grid: Sequence[float]) -> list[float]:
    g = [float(w) for w in grid]
    if not g or g[0] <= 0 or any(b <= a for a, b in zip(g, g[1:])):
        raise ValueError("omega grid must be nonempty, positive and strictly increasing")
    return g


def _point(p: ThermoParams, omega: float, qs: tuple[float, ...], tol: float) -> SpectrumPoint:
    res = _series(p, omega, tol, DEFAULT_M_CAP)
    return SpectrumPoint(
        omega=omega,
        rho_new=omega ** 3 / math.pi ** 2 * res.n_bar,
        rho_planck=rho_planck(p, omega),
        rho_tsallis=tuple(rho_tsallis(p, omega, q) for q in qs),
        m_terms_used=res.terms,
        tail_bound=res.tail_bound,
        q_values=qs,
        mu=p.mu,
    )


def sweep(p: ThermoParams, omega_grid: Iterable[float], q_list: Sequence[float] = (),
          out: Optional[IO[str]] = None, *, tol: float = DEFAULT_TOL,
          workers: Optional[int] = None) -> list[SpectrumPoint]:
    """Spectrum on a frequency grid, optionally written as CSV to ``out``.

    Points are independent and may be computed on ``workers`` threads
    (default ``NCQO_THREADS``); output order always follows the grid.
    """
    grid = _check_grid(omega_grid)
    qs = tuple(float(q) for q in q_list)
    workers = workers or _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda w: _point(p, w, qs, tol), grid))
    else:
        points = [_point(p, w, qs, tol) for w in grid]
    if out is not None:
        write_sweep_csv(points, qs, out, beta=p.beta)
    return points


def sweep_surface(beta: float, mu_over_kT: Sequence[float], omega_grid: Iterable[float],
                  out: Optional[IO[str]] = None, *, tol: float = DEFAULT_TOL,
                  workers: Optional[int] = None) -> list[SpectrumPoint]:
    """Long-format (mu, omega) sweep for surface and contour plots."""
    grid = _check_grid(omega_grid)
    points = []
    for r in mu_over_kT:
        points.extend(sweep(ThermoParams.from_ratio(r, beta), grid, (), None, tol=tol,
                            workers=workers))
    if out is not None:
        write_surface_csv(points, out, beta=beta)
    return points


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _q_label(q: float) -> str:
    return f"rho_tsallis_q{q:g}"


def write_sweep_csv(points: Sequence[SpectrumPoint], q_list: Sequence[float], out: IO[str],
                    beta: float = 1.0) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["omega_over_kBT", "rho_new", "rho_planck",
                *[_q_label(q) for q in q_list], "m_terms", "tail_bound"])
    for pt in points:
        w.writerow([_fmt(pt.omega * beta), _fmt(pt.rho_new), _fmt(pt.rho_planck),
                    *[_fmt(v) for v in pt.rho_tsallis], pt.m_terms_used, _fmt(pt.tail_bound)])


def write_surface_csv(points: Sequence[SpectrumPoint], out: IO[str], beta: float = 1.0) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["mu_over_kBT", "omega_over_kBT", "rho_new", "rho_planck", "m_terms", "tail_bound"])
    for pt in points:
        w.writerow([_fmt(pt.mu * beta), _fmt(pt.omega * beta), _fmt(pt.rho_new),
                    _fmt(pt.rho_planck), pt.m_terms_used, _fmt(pt.tail_bound)])
