import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncqo.blackbody import (
    SpectrumPoint,
    ThermoParams,
    default_grid,
    mean_excitations,
    mean_excitations_single,
    partition_function,
    planck_peak,
    rho_new,
    rho_planck,
    rho_tsallis,
    series_result,
    sweep,
    sweep_surface,
)
from ncqo.errors import ConvergenceFailure

# Frozen from a 40-digit brute-force double sum over (m, n) with no closed-form
# inner sum (both loops run until terms drop below 1e-45 of the leading one).
BRUTE_NBAR = {
    (1.0, 0.0): 0.3775335483523119722,
    (2.5, -0.8): 0.080132154791460132485,
    (0.05, 0.0): 14.132507237697204309,
    (0.01, 0.0): 77.698690300012103152,
    (1.0, -10.0): 0.58197129276949736264,
}
# Same oracle over the 512-point default grid at mu = -10 k_B T.
BRUTE_MAX_REL_DEV_MU_M10 = 1.13499435254e-5
BRUTE_ARGMAX_INDEX = 90
# Root of 3(1 - e^-x) = x, i.e. 3 + W0(-3 e^-3).
PLANCK_PEAK = 2.8214393721220787


def golden_section_max(f, lo, hi, tol=1e-10):
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    while b - a > tol:
        if f(c) > f(d):
            b = d
        else:
            a = c
        c, d = b - invphi * (b - a), a + invphi * (b - a)
    return (a + b) / 2


# -- params -------------------------------------------------------------------------------------

def test_params_validation():
    with pytest.raises(ValueError):
        ThermoParams(beta=0.0)
    with pytest.raises(ValueError):
        ThermoParams(mu=0.1)
    assert ThermoParams.from_ratio(-3.0, beta=2.0).mu == -1.5


# -- series ---------------------------------------------------------------------------------------

@pytest.mark.parametrize("omega, mu", sorted(BRUTE_NBAR))
def test_mean_excitations_against_brute_force(omega, mu):
    assert mean_excitations(ThermoParams(1.0, mu), omega) == pytest.approx(BRUTE_NBAR[(omega, mu)],
                                                                           rel=1e-13)


def test_partition_function_large_negative_mu():
    p = ThermoParams(1.0, -50.0)
    first = math.exp(-50.5) / -math.expm1(-1.0)
    assert partition_function(p, 1.0) == pytest.approx(first, rel=1e-12)


def test_partition_function_large_frequency():
    p = ThermoParams(1.0, -0.3)
    assert partition_function(p, 60.0) == pytest.approx(math.exp(-30.3), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 10.0), st.floats(-10.0, 0.0), st.floats(0.25, 4.0))
def test_tail_bound_reported_and_below_tolerance(omega, mu, beta):
    r = series_result(ThermoParams(beta, mu), omega)
    assert r.tail_bound < 1e-14
    assert r.terms >= 1 and r.z > 0 and r.n_bar >= 0


def test_tail_bound_is_rigorous():
    # the reported bound must dominate the true remainder of both series
    p = ThermoParams(1.0, 0.0)
    for omega in (0.05, 0.4, 2.0):
        short = series_result(p, omega, m_max=5)
        full = series_result(p, omega)
        assert full.z - short.z <= short.tail_bound
        assert full.numerator - short.numerator <= short.tail_bound


def test_convergence_failure_at_cap():
    with pytest.raises(ConvergenceFailure):
        series_result(ThermoParams(1.0, 0.0), 0.001, m_cap=10)


def test_restriction_to_single_oscillator_is_planck():
    p = ThermoParams(1.0, -2.0)
    for w in default_grid():
        assert mean_excitations_single(p, w) == pytest.approx(1 / math.expm1(w), rel=1e-12, abs=1e-12)


# -- densities ------------------------------------------------------------------------------------

def test_planck_closed_form():
    assert rho_planck(ThermoParams(), 1.0) == pytest.approx(1 / (math.pi ** 2 * (math.e - 1)), rel=1e-15)
    assert rho_planck(ThermoParams(), 800.0) == 0.0


def test_planck_peak():
    golden = golden_section_max(lambda w: rho_planck(ThermoParams(), w), 1.0, 5.0)
    assert golden == pytest.approx(PLANCK_PEAK, abs=1e-7)
    assert planck_peak() == pytest.approx(PLANCK_PEAK, rel=1e-15)
    assert planck_peak(ThermoParams(beta=2.0)) == pytest.approx(PLANCK_PEAK / 2, rel=1e-15)


def test_vanishes_at_low_frequency():
    p = ThermoParams()
    values = [rho_new(p, w) for w in (0.1, 0.01, 0.001)]
    assert values[0] > values[1] > values[2]
    assert values[2] < 1e-7


def test_low_frequency_ratio_below_one():
    p = ThermoParams()
    for w in (1.0, 0.1, 0.01, 0.001):
        assert 0.5 < rho_new(p, w) / rho_planck(p, w) < 1.0


def test_new_below_planck_near_peak_at_zero_mu():
    p = ThermoParams()
    for w in np.linspace(1.5, 4.5, 31):
        assert rho_new(p, w) < rho_planck(p, w)


def test_max_deviation_at_mu_minus_ten():
    p = ThermoParams(1.0, -10.0)
    pts = sweep(p, default_grid())
    dev = [abs(x.rho_new / x.rho_planck - 1) for x in pts]
    assert int(np.argmax(dev)) == BRUTE_ARGMAX_INDEX
    assert max(dev) == pytest.approx(BRUTE_MAX_REL_DEV_MU_M10, rel=1e-8)
    assert max(dev) < 1e-3


def test_planck_limit_monotone_in_mu():
    grid = default_grid()
    prev = None
    for mu in range(0, -11, -1):
        p = ThermoParams(1.0, float(mu))
        cur = np.array([abs(rho_new(p, w) - rho_planck(p, w)) for w in grid])
        if prev is not None:
            assert np.all((cur < prev) | (cur < 1e-12))
        prev = cur


def test_curve_ordering_at_peak():
    w = planck_peak()
    r0, r08, r10 = (rho_new(ThermoParams(1.0, mu), w) for mu in (0.0, -0.8, -10.0))
    assert r0 < r08 < r10 <= rho_planck(ThermoParams(), w)


def test_critical_temperature_trend():
    # mu = -k_B T0 fixed; in units of k_B T the ratio mu/k_BT = -T0/T
    w = planck_peak()
    devs = []
    for t0_over_t in (10.0, 6.0, 4.0, 3.5, 3.0, 2.0, 1.0):
        p = ThermoParams.from_ratio(-t0_over_t)
        devs.append(1 - rho_new(p, w) / rho_planck(p, w))
    assert all(a < b for a, b in zip(devs, devs[1:]))
    assert all(d < 0.01 for d in devs[:4])
    assert devs[-1] > 0.05


# -- Tsallis reference -----------------------------------------------------------------------------

def test_tsallis_q_one_is_planck():
    p = ThermoParams()
    for w in (0.01, 1.0, 2.8, 9.0):
        assert rho_tsallis(p, w, 1.0) == rho_planck(p, w)


def test_tsallis_sides_of_planck():
    p = ThermoParams()
    w = planck_peak()
    assert rho_tsallis(p, w, 0.95) < rho_planck(p, w) < rho_tsallis(p, w, 1.05)


def test_tsallis_cutoff():
    p = ThermoParams()
    assert rho_tsallis(p, 10.5, 0.9) == 0.0
    assert rho_tsallis(p, 9.5, 0.9) > 0.0
    with pytest.raises(ValueError):
        rho_tsallis(p, 1.0, 1.6)


@pytest.mark.parametrize("w", [0.01, 0.5, 2.8, 7.0, 10.0])
def test_tsallis_continuity_first_order(w):
    # near q = 1 the deviation is first order in (q - 1), with slope
    # rho_planck * x^2 e^x / (2 (e^x - 1)) relative, x = beta omega
    p = ThermoParams()
    for dq in (1e-6, -1e-6):
        slope = w * w * math.exp(w) / (2 * math.expm1(w))
        got = rho_tsallis(p, w, 1 + dq) / rho_planck(p, w) - 1
        assert got == pytest.approx(slope * dq, rel=1e-4, abs=1e-13)


# -- sweeps -----------------------------------------------------------------------------------------

def test_sweep_csv_layout():
    buf = io.StringIO()
    pts = sweep(ThermoParams(1.0, -0.8), [0.5, 1.0, 2.0], [0.95, 1.05], buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["omega_over_kBT", "rho_new", "rho_planck", "rho_tsallis_q0.95",
                       "rho_tsallis_q1.05", "m_terms", "tail_bound"]
    assert len(rows) == 4
    assert float(rows[2][1]) == pts[1].rho_new
    assert isinstance(pts[0], SpectrumPoint)
    assert pts[0].rho_tsallis_lo == pts[0].rho_tsallis[0]
    assert pts[0].rho_tsallis_hi == pts[0].rho_tsallis[1]


def test_sweep_without_q_omits_columns():
    buf = io.StringIO()
    sweep(ThermoParams(), [1.0], [], buf)
    assert buf.getvalue().splitlines()[0] == "omega_over_kBT,rho_new,rho_planck,m_terms,tail_bound"


def test_sweep_grid_validation():
    with pytest.raises(ValueError):
        sweep(ThermoParams(), [1.0, 0.5])
    with pytest.raises(ValueError):
        sweep(ThermoParams(), [0.0, 1.0])
    with pytest.raises(ValueError):
        sweep(ThermoParams(), [])


def test_parallel_sweep_is_deterministic(monkeypatch):
    grid = np.linspace(0.01, 10, 64)
    serial, threaded = io.StringIO(), io.StringIO()
    sweep(ThermoParams(1.0, -0.8), grid, [1.05], serial, workers=1)
    monkeypatch.setenv("NCQO_THREADS", "4")
    sweep(ThermoParams(1.0, -0.8), grid, [1.05], threaded)
    assert serial.getvalue() == threaded.getvalue()


def test_thread_env_validation(monkeypatch):
    monkeypatch.setenv("NCQO_THREADS", "zero")
    with pytest.raises(ValueError):
        sweep(ThermoParams(), [1.0])


def test_surface_long_format():
    buf = io.StringIO()
    pts = sweep_surface(1.0, [-2.0, 0.0], [1.0, 2.0], buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0][:2] == ["mu_over_kBT", "omega_over_kBT"]
    assert [r[:2] for r in rows[1:]] == [["-2", "1"], ["-2", "2"], ["0", "1"], ["0", "2"]]
    assert len(pts) == 4


def test_surface_approaches_planck_at_peak():
    w = planck_peak()
    mus = np.linspace(-10, 0, 21)
    pts = sweep_surface(1.0, mus, [w])
    dev = [abs(x.rho_new - x.rho_planck) for x in pts]
    assert all(a < b for a, b in zip(dev, dev[1:]))
