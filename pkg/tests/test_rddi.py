"""Kernel, spectrum and field-coupling checks against high-precision and dense oracles."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subradiant import rddi
from subradiant.exceptions import DomainError, GeometryError


def mp_kernel(zeta, theta, dps=50):
    """Closed-form retarded kernel evaluated in multiprecision: (delta, gamma12, 1 - gamma12)."""
    with mp.workdps(dps):
        z = mp.mpf(zeta)
        c2 = mp.cos(mp.mpf(theta)) ** 2
        s2, radial = 1 - c2, 1 - 3 * c2
        g12 = mp.mpf(3) / 2 * (s2 * mp.sin(z) / z + radial * (mp.cos(z) / z**2 - mp.sin(z) / z**3))
        d = mp.mpf(3) / 4 * (-s2 * mp.cos(z) / z + radial * (mp.sin(z) / z**2 + mp.cos(z) / z**3))
        return float(d), float(g12), float(1 - g12)


@pytest.mark.parametrize("theta", [math.pi / 2, math.pi / 3, 0.0, 0.4])
@pytest.mark.parametrize("zeta", [1e-4, 1e-3, 0.02, 0.3, 0.49, 0.5, 0.51, 1.0, 3.7, 25.0])
def test_kernel_matches_multiprecision(zeta, theta):
    d, g12, gm = mp_kernel(zeta, theta)
    c = rddi.coupling_coefficients(zeta, theta)
    assert c.delta == pytest.approx(d, rel=1e-10)
    assert c.gamma12 == pytest.approx(g12, rel=1e-12, abs=1e-15)
    assert c.gamma_minus == pytest.approx(gm, rel=1e-9, abs=1e-15)


def test_paper_subradiant_rate():
    c = rddi.coupling_coefficients(0.02)
    assert c.gamma_minus == pytest.approx(8e-5, rel=0.05)


def test_shift_at_002_against_asymptote():
    c = rddi.coupling_coefficients(0.02)
    assert c.delta == pytest.approx(3 / (4 * 0.02**3), rel=1e-3)
    assert c.delta == pytest.approx(9.375e4, rel=1e-3)


def test_far_atoms_decouple():
    c = rddi.coupling_coefficients(1e3)
    assert abs(c.delta) < 1e-2 and abs(c.gamma12) < 1e-2


def test_close_limit():
    c = rddi.coupling_coefficients(1e-6)
    assert c.gamma12 == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("bad", [0.0, -0.1, float("nan"), float("inf")])
def test_nonpositive_separation_rejected(bad):
    with pytest.raises(DomainError):
        rddi.coupling_coefficients(bad)


def test_array_input():
    z = np.array([0.01, 0.02, 1.0])
    c = rddi.coupling_coefficients(z)
    assert c.delta.shape == (3,)
    for k, zk in enumerate(z):
        assert c.gamma_minus[k] == rddi.coupling_coefficients(zk).gamma_minus


@given(st.floats(1e-4, 50.0), st.floats(0.0, math.pi))
@settings(max_examples=200, deadline=None)
def test_sum_rule_and_bounded_correlation(zeta, theta):
    c = rddi.coupling_coefficients(zeta, theta)
    s = rddi.dimer_spectrum(c)
    assert s.gamma_plus + s.gamma_minus == pytest.approx(2.0, abs=1e-14)
    assert s.gamma_E == 2.0
    assert abs(c.gamma12) <= 1.0 + 1e-15
    assert s.lambda_G == 0
    assert (s.lambda_plus.real - s.lambda_minus.real) == pytest.approx(2 * c.delta, rel=1e-14)
    assert s.lambda_plus.real + s.lambda_minus.real == pytest.approx(0.0, abs=1e-9 * abs(c.delta) + 1e-15)


def test_asymptotic_consistency():
    z = np.geomspace(1e-3, 0.05, 60)
    c = rddi.coupling_coefficients(z)
    assert np.all(np.abs(c.gamma_minus - z**2 / 5) / c.gamma_minus < 0.02)
    assert np.all(np.abs(c.delta - 0.75 / z**3) / c.delta < 0.01)


def test_subradiant_rate_monotone():
    z = np.linspace(1e-4, 0.5, 4000)
    gm = rddi.coupling_coefficients(z).gamma_minus
    assert np.all(np.diff(gm) > 0)


def test_noninteracting_spectrum():
    s = rddi.dimer_spectrum(rddi.CouplingCoefficients(0.0, 0.0, 1.0))
    assert s.gamma_plus == s.gamma_minus == 1.0
    assert s.lambda_plus.real == s.lambda_minus.real == 0.0


def eq1_matrix(c):
    """Eq.-(1)-style 4x4 non-Hermitian matrix in the bare basis {gg, eg, ge, ee}."""
    g12 = 1.0 - c.gamma_minus
    off = c.delta - 0.5j * g12
    return np.array(
        [[0, 0, 0, 0], [0, -0.5j, off, 0], [0, off, -0.5j, 0], [0, 0, 0, -1j]], dtype=complex
    )


def test_spectrum_against_multiprecision_eigensolve(rng):
    zetas = 0.5 * (1.0 - rng.random(100))
    worst = 0.0
    with mp.workdps(40):
        for z in zetas:
            c = rddi.coupling_coefficients(z)
            s = rddi.dimer_spectrum(c)
            g12 = 1 - mp.mpf(c.gamma_minus)
            off = mp.mpc(c.delta, -g12 / 2)
            a = mp.matrix([[0, 0, 0, 0], [0, mp.mpc(0, -0.5), off, 0], [0, off, mp.mpc(0, -0.5), 0], [0, 0, 0, mp.mpc(0, -1)]])
            ev = [complex(e) for e in mp.eig(a, left=False, right=False)]
            ev_minus = min(ev, key=lambda e: abs(e - s.lambda_minus))
            ev_plus = min(ev, key=lambda e: abs(e - s.lambda_plus))
            for got, want in ((ev_plus, s.lambda_plus), (ev_minus, s.lambda_minus)):
                worst = max(worst, abs(got - want) / abs(want))
            worst = max(worst, abs(-2 * ev_minus.imag - s.gamma_minus) / s.gamma_minus)
            worst = max(worst, abs(-2 * ev_plus.imag - s.gamma_plus) / s.gamma_plus)
    assert worst < 1e-10


def test_spectrum_against_double_eigensolve(rng):
    for z in 0.5 * (1.0 - rng.random(100)):
        c = rddi.coupling_coefficients(z)
        s = rddi.dimer_spectrum(c)
        ev = np.linalg.eigvals(eq1_matrix(c))
        for want in (s.lambda_G, s.lambda_plus, s.lambda_minus, s.lambda_E):
            assert np.min(np.abs(ev - want)) <= 1e-10 * max(1.0, abs(want))


def test_field_couplings_examples():
    f = rddi.field_dimer_couplings(30.0, 0.02, math.pi / 2)
    assert f.omega_minus == pytest.approx(0.0, abs=1e-12)
    f = rddi.field_dimer_couplings(30.0, 0.02, 0.0)
    direct = 30 / math.sqrt(2) * (1 - np.exp(-0.02j))
    assert f.omega_minus == pytest.approx(direct, rel=1e-14)
    assert f.omega_minus.imag == pytest.approx(0.4243, abs=1e-4)
    f = rddi.field_dimer_couplings(7.0, 0.0)
    assert f.omega_plus == pytest.approx(math.sqrt(2) * 7.0)
    assert f.omega_minus == 0


@given(
    st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
    st.floats(0.0, 10.0),
    st.floats(0.0, 2 * math.pi),
)
def test_coupling_conservation(omega, zeta, phi):
    f = rddi.field_dimer_couplings(omega, zeta, phi)
    total = abs(f.omega_plus) ** 2 + abs(f.omega_minus) ** 2
    assert total == pytest.approx(2 * abs(omega) ** 2, rel=1e-12, abs=1e-12)


def test_small_zeta_limits():
    f = rddi.field_dimer_couplings(1.0, 1e-3, 0.3)
    assert f.omega_minus == pytest.approx(1j * 1e-3 * math.cos(0.3) / math.sqrt(2), rel=1e-3)
    # the symmetric coupling picks up a phase e^{-i zeta cos(phi) / 2}; its modulus is sqrt(2) to O(zeta^2)
    assert abs(f.omega_plus) == pytest.approx(math.sqrt(2), rel=1e-6)


def test_interdimer_rates():
    dm, dp = rddi.interdimer_exchange_rates(0.02, 0.1)
    assert dm == pytest.approx(0.06, rel=1e-12)
    assert dp == pytest.approx(1500.0, rel=1e-12)
    assert dp / dm == pytest.approx(10 / 0.02**2, rel=1e-12)
    with pytest.raises(GeometryError):
        rddi.interdimer_exchange_rates(0.1, 0.1)
    with pytest.warns(UserWarning):
        rddi.interdimer_exchange_rates(0.02, 0.4)


def test_tabulate_rows():
    rows = rddi.tabulate([0.01, 0.02])
    assert [r["zeta"] for r in rows] == [0.01, 0.02]
    assert rddi.tabulate([]) == []
