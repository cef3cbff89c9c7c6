"""Closed-form two-atom cooperative coefficients and dimer spectra.

All rates are in units of the single-atom decay rate gamma, and lengths are
dimensionless (``zeta = q * r`` with ``q = omega_eg / c``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, GeometryError

__all__ = [
    "CouplingCoefficients",
    "DimerSpectrum",
    "FieldCouplings",
    "coupling_coefficients",
    "dimer_spectrum",
    "field_dimer_couplings",
    "interdimer_exchange_rates",
    "tabulate",
]

# Below this separation gamma12 is summed as a power series: the closed form
# cancels 1/zeta^2 against 1/zeta^3 terms, and gamma - gamma12 (which is
# O(zeta^2)) would lose most of its digits.
SERIES_THRESHOLD = 0.5
_SERIES_TERMS = 16


@dataclass(frozen=True)
class CouplingCoefficients:
    """Resonant dipole-dipole pair: coherent exchange and cooperative decay."""

    delta: float
    gamma12: float
    # 1 - gamma12 evaluated without cancellation
    gamma_minus: float

    @property
    def gamma_plus(self) -> float:
        return 1.0 + self.gamma12


@dataclass(frozen=True)
class DimerSpectrum:
    """Eigenvalues of the two-atom non-Hermitian Hamiltonian.

    Real parts are offsets from ``n * omega_eg`` for the n-excitation
    manifold; imaginary parts are ``-Gamma / 2``.
    """

    lambda_G: complex
    lambda_plus: complex
    lambda_minus: complex
    lambda_E: complex
    gamma_plus: float
    gamma_minus: float
    gamma_E: float


@dataclass(frozen=True)
class FieldCouplings:
    """Rabi frequencies on the superradiant and subradiant dimer transitions."""

    omega_plus: complex
    omega_minus: complex


def _gamma12_minus_one_series(z, sin2, radial):
    # gamma12 - 1; the constant terms of the two brackets sum to exactly 1
    sinc_tail = sum(
        (-1) ** k * z ** (2 * k) / math.factorial(2 * k + 1) for k in range(1, _SERIES_TERMS)
    )
    near_tail = sum(
        (-1) ** k * 2 * k * z ** (2 * k - 2) / math.factorial(2 * k + 1)
        for k in range(2, _SERIES_TERMS + 1)
    )
    return 1.5 * (sin2 * sinc_tail + radial * near_tail)


def _gamma12(zeta, cos2):
    """Return (gamma12, 1 - gamma12)."""
    sin2 = 1.0 - cos2
    radial = 1.0 - 3.0 * cos2
    small = zeta < SERIES_THRESHOLD
    z = np.where(small, 1.0, zeta)
    closed = 1.5 * (sin2 * np.sin(z) / z + radial * (np.cos(z) / z**2 - np.sin(z) / z**3))
    tail = _gamma12_minus_one_series(np.where(small, zeta, 0.0), sin2, radial)
    gamma12 = np.where(small, 1.0 + tail, closed)
    gamma_minus = np.where(small, -tail, 1.0 - closed)
    return gamma12, gamma_minus


def _delta(zeta, cos2):
    sin2 = 1.0 - cos2
    radial = 1.0 - 3.0 * cos2
    return 0.75 * (
        -sin2 * np.cos(zeta) / zeta
        + radial * (np.sin(zeta) / zeta**2 + np.cos(zeta) / zeta**3)
    )


def coupling_coefficients(zeta, theta: float = math.pi / 2) -> CouplingCoefficients:
    """Retarded dipole-dipole kernel for two parallel dipoles.

    Parameters
    ----------
    zeta : float or array_like
        Normalized separation ``q * r12``; must be strictly positive.
    theta : float
        Angle between the dipole axis and the separation vector.  The
        default (dipoles perpendicular to the axis) gives
        ``gamma - gamma12 ~ zeta**2 / 5`` and ``Delta ~ 3 / (4 zeta**3)``.

    Returns
    -------
    CouplingCoefficients
        Scalars for scalar input, arrays of matching shape otherwise.
    """
    z = np.asarray(zeta, dtype=float)
    if np.any(~np.isfinite(z)) or np.any(z <= 0.0):
        raise DomainError(f"separation must be positive and finite, got {zeta!r}")
    cos2 = math.cos(theta) ** 2
    delta = _delta(z, cos2)
    gamma12, gamma_minus = _gamma12(z, cos2)
    if z.ndim == 0:
        return CouplingCoefficients(float(delta), float(gamma12), float(gamma_minus))
    return CouplingCoefficients(delta, gamma12, gamma_minus)


def dimer_spectrum(coeffs: CouplingCoefficients) -> DimerSpectrum:
    delta = coeffs.delta
    gp, gm = coeffs.gamma_plus, coeffs.gamma_minus
    return DimerSpectrum(
        lambda_G=0j,
        lambda_plus=complex(delta, -gp / 2),
        lambda_minus=complex(-delta, -gm / 2),
        lambda_E=complex(0.0, -1.0),
        gamma_plus=gp,
        gamma_minus=gm,
        gamma_E=2.0,
    )


def field_dimer_couplings(omega: complex, zeta: float, phi: float = 0.0) -> FieldCouplings:
    """Dimer-transition Rabi frequencies for a plane wave.

    ``phi`` is the angle between the wave vector and the interatomic axis,
    so the phase difference across the dimer is ``zeta * cos(phi)``.  The
    full complex expression is used, not its small-separation limit.
    """
    if zeta < 0:
        raise DomainError(f"separation must be non-negative, got {zeta}")
    phase = np.exp(-1j * zeta * math.cos(phi))
    pref = omega / math.sqrt(2.0)
    return FieldCouplings(complex(pref * (1 + phase)), complex(pref * (1 - phase)))


def interdimer_exchange_rates(zeta: float, xi: float) -> tuple[float, float]:
    """Coherent exchange rates between neighbouring dimers.

    Returns ``(delta_minus, delta_plus)``: the exchange on the qubit
    transitions ``3 zeta**2 / (20 xi**3)`` and on the auxiliary transitions
    ``3 / (2 xi**3)``.  These are the effective-dipole estimates; the
    pairwise four-atom kernel can differ strongly on the qubit transitions
    (see :func:`subradiant.geometry.model_exchange_rates`).
    """
    if zeta <= 0:
        raise DomainError(f"zeta must be positive, got {zeta}")
    if xi <= zeta:
        raise GeometryError(f"dimers overlap: xi={xi} must exceed zeta={zeta}")
    if xi > 0.3:
        warnings.warn(f"xi={xi} is not small; near-field estimates degrade", stacklevel=2)
    return 3.0 * zeta**2 / (20.0 * xi**3), 3.0 / (2.0 * xi**3)


def tabulate(zetas, theta: float = math.pi / 2) -> list[dict[str, float]]:
    """Rows of (zeta, delta, gamma12, gamma_plus, gamma_minus) for CSV output."""
    zetas = np.atleast_1d(np.asarray(zetas, dtype=float))
    if zetas.size == 0:
        return []
    c = coupling_coefficients(zetas, theta)
    return [
        {
            "zeta": float(z),
            "delta": float(d),
            "gamma12": float(g),
            "gamma_plus": float(1.0 + g),
            "gamma_minus": float(gm),
        }
        for z, d, g, gm in zip(
            zetas, np.atleast_1d(c.delta), np.atleast_1d(c.gamma12), np.atleast_1d(c.gamma_minus)
        )
    ]
