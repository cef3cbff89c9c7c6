"""Atom placements for one dimer and for a neighbouring pair of dimers.

A single dimer sits along x with atom 0 at the origin and atom 1 at
``(-zeta, 0, 0)``; a field with ``k_hat = x`` then sees ``k.r12 = zeta``
(``phi = 0``).

For two dimers the pairwise retarded kernel gives an exchange on the qubit
(subradiant) transitions that depends strongly on how the two dimer axes are
oriented.  With parallel axes it is of order ``zeta**2 / xi**5``, hundreds of
times larger than the effective-dipole estimate ``3 zeta**2 / (20 xi**3)``;
with crossed axes it vanishes by symmetry.  The ``"matched"`` arrangement
tilts dimer B slightly away from the crossed orientation so that the model
exchange equals the effective-dipole estimate, which is what the gate
timings assume.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .dynamics.model import Atom, SystemModel
from .exceptions import GeometryError
from .rddi import coupling_coefficients, interdimer_exchange_rates

__all__ = [
    "ARRANGEMENTS",
    "dimer_model",
    "two_dimer_positions",
    "two_dimer_model",
    "matched_tilt",
    "model_exchange_rates",
]

ARRANGEMENTS = ("matched", "crossed", "parallel")
_TILT_SEARCH = 0.1


def dimer_model(
    zeta: float,
    theta: float = math.pi / 2,
    detuning: float = 0.0,
    frame_frequency: float = 0.0,
) -> SystemModel:
    """Two atoms separated by ``zeta`` along x.

    ``theta`` is the angle between the dipole axis and the dimer axis; the
    dipole lies in the x-z plane.
    """
    if zeta <= 0:
        raise GeometryError(f"zeta must be positive, got {zeta}")
    dipole = (math.cos(theta), 0.0, math.sin(theta))
    atoms = (Atom((0.0, 0.0, 0.0), detuning), Atom((-zeta, 0.0, 0.0), detuning))
    return SystemModel(atoms, frame_frequency=frame_frequency, dipole=dipole)


def _pair_positions(zeta: float, xi: float, alpha: float) -> np.ndarray:
    axis_b = np.array([math.cos(alpha), 0.0, math.sin(alpha)])
    centre_b = np.array([0.0, xi, 0.0])
    half = 0.5 * zeta
    return np.array(
        [
            [half, 0.0, 0.0],
            [-half, 0.0, 0.0],
            centre_b + half * axis_b,
            centre_b - half * axis_b,
        ]
    )


def _exchange_from_delta(delta: np.ndarray) -> tuple[float, float]:
    # |->_A = (s0 - s1)/sqrt2, |->_B = (s2 - s3)/sqrt2 and likewise with + for |+>
    minus = 0.5 * (delta[0, 2] - delta[0, 3] - delta[1, 2] + delta[1, 3])
    plus = 0.5 * (delta[0, 2] + delta[0, 3] + delta[1, 2] + delta[1, 3])
    return float(minus), float(plus)


def _pair_delta(positions: np.ndarray, dipole: np.ndarray) -> np.ndarray:
    n = len(positions)
    delta = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            r = positions[i] - positions[j]
            dist = float(np.linalg.norm(r))
            cos_t = float(np.clip(r @ dipole / dist, -1.0, 1.0))
            delta[i, j] = delta[j, i] = coupling_coefficients(dist, math.acos(cos_t)).delta
    return delta


@lru_cache(maxsize=256)
def matched_tilt(zeta: float, xi: float) -> float:
    """Axis angle of dimer B (in the x-z plane) giving the target qubit exchange.

    Dimer A lies along x, B is displaced by ``xi`` along y, and the dipoles
    point along y.  Returns ``alpha`` with B's axis ``(cos a, 0, sin a)``
    such that the four-atom exchange on the qubit transitions equals
    ``3 zeta**2 / (20 xi**3)``.
    """
    target, _ = interdimer_exchange_rates(zeta, xi)
    dipole = np.array([0.0, 1.0, 0.0])

    def mismatch(alpha):
        minus, _ = _exchange_from_delta(_pair_delta(_pair_positions(zeta, xi, alpha), dipole))
        return minus - target

    lo, hi = math.pi / 2, math.pi / 2 + _TILT_SEARCH
    while mismatch(hi) < 0:
        if hi >= math.pi:
            raise GeometryError(f"no tilt reaches the target exchange at zeta={zeta}, xi={xi}")
        hi = min(math.pi, hi + _TILT_SEARCH)
    return brentq(mismatch, lo, hi, xtol=1e-15, rtol=1e-14)


def two_dimer_positions(zeta: float, xi: float, arrangement: str = "matched"):
    """Atom positions (4 x 3) and dipole axis for dimers A (atoms 0, 1) and B (2, 3).

    ``arrangement`` is one of ``"matched"`` (default), ``"crossed"`` (A along
    x, B along z, dipoles along the A-B axis y) or ``"parallel"`` (both along
    x, dipoles along z).
    """
    if zeta <= 0:
        raise GeometryError(f"zeta must be positive, got {zeta}")
    if xi <= zeta:
        raise GeometryError(f"dimers overlap: xi={xi} must exceed zeta={zeta}")
    if arrangement == "matched":
        return _pair_positions(zeta, xi, matched_tilt(zeta, xi)), (0.0, 1.0, 0.0)
    if arrangement == "crossed":
        return _pair_positions(zeta, xi, math.pi / 2), (0.0, 1.0, 0.0)
    if arrangement == "parallel":
        return _pair_positions(zeta, xi, 0.0), (0.0, 0.0, 1.0)
    raise ValueError(f"unknown arrangement {arrangement!r}; expected one of {ARRANGEMENTS}")


def two_dimer_model(
    zeta: float,
    xi: float,
    arrangement: str = "matched",
    detunings: tuple[float, float] = (0.0, 0.0),
    frame_frequency: float = 0.0,
) -> SystemModel:
    """Four-atom model; ``detunings`` are per-dimer site detunings (A, B)."""
    pos, dipole = two_dimer_positions(zeta, xi, arrangement)
    det = (detunings[0], detunings[0], detunings[1], detunings[1])
    atoms = tuple(Atom(p, d) for p, d in zip(pos, det))
    return SystemModel(atoms, frame_frequency=frame_frequency, dipole=dipole)


def model_exchange_rates(model: SystemModel) -> tuple[float, float]:
    """``(Delta_AB^-, Delta_AB^+)`` read off a four-atom model's pair couplings."""
    if model.n_atoms != 4:
        raise ValueError("exchange rates need a two-dimer (four-atom) model")
    delta, _ = model.couplings
    return _exchange_from_delta(delta)
