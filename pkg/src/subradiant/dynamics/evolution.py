"""Lindblad and no-jump (non-Hermitian) evolution.

Piecewise-constant segments are propagated exactly with a matrix exponential
of the generator; segments with explicitly time-dependent drives fall back to
an adaptive Runge-Kutta integrator.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from ..exceptions import StiffnessError
from .model import (
    CollectiveDecay,
    SystemModel,
    _raising_drive,
    _static_hamiltonian,
    build_dissipator,
)
from .states import as_density, check_state

__all__ = [
    "Generator",
    "liouvillian",
    "evolve_lindblad",
    "evolve_conditional",
    "channel_emissions",
    "conditional_propagator",
    "no_decay",
]

DEFAULT_TOLERANCE = 1e-10
# rough upper limit on adaptive steps before we refuse to integrate
MAX_ADAPTIVE_STEPS = 2_000_000


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape(dim, dim, order="F")


def _commutator_super(h: np.ndarray) -> np.ndarray:
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def liouvillian(h: np.ndarray, decay: CollectiveDecay) -> np.ndarray:
    """Column-stacking superoperator of ``-i[H, .] + sum_k r_k D[L_k]``."""
    eye = np.eye(h.shape[0])
    sup = _commutator_super(h)
    for rate, op in zip(decay.rates, decay.jump_operators):
        if rate == 0.0:
            continue
        ldl = op.conj().T @ op
        sup += rate * (np.kron(op.conj(), op) - 0.5 * (np.kron(eye, ldl) + np.kron(ldl.T, eye)))
    return sup


class Generator:
    """Time-dependent Hamiltonian split into static and rotating drive parts."""

    def __init__(self, model: SystemModel, decay: CollectiveDecay | None = None):
        self.model = model
        self.decay = decay or build_dissipator(model)
        self.h_static = _static_hamiltonian(model)
        self.drives = [(f, _raising_drive(model, f)) for f in model.fields]
        self.decay_term = self.decay.anticommutator_term

    def hamiltonian(self, t: float) -> np.ndarray:
        h = self.h_static.copy()
        for f, a in self.drives:
            if f.active(t):
                rot = np.exp(-1j * (f.detuning - self.model.frame_frequency) * t)
                h += rot * a + np.conj(rot) * a.conj().T
        return h

    def effective(self, t: float) -> np.ndarray:
        return self.hamiltonian(t) - 0.5j * self.decay_term

    def liouvillian(self, t: float) -> np.ndarray:
        return liouvillian(self.hamiltonian(t), self.decay)

    def segments(self, t0: float, t1: float):
        """Yield ``(a, b, static)`` pieces of ``[t0, t1]``."""
        pts = self.model.breakpoints(t0, t1)
        for a, b in zip(pts[:-1], pts[1:]):
            if b > a:
                yield a, b, self.model.is_static(a, b)


def no_decay(model: SystemModel) -> CollectiveDecay:
    """A dissipator with every channel rate set to zero (coherent dynamics only)."""
    d = build_dissipator(model)
    return CollectiveDecay(d.gamma_matrix, np.zeros_like(d.rates), d.vectors, d.jump_operators)


def _check_stiffness(scale: float, span: float, max_steps: int) -> None:
    est = scale * span
    if est > max_steps:
        raise StiffnessError(
            f"frequency scale {scale:.3g} over {span:.3g}/gamma needs ~{est:.2g} adaptive steps; "
            "move to a frame rotating with the dominant transition or keep the segment "
            "piecewise constant so the exact propagator is used"
        )


def _integrate(rhs, y0, a, b, tolerance, scale, max_steps):
    _check_stiffness(scale, b - a, max_steps)
    sol = solve_ivp(rhs, (a, b), y0, method="DOP853", rtol=tolerance, atol=tolerance * 1e-2)
    if not sol.success:
        raise StiffnessError(f"adaptive integration failed on [{a}, {b}]: {sol.message}")
    return sol.y[:, -1]


def evolve_lindblad(
    state,
    model: SystemModel,
    duration: float,
    tolerance: float = DEFAULT_TOLERANCE,
    t0: float = 0.0,
    max_steps: int = MAX_ADAPTIVE_STEPS,
    decay: CollectiveDecay | None = None,
) -> np.ndarray:
    """Density matrix after ``duration`` under the collective master equation.

    ``decay`` overrides the model's dissipator (e.g. :func:`no_decay`).
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    rho = as_density(check_state(state))
    dim = rho.shape[0]
    if dim != model.dim:
        raise ValueError(f"state dimension {dim} does not match model dimension {model.dim}")
    gen = Generator(model, decay)
    trace0 = np.trace(rho).real
    v = _vec(rho)
    for a, b, static in gen.segments(t0, t0 + duration):
        if static:
            v = expm(gen.liouvillian(0.5 * (a + b)) * (b - a)) @ v
        else:
            scale = np.linalg.norm(gen.liouvillian(a), 2)
            v = _integrate(lambda t, y: gen.liouvillian(t) @ y, v, a, b, tolerance, scale, max_steps)
        # The generator is exactly trace preserving, but rounding in expm grows
        # like eps * |L| T, i.e. ~1e-9 once 2 Delta T reaches 1e8.  Restore the
        # invariant; the rescale is the size of the rounding error itself.
        v *= trace0 / np.trace(_unvec(v, dim)).real
    rho = _unvec(v, dim)
    return _nearest_state(0.5 * (rho + rho.conj().T), trace0)


def _nearest_state(rho: np.ndarray, trace: float) -> np.ndarray:
    # Eigenvalues that should be zero come out as +-|rounding|; clip the
    # negative ones so the result stays a valid state.
    w, u = np.linalg.eigh(rho)
    if w[0] >= 0.0:
        return rho
    w = np.clip(w, 0.0, None)
    w *= trace / w.sum()
    out = (u * w) @ u.conj().T
    return 0.5 * (out + out.conj().T)


def conditional_propagator(model: SystemModel, duration: float, t0: float = 0.0, gen=None):
    """``exp(-i H_eff T)`` for a model that is static on ``[t0, t0 + T)``."""
    gen = gen or Generator(model)
    if not model.is_static(t0, t0 + duration):
        raise ValueError("conditional_propagator needs a piecewise-constant segment")
    return expm(-1j * gen.effective(t0) * duration)


def evolve_conditional(
    state,
    model: SystemModel,
    duration: float,
    tolerance: float = DEFAULT_TOLERANCE,
    t0: float = 0.0,
    max_steps: int = MAX_ADAPTIVE_STEPS,
    decay: CollectiveDecay | None = None,
) -> tuple[np.ndarray, float]:
    """No-jump evolution under the effective non-Hermitian Hamiltonian.

    Returns the unnormalized state and its survival probability (squared
    norm, or trace for a density matrix): the probability that no photon
    was emitted.
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    s = check_state(state)
    if s.shape[0] != model.dim:
        raise ValueError(f"state dimension {s.shape[0]} does not match model dimension {model.dim}")
    gen = Generator(model, decay)
    pure = s.ndim == 1
    for a, b, static in gen.segments(t0, t0 + duration):
        if static:
            u = expm(-1j * gen.effective(0.5 * (a + b)) * (b - a))
            s = u @ s if pure else u @ s @ u.conj().T
            continue
        scale = np.linalg.norm(gen.effective(a), 2)
        if pure:
            s = _integrate(lambda t, y: -1j * gen.effective(t) @ y, s, a, b, tolerance, scale, max_steps)
        else:
            dim = s.shape[0]

            def rhs(t, y):
                r = _unvec(y, dim)
                heff = gen.effective(t)
                return _vec(-1j * (heff @ r - r @ heff.conj().T))

            s = _unvec(_integrate(rhs, _vec(s), a, b, tolerance, 2 * scale, max_steps), dim)
    survival = float(np.vdot(s, s).real) if pure else float(np.trace(s).real)
    return s, survival


def _van_loan_integral(heff: np.ndarray, weight: np.ndarray, span: float):
    """``(U, int_0^T e^{i H^dag s} W e^{-i H s} ds)`` with ``U = e^{-i H T}``."""
    dim = heff.shape[0]
    block = np.zeros((2 * dim, 2 * dim), dtype=complex)
    block[:dim, :dim] = -1j * heff.conj().T
    block[:dim, dim:] = weight
    block[dim:, dim:] = -1j * heff
    e = expm(block * span)
    u = e[dim:, dim:]
    return u, u.conj().T @ e[:dim, dim:]


def channel_emissions(
    state,
    model: SystemModel,
    duration: float,
    t0: float = 0.0,
    tolerance: float = DEFAULT_TOLERANCE,
) -> np.ndarray:
    """Probability that the first emitted photon leaves through each channel.

    Entry ``k`` integrates ``rate_k <L_k^dag L_k>`` over the no-jump branch;
    the entries sum to ``1 - survival``.
    """
    s = as_density(check_state(state))
    gen = Generator(model)
    rates, jumps = gen.decay.rates, gen.decay.jump_operators
    weights = [r * op.conj().T @ op for r, op in zip(rates, jumps)]
    out = np.zeros(len(weights))
    dim = s.shape[0]
    for a, b, static in gen.segments(t0, t0 + duration):
        if static:
            heff = gen.effective(0.5 * (a + b))
            u = None
            for k, w in enumerate(weights):
                u, q = _van_loan_integral(heff, w, b - a)
                out[k] += float(np.real(np.trace(q @ s)))
            if u is None:
                u = expm(-1j * heff * (b - a))
            s = u @ s @ u.conj().T
            continue
        n = len(weights)

        def rhs(t, y):
            r = _unvec(y[: dim * dim], dim)
            heff = gen.effective(t)
            dr = -1j * (heff @ r - r @ heff.conj().T)
            acc = [np.real(np.trace(w @ r)) for w in weights]
            return np.concatenate([_vec(dr), np.asarray(acc, dtype=complex)])

        y0 = np.concatenate([_vec(s), np.zeros(n, dtype=complex)])
        scale = 2 * np.linalg.norm(gen.effective(a), 2)
        y = _integrate(rhs, y0, a, b, tolerance, scale, MAX_ADAPTIVE_STEPS)
        s = _unvec(y[: dim * dim], dim)
        out += y[dim * dim :].real
    return out
