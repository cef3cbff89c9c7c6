"""Shared simulation step for the unitary gates."""

from __future__ import annotations

import numpy as np

from ..dynamics.evolution import channel_emissions, evolve_conditional
from ..dynamics.states import check_state, qubit_embedding
from .base import GatePlan, state_fidelity


def embedded_target(plan: GatePlan, n_dimers: int) -> np.ndarray:
    """The target unitary lifted to the bare basis (zero outside the qubit subspace)."""
    _, iso = qubit_embedding(n_dimers)
    return iso @ plan.target_unitary @ iso.conj().T


def simulate(plan: GatePlan, initial, n_dimers: int, decay=None, emissions: bool = True) -> dict:
    """Run ``plan`` on ``initial`` and compare with the ideal qubit map.

    Returns a dict with the renormalized no-jump state, fidelity to the
    target, leakage, emission probability and per-channel emissions.
    """
    s = check_state(initial)
    model = plan.driven_model
    if s.shape[0] != model.dim:
        raise ValueError(f"initial state has dimension {s.shape[0]}, plan needs {model.dim}")
    _, iso = qubit_embedding(n_dimers)
    w = embedded_target(plan, n_dimers)
    norm0 = float(np.vdot(s, s).real) if s.ndim == 1 else float(np.trace(s).real)
    out, survival = evolve_conditional(s, model, plan.duration, decay=decay)
    survival /= norm0
    out_n = out / np.sqrt(survival * norm0) if s.ndim == 1 else out / (survival * norm0)
    target = w @ s if s.ndim == 1 else w @ s @ w.conj().T
    fid = state_fidelity(out_n, target)
    proj = iso @ iso.conj().T
    if out_n.ndim == 1:
        in_qubit = float(np.vdot(out_n, proj @ out_n).real)
    else:
        in_qubit = float(np.trace(proj @ out_n).real)
    by_channel = None
    if emissions and decay is None and plan.duration > 0:
        by_channel = channel_emissions(s, model, plan.duration) / norm0
    return {
        "state": out_n,
        "fidelity": fid,
        "survival": survival,
        "leakage": 1.0 - in_qubit,
        "emission": 1.0 - survival,
        "by_channel": by_channel,
    }
