"""Quantum-jump unravelling with collective emission channels and detector thinning."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import brentq

from ..exceptions import StiffnessError
from .evolution import DEFAULT_TOLERANCE, Generator
from .model import SystemModel
from .states import check_state

__all__ = ["TrajectoryRecord", "monte_carlo_trajectories", "trajectory_rng", "events_to_csv"]


@dataclass
class TrajectoryRecord:
    emission_events: list[tuple[float, int]] = field(default_factory=list)
    detected_events: list[tuple[float, int]] = field(default_factory=list)
    final_state: np.ndarray | None = None

    @property
    def n_detected(self) -> int:
        return len(self.detected_events)


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trajectory ``index``; stable across serial/parallel runs."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


class _StaticPiece:
    """No-jump propagation on a constant segment via eigendecomposition of H_eff."""

    def __init__(self, heff: np.ndarray):
        self.heff = heff
        lam, vec = np.linalg.eig(heff)
        self.diagonal = np.linalg.cond(vec) < 1e8
        if self.diagonal:
            self.lam, self.vec, self.inv = lam, vec, np.linalg.inv(vec)

    def coefficients(self, psi):
        return self.inv @ psi if self.diagonal else psi

    def state(self, coeffs, tau: float) -> np.ndarray:
        if self.diagonal:
            return self.vec @ (np.exp(-1j * self.lam * tau) * coeffs)
        return expm(-1j * self.heff * tau) @ coeffs


class _Unraveller:
    def __init__(self, model: SystemModel, t0: float, t1: float, tolerance: float):
        self.gen = Generator(model)
        self.rates = self.gen.decay.rates
        self.jumps = self.gen.decay.jump_operators
        self.tolerance = tolerance
        self.pieces = []
        for a, b, static in self.gen.segments(t0, t1):
            piece = _StaticPiece(self.gen.effective(0.5 * (a + b))) if static else None
            self.pieces.append((a, b, piece))

    def _jump(self, psi, rng):
        weights = np.array([r * np.vdot(L @ psi, L @ psi).real for r, L in zip(self.rates, self.jumps)])
        total = weights.sum()
        k = int(np.searchsorted(np.cumsum(weights) / total, rng.random(), side="right"))
        k = min(k, len(weights) - 1)
        new = self.jumps[k] @ psi
        return k, new / np.linalg.norm(new)

    def _static_until(self, piece, psi, a, b, target):
        """Advance on a static piece; return (time, state, crossed) for norm**2 = target."""
        c = piece.coefficients(psi)
        end = piece.state(c, b - a)
        if np.vdot(end, end).real > target:
            return b, end, False

        def excess(tau):
            s = piece.state(c, tau)
            return np.vdot(s, s).real - target

        tau = brentq(excess, 0.0, b - a, xtol=1e-13, rtol=4 * np.finfo(float).eps)
        return a + tau, piece.state(c, tau), True

    def _adaptive_until(self, psi, a, b, target):
        gen = self.gen

        def norm_event(t, y):
            return np.vdot(y, y).real - target

        norm_event.terminal = True
        norm_event.direction = -1
        scale = np.linalg.norm(gen.effective(a), 2)
        if scale * (b - a) > 2_000_000:
            raise StiffnessError("trajectory segment too stiff for adaptive integration")
        sol = solve_ivp(
            lambda t, y: -1j * gen.effective(t) @ y,
            (a, b),
            psi,
            method="DOP853",
            rtol=self.tolerance,
            atol=self.tolerance * 1e-2,
            events=norm_event,
        )
        if not sol.success:
            raise StiffnessError(sol.message)
        if sol.t_events[0].size:
            return float(sol.t_events[0][0]), sol.y_events[0][0], True
        return b, sol.y[:, -1], False

    def run(self, psi0, rng, efficiency: float) -> TrajectoryRecord:
        rec = TrajectoryRecord()
        psi = psi0 / np.linalg.norm(psi0)
        target = rng.random()
        for a, b, piece in self.pieces:
            t = a
            while t < b:
                if piece is not None:
                    # the eigen-coefficients are referenced to the piece start
                    t_hit, psi_t, crossed = self._static_until(piece, psi, t, b, target)
                else:
                    t_hit, psi_t, crossed = self._adaptive_until(psi, t, b, target)
                if not crossed:
                    psi, t = psi_t, b
                    break
                k, psi = self._jump(psi_t, rng)
                rec.emission_events.append((t_hit, k))
                if rng.random() < efficiency:
                    rec.detected_events.append((t_hit, k))
                target = rng.random()
                t = t_hit
            # carry the unnormalized no-jump norm into the next piece
        rec.final_state = psi / np.linalg.norm(psi)
        return rec


def _run_chunk(args):
    state, model, duration, t0, seed, indices, efficiency, tolerance = args
    unr = _Unraveller(model, t0, t0 + duration, tolerance)
    return [unr.run(state, trajectory_rng(seed, i), efficiency) for i in indices]


def monte_carlo_trajectories(
    state,
    model: SystemModel,
    duration: float,
    n_traj: int,
    seed: int,
    detector_efficiency: float = 1.0,
    t0: float = 0.0,
    tolerance: float = DEFAULT_TOLERANCE,
    n_jobs: int = 1,
) -> list[TrajectoryRecord]:
    """Sample ``n_traj`` jump trajectories starting from a pure state.

    Each emission is independently kept as detected with probability
    ``detector_efficiency``.  Trajectory ``i`` draws from
    :func:`trajectory_rng` ``(seed, i)``, so results do not depend on
    ``n_jobs``.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    if not 0.0 <= detector_efficiency <= 1.0:
        raise ValueError("detector_efficiency must lie in [0, 1]")
    psi = check_state(state)
    if psi.ndim != 1:
        raise ValueError("trajectories start from a pure state")
    if psi.shape[0] != model.dim:
        raise ValueError("state dimension does not match model")
    indices = list(range(n_traj))
    if n_jobs <= 1:
        return _run_chunk((psi, model, duration, t0, seed, indices, detector_efficiency, tolerance))
    chunks = [indices[i::n_jobs] for i in range(n_jobs)]
    out: list[TrajectoryRecord | None] = [None] * n_traj
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        args = [(psi, model, duration, t0, seed, c, detector_efficiency, tolerance) for c in chunks]
        for chunk, recs in zip(chunks, pool.map(_run_chunk, args)):
            for i, r in zip(chunk, recs):
                out[i] = r
    return out  # type: ignore[return-value]


def events_to_csv(records: list[TrajectoryRecord]) -> str:
    """Event log with columns ``trajectory_id, time, channel, detected``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trajectory_id", "time", "channel", "detected"])
    for i, rec in enumerate(records):
        detected = set(rec.detected_events)
        for t, k in rec.emission_events:
            w.writerow([i, f"{t:.12g}", k, int((t, k) in detected)])
    return buf.getvalue()
