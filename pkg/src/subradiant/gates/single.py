"""Single-dimer protocols: qubit rotation on the subradiant transition, and readout.

Drive amplitudes follow the paper's convention: ``omega_r``, ``omega_p`` are
the coupling amplitudes in ``Omega_pm = 2**-0.5 Omega (1 pm e^{-i k.r12})``,
whose matrix elements ``<pm|H|G>`` equal ``Omega_pm`` and which give
``T_flip = pi / (2 |Omega_-|)``.  The engine's :class:`FieldSpec` carries the
full Rabi frequency, so the fields below use ``rabi = 2 * omega``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..dynamics.evolution import evolve_lindblad
from ..dynamics.model import FieldSpec
from ..dynamics.states import as_density, check_state, dimer_ket, populations
from ..dynamics.trajectories import monte_carlo_trajectories
from ..geometry import dimer_model
from ..rddi import coupling_coefficients, field_dimer_couplings
from ._run import simulate
from .base import GatePlan, GateReport, _jsonable

__all__ = [
    "plan_rotation",
    "run_rotation",
    "plan_readout",
    "run_readout",
    "ReadoutReport",
    "rotation_bounds",
    "readout_leak_rate",
]

# zeta beyond which the small-separation bound formulas are not trusted
ASYMPTOTIC_ZETA = 0.3
MIN_TRAJECTORIES = 100
# readout initialization: pump until this fraction of |-> is left
INIT_RESIDUAL = 1e-3
# dark wait after the pump, in units of 1/Gamma_+
INIT_DARK_LIFETIMES = 20.0


def rotation_bounds(zeta: float, omega_r: float) -> dict[str, float]:
    """Error bounds for a full flip: subradiant emission and transfer to |+>.

    Capped at 1; outside the near-field regime the formulas stop being informative.
    """
    return {
        "P_minus_sp": min(1.0, math.pi * zeta / (5.0 * math.sqrt(2.0) * omega_r)),
        "P_plus_tr": min(1.0, 8.0 * math.sqrt(2.0) * math.pi * omega_r * zeta**5 / 9.0),
    }


def plan_rotation(
    zeta: float,
    omega_r: float,
    rotation_angle: float = math.pi,
    detuning: float = 0.0,
    phase: float = 0.0,
) -> GatePlan:
    """Rotation of the qubit {|G>, |->} by ``rotation_angle`` about an equatorial axis.

    The field propagates along the dimer axis and is tuned to the subradiant
    transition (``omega_eg - Delta``), plus an optional extra ``detuning``.
    Bounds are for the full flip; a detuned plan carries no bounds.
    """
    if omega_r <= 0:
        raise ValueError(f"omega_r must be positive, got {omega_r}")
    if rotation_angle < 0:
        raise ValueError("rotation_angle must be non-negative; use phase to reverse the axis")
    if not 0 < zeta < ASYMPTOTIC_ZETA:
        warnings.warn(f"zeta={zeta} outside (0, {ASYMPTOTIC_ZETA}): bound formulas degrade", stacklevel=2)
    c = coupling_coefficients(zeta)
    omega = omega_r * np.exp(1j * phase)
    fc = field_dimer_couplings(omega, zeta, 0.0)
    om = fc.omega_minus
    t_flip = math.pi / (2.0 * abs(om))
    duration = t_flip * rotation_angle / math.pi
    frame = -c.delta + detuning
    fld = FieldSpec(2.0 * omega, frame, (1.0, 0.0, 0.0))
    # ideal map on span{G, -}: H = |Om-| (e^{i phi} |-><G| + h.c.)
    half = 0.5 * rotation_angle
    ph = om / abs(om)
    target = np.array(
        [[math.cos(half), -1j * math.sin(half) * np.conj(ph)], [-1j * math.sin(half) * ph, math.cos(half)]]
    )
    bounds = rotation_bounds(zeta, omega_r) if detuning == 0.0 else {}
    params = {
        "zeta": zeta,
        "omega_r": omega_r,
        "rotation_angle": rotation_angle,
        "detuning": detuning,
        "phase": phase,
        "T_flip": t_flip,
        "omega_minus": om,
        "omega_plus": fc.omega_plus,
        "single_atom_error": math.pi / (2.0 * omega_r),
    }
    model = dimer_model(zeta, frame_frequency=frame)
    return GatePlan("rotation", fld, duration, bounds, target, model, params)


def run_rotation(plan: GatePlan, initial) -> GateReport:
    """Simulate the rotation on the full four-level dimer."""
    if plan.kind != "rotation":
        raise ValueError(f"expected a rotation plan, got {plan.kind!r}")
    res = simulate(plan, initial, n_dimers=1)
    checks = {}
    if plan.analytic_bounds:
        ch = res["by_channel"]
        sub = float(ch[0]) if ch is not None else 0.0
        sup = float(ch[1:].sum()) if ch is not None else 0.0
        checks = {
            "P_minus_sp": sub <= plan.analytic_bounds["P_minus_sp"],
            "P_plus_tr": sup <= plan.analytic_bounds["P_plus_tr"],
            "total": res["emission"] <= plan.total_bound,
        }
    details = {
        "populations": populations(res["state"], "dimer"),
        "emission_by_channel": res["by_channel"],
        "unconditional_fidelity": res["fidelity"] * res["survival"],
        "duration": plan.duration,
    }
    return GateReport(
        "rotation",
        1.0 - res["fidelity"],
        res["leakage"],
        res["emission"],
        checks,
        dict(plan.analytic_bounds),
        details,
        res["state"],
    )


def readout_leak_rate(zeta: float, omega_p: float) -> float:
    """Rate of the |-> -> |E> -> |+> cascade under the probe, ``Omega_p**2 zeta**2``."""
    return omega_p**2 * zeta**2


def plan_readout(zeta: float, omega_p: float, eta: float) -> GatePlan:
    """Electron-shelving readout on the |G> <-> |+> transition.

    The window is ``T_rout = 1/(eta Gamma_+)`` and the predicted
    misidentification of |-> is ``gamma_leak * T_rout``.  When
    ``omega_p >= sqrt(2 eta)/zeta`` the plan is marked unreliable.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if omega_p < 0:
        raise ValueError(f"omega_p must be non-negative, got {omega_p}")
    c = coupling_coefficients(zeta)
    gamma_plus = c.gamma_plus
    t_rout = 1.0 / (eta * gamma_plus)
    leak = readout_leak_rate(zeta, omega_p)
    threshold = math.sqrt(2.0 * eta) / zeta
    reliable = omega_p < threshold
    if not reliable:
        warnings.warn(
            f"omega_p={omega_p} violates omega_p < sqrt(2 eta)/zeta = {threshold:.4g}; readout unreliable",
            stacklevel=2,
        )
    misid = min(1.0, leak * t_rout)
    fld = FieldSpec(2.0 * omega_p, c.delta, (1.0, 0.0, 0.0))
    params = {
        "zeta": zeta,
        "omega_p": omega_p,
        "eta": eta,
        "gamma_plus": gamma_plus,
        "gamma_leak": leak,
        "T_rout": t_rout,
        "threshold": threshold,
        "reliable": reliable,
        "predicted_reliability": 1.0 - misid,
    }
    model = dimer_model(zeta, frame_frequency=c.delta)
    return GatePlan("readout", fld, t_rout, {"misidentification": misid}, np.eye(2, dtype=complex), model, params)


@dataclass
class ReadoutReport:
    """Outcome statistics of a readout run.

    In ``measure`` mode ``counts`` holds how many trajectories were
    identified as ``"G"`` (at least one detected photon) or ``"-"``;
    ``reliability`` is the fraction identified correctly when the initial
    state is a qubit basis state.  ``undisturbed`` is the fraction with no
    emission at all, detected or not.
    """

    mode: str
    duration: float
    n_traj: int = 0
    seed: int | None = None
    counts: dict[str, int] = field(default_factory=dict)
    true_label: str | None = None
    reliability: float | None = None
    standard_error: float | None = None
    undisturbed: float | None = None
    predicted_reliability: float | None = None
    ground_population: float | None = None
    populations: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable(self.__dict__.copy())

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _qubit_label(psi: np.ndarray) -> str | None:
    for lbl in ("G", "-"):
        if abs(abs(np.vdot(dimer_ket(lbl), psi)) ** 2 - np.vdot(psi, psi).real) < 1e-9:
            return lbl
    return None


def run_readout(
    plan: GatePlan,
    initial,
    n_traj: int = 10_000,
    seed: int = 0,
    mode: str = "measure",
    duration: float | None = None,
    n_jobs: int = 1,
) -> ReadoutReport:
    """Measure or initialize a dimer qubit.

    ``measure`` samples quantum trajectories over the readout window with
    Bernoulli photon detection at efficiency ``eta``.  ``initialize`` keeps
    the probe on until |-> has been pumped out (default
    ``ln(1/INIT_RESIDUAL) / gamma_leak``), then waits in the dark for |+>
    to decay, and reports the final ground population from the master
    equation.
    """
    if plan.kind != "readout":
        raise ValueError(f"expected a readout plan, got {plan.kind!r}")
    s = check_state(initial)
    if s.shape[0] != 4:
        raise ValueError("readout acts on a single dimer (dimension 4)")
    p = plan.parameters
    if mode == "measure":
        if s.ndim != 1:
            raise ValueError("measure mode samples trajectories from a pure state")
        if n_traj < MIN_TRAJECTORIES:
            warnings.warn(f"n_traj={n_traj} < {MIN_TRAJECTORIES}: statistics are poor", stacklevel=2)
        t = plan.duration if duration is None else float(duration)
        recs = monte_carlo_trajectories(
            s, plan.driven_model, t, n_traj, seed, detector_efficiency=p["eta"], n_jobs=n_jobs
        )
        n_g = sum(1 for r in recs if r.n_detected >= 1)
        counts = {"G": n_g, "-": n_traj - n_g}
        label = _qubit_label(s)
        rel = se = None
        if label is not None:
            rel = counts[label] / n_traj
            se = math.sqrt(max(rel * (1.0 - rel), 1.0 / n_traj) / n_traj)
        undisturbed = sum(1 for r in recs if not r.emission_events) / n_traj
        return ReadoutReport(
            "measure", t, n_traj, seed, counts, label, rel, se, undisturbed, p["predicted_reliability"]
        )
    if mode == "initialize":
        pump = math.log(1.0 / INIT_RESIDUAL) / p["gamma_leak"] if duration is None else float(duration)
        if pump * p["gamma_leak"] < 1.0:
            warnings.warn("initialization window shorter than 1/gamma_leak", stacklevel=2)
        dark = INIT_DARK_LIFETIMES / p["gamma_plus"]
        fld = FieldSpec(plan.field.rabi, plan.field.detuning, plan.field.k_hat, window=(0.0, pump))
        rho = evolve_lindblad(as_density(s), plan.model.with_fields(fld), pump + dark)
        pops = populations(rho, "dimer")
        return ReadoutReport(
            "initialize", pump + dark, ground_population=pops["G"], populations=pops, true_label=_qubit_label(s)
        )
    raise ValueError(f"mode must be 'measure' or 'initialize', got {mode!r}")
