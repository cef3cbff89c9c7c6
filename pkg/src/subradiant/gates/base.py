"""Plan and report types shared by the gate protocols."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.linalg import sqrtm

from ..dynamics.model import FieldSpec, SystemModel

__all__ = ["GatePlan", "GateReport", "GATE_KINDS", "state_fidelity", "bound_check_csv"]

GATE_KINDS = ("rotation", "readout", "swap", "sqrt_swap", "cphase")


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


@dataclass(frozen=True)
class GatePlan:
    """Pulse parameters for one protocol, with the analytic error bounds.

    ``model`` is the system the pulse acts on (without the field) and sets
    the rotating frame; ``field`` is ``None`` for free-evolution gates
    (SWAP).  ``target_unitary`` acts on the qubit subspace in the order
    given by :func:`subradiant.dynamics.qubit_embedding`.
    """

    kind: str
    field: FieldSpec | None
    duration: float
    analytic_bounds: Mapping[str, float]
    target_unitary: np.ndarray
    model: SystemModel
    parameters: Mapping[str, Any] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        # zero length is allowed only as the trivial (identity) rotation
        if not self.duration >= 0 or not math.isfinite(self.duration):
            raise ValueError(f"duration must be finite and non-negative, got {self.duration}")
        for name, b in self.analytic_bounds.items():
            if not 0.0 <= b <= 1.0:
                raise ValueError(f"bound {name}={b} outside [0, 1]")

    @property
    def driven_model(self) -> SystemModel:
        return self.model if self.field is None else self.model.with_fields(self.field)

    @property
    def total_bound(self) -> float:
        return float(sum(self.analytic_bounds.values()))

    def replace(self, **changes) -> "GatePlan":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        f = None
        if self.field is not None:
            f = {
                "rabi": self.field.rabi,
                "detuning": self.field.detuning,
                "k_hat": self.field.k_hat,
                "window": self.field.window,
                "targets": self.field.targets,
            }
        return _jsonable(
            {
                "kind": self.kind,
                "duration": self.duration,
                "field": f,
                "frame_frequency": self.model.frame_frequency,
                "analytic_bounds": dict(self.analytic_bounds),
                "parameters": dict(self.parameters),
            }
        )


@dataclass
class GateReport:
    """Simulated outcome of one gate run.

    ``infidelity`` and ``leakage`` refer to the no-emission branch,
    renormalized; ``emission_probability`` is the weight of the other
    branch.  ``details`` carries protocol-specific numbers.
    """

    kind: str
    infidelity: float
    leakage: float
    emission_probability: float
    bound_check: dict[str, bool] = field(default_factory=dict)
    analytic_bounds: dict[str, float] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)
    final_state: np.ndarray | None = None

    def __post_init__(self):
        # rounding can leave values a hair outside [0, 1]
        for name in ("infidelity", "leakage", "emission_probability"):
            v = float(getattr(self, name))
            if not -1e-9 <= v <= 1.0 + 1e-9:
                raise ValueError(f"{name}={v} outside [0, 1]")
            setattr(self, name, min(max(v, 0.0), 1.0))

    @property
    def fidelity(self) -> float:
        return 1.0 - self.infidelity

    def to_dict(self, include_state: bool = False) -> dict:
        d = {
            "kind": self.kind,
            "infidelity": self.infidelity,
            "leakage": self.leakage,
            "emission_probability": self.emission_probability,
            "bound_check": self.bound_check,
            "analytic_bounds": self.analytic_bounds,
            "details": self.details,
        }
        if include_state and self.final_state is not None:
            d["final_state"] = self.final_state
        return _jsonable(d)

    def to_json(self, include_state: bool = False) -> str:
        return json.dumps(self.to_dict(include_state), indent=2, sort_keys=True)


def bound_check_csv(reports) -> str:
    """Rows ``kind, bound, analytic, simulated_emission, passed`` for sweeps."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "bound", "analytic", "simulated_emission", "passed"])
    for r in reports:
        for name, ok in r.bound_check.items():
            analytic = r.analytic_bounds.get(name, sum(r.analytic_bounds.values()))
            w.writerow([r.kind, name, f"{analytic:.12g}", f"{r.emission_probability:.12g}", int(ok)])
    return buf.getvalue()


def state_fidelity(state, target) -> float:
    """Fidelity of ``state`` to ``target`` after normalizing both.

    Either argument may be a vector or a density matrix; the Uhlmann form is
    used only when both are mixed.
    """
    a = np.asarray(state, dtype=complex)
    b = np.asarray(target, dtype=complex)
    if a.ndim == 1 and b.ndim == 1:
        return float(abs(np.vdot(b, a)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))
    if a.ndim == 1:
        a, b = b, a
    # a is now a density matrix
    a = a / np.trace(a).real
    if b.ndim == 1:
        return float(np.vdot(b, a @ b).real / np.vdot(b, b).real)
    b = b / np.trace(b).real
    s = sqrtm(a)
    return float(np.real(np.trace(sqrtm(s @ b @ s))) ** 2)
