"""Circuit compilation to pulse schedules, Stark windows, echo, and schedule simulation."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from ..dynamics.evolution import Generator
from ..dynamics.model import FieldSpec
from ..dynamics.states import check_state, populations, two_dimer_ket
from ..exceptions import ConfigError
from ..gates.single import plan_readout, plan_rotation
from ..gates.two_qubit import m_resonance, plan_cphase, plan_swap
from ..rddi import coupling_coefficients, interdimer_exchange_rates
from .layout import ProcessorLayout, validate_circuit

__all__ = [
    "Segment",
    "PulseSchedule",
    "FidelityBudget",
    "CompileDefaults",
    "EchoFragment",
    "ScheduleResult",
    "stark_window",
    "compile_circuit",
    "echo_neutralize",
    "simulate_echo",
    "simulate_schedule",
    "detuned_transfer",
]

SEGMENT_KINDS = ("field", "stark", "flip")


@dataclass(frozen=True)
class Segment:
    """A timeline entry.

    ``field`` segments drive ``sites`` with ``field`` (atom targets are
    indices into the layout's atom list); ``stark`` segments add
    ``shifts[site]`` to site detunings; ``flip`` segments are instantaneous
    ideal pi rotations about ``axis`` ("x" or "y") on one site.
    """

    t_start: float
    t_end: float
    kind: str
    sites: tuple[int, ...]
    field: FieldSpec | None = None
    shifts: tuple[tuple[int, float], ...] = ()
    axis: str | None = None
    gate_index: int | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if not 0.0 <= self.t_start <= self.t_end:
            raise ValueError(f"segment times must satisfy 0 <= start <= end, got {self.t_start}, {self.t_end}")

    def to_dict(self) -> dict:
        d = {
            "t_start": self.t_start,
            "t_end": self.t_end,
            "kind": self.kind,
            "sites": list(self.sites),
            "label": self.label,
            "gate_index": self.gate_index,
        }
        if self.field is not None:
            f = self.field
            d["field"] = {
                "rabi": [f.rabi.real, f.rabi.imag],
                "detuning": f.detuning,
                "k_hat": list(f.k_hat),
                "targets": list(f.targets) if f.targets is not None else None,
            }
        if self.shifts:
            d["shifts"] = {str(s): v for s, v in self.shifts}
        if self.axis is not None:
            d["axis"] = self.axis
        return d


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple[Segment, ...] = ()

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        for a in range(len(segs)):
            for b in range(a + 1, len(segs)):
                sa, sb = segs[a], segs[b]
                if set(sa.sites) & set(sb.sites) and sa.t_start < sb.t_end and sb.t_start < sa.t_end:
                    raise ValueError(f"segments {a} and {b} overlap on a shared site")

    @property
    def duration(self) -> float:
        return max((s.t_end for s in self.segments), default=0.0)

    def to_json(self) -> str:
        return json.dumps({"duration": self.duration, "segments": [s.to_dict() for s in self.segments]}, indent=2)


@dataclass(frozen=True)
class FidelityBudget:
    """Per-gate analytic bound contributions; ``total`` is their plain sum."""

    contributions: tuple[tuple[int, str, str, float], ...] = ()
    duration: float = 0.0

    @property
    def total(self) -> float:
        return sum(c[3] for c in self.contributions)

    def per_gate(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for idx, _, _, v in self.contributions:
            out[idx] = out.get(idx, 0.0) + v
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gate_index", "gate", "bound", "value"])
        for idx, gate, name, v in self.contributions:
            w.writerow([idx, gate, name, f"{v:.12g}"])
        w.writerow(["", "total", "", f"{self.total:.12g}"])
        return buf.getvalue()


@dataclass(frozen=True)
class CompileDefaults:
    omega_r: float = 30.0
    omega_p: float = 5.0
    omega_c: float = 30.0
    eta: float = 0.3


def detuned_transfer(coupling: float, mismatch: float) -> float:
    """Peak excitation transfer ``J**2 / (J**2 + (delta/2)**2)`` between detuned qubits."""
    if coupling == 0.0:
        return 0.0
    return coupling**2 / (coupling**2 + (0.5 * mismatch) ** 2)


def stark_window(layout: ProcessorLayout, pair: tuple[int, int], duration: float, t_start: float = 0.0) -> Segment:
    """Control segment that brings a neighbouring pair's qubit transitions into resonance.

    Both sites are shifted to their mean detuning for the window; outside
    it the mismatch returns.
    """
    i, j = pair
    if not layout.are_neighbors(i, j):
        raise ConfigError(f"sites {i} and {j} are not neighbours")
    if duration < 0:
        raise ValueError("window duration must be non-negative")
    di, dj = layout.sites[i].detuning, layout.sites[j].detuning
    mean = 0.5 * (di + dj)
    return Segment(
        t_start, t_start + duration, "stark", (i, j), shifts=((i, mean - di), (j, mean - dj)), label="stark_window"
    )


def _site_atoms(site: int) -> tuple[int, int]:
    return 2 * site, 2 * site + 1


@lru_cache(maxsize=64)
def _cphase_plan(zeta, xi, omega_c, mismatch):
    return plan_cphase(zeta, xi, omega_c, stark_mismatch=mismatch)


def _pair_xi(layout, i, j):
    return layout.distance(i, j)


def compile_circuit(circuit, layout: ProcessorLayout, defaults: CompileDefaults = CompileDefaults()):
    """Sequential schedule and bound budget for ``circuit`` on ``layout``.

    Field targets are indices into the full layout atom list (two atoms per
    site, site order).  SWAP-type gates become Stark windows; CPHASE runs
    with the pair detuned (window closed) and a coupling field along the
    pair axis tuned to the pair's |M> level.
    """
    circuit = tuple(circuit)
    validate_circuit(circuit, layout)
    t = 0.0
    segments, contributions = [], []
    for n, g in enumerate(circuit):
        if g.kind == "rotation":
            site = layout.sites[g.sites[0]]
            plan = plan_rotation(site.zeta, defaults.omega_r, g.angle)
            f = plan.field
            fld = FieldSpec(
                f.rabi,
                f.detuning + site.detuning,
                site.axis,
                window=(t, t + plan.duration) if plan.duration > 0 else (t, t + 1.0),
                targets=_site_atoms(g.sites[0]),
            )
            seg = Segment(t, t + plan.duration, "field", g.sites, field=fld, gate_index=n, label="rotation")
        elif g.kind == "readout":
            site = layout.sites[g.sites[0]]
            plan = plan_readout(site.zeta, defaults.omega_p, defaults.eta)
            f = plan.field
            fld = FieldSpec(
                f.rabi, f.detuning + site.detuning, site.axis, window=(t, t + plan.duration),
                targets=_site_atoms(g.sites[0]),
            )
            seg = Segment(t, t + plan.duration, "field", g.sites, field=fld, gate_index=n, label="readout")
        elif g.kind in ("swap", "sqrt_swap"):
            i, j = g.sites
            zeta = max(layout.sites[i].zeta, layout.sites[j].zeta)
            plan = plan_swap(zeta, _pair_xi(layout, i, j), 1.0 if g.kind == "swap" else 0.5)
            w = stark_window(layout, (i, j), plan.duration, t)
            seg = Segment(w.t_start, w.t_end, "stark", w.sites, shifts=w.shifts, gate_index=n, label=g.kind)
        else:
            i, j = g.sites
            si, sj = layout.sites[i], layout.sites[j]
            zeta = max(si.zeta, sj.zeta)
            xi = _pair_xi(layout, i, j)
            plan = _cphase_plan(zeta, xi, defaults.omega_c, si.detuning - sj.detuning)
            pair_model = layout.model((i, j))
            freq = m_resonance(pair_model) + plan.parameters["detuning_offset"]
            r = np.subtract(sj.position, si.position)
            fld = FieldSpec(
                plan.field.rabi, freq, r / np.linalg.norm(r), window=(t, t + plan.duration),
                targets=_site_atoms(i) + _site_atoms(j),
            )
            seg = Segment(t, t + plan.duration, "field", (i, j), field=fld, gate_index=n, label="cphase")
        segments.append(seg)
        for name, v in plan.analytic_bounds.items():
            contributions.append((n, g.kind, name, float(v)))
        t += plan.duration
    return PulseSchedule(tuple(segments)), FidelityBudget(tuple(contributions), t)


@dataclass(frozen=True)
class EchoFragment:
    """Instantaneous flips on the first site of a pair during an idle window."""

    segments: tuple[Segment, ...]
    tau: float
    residual_bound: float


def echo_neutralize(
    pair: tuple[int, int], idle_duration: float, n_flips: int, zeta: float = 0.02, xi: float = 0.1, t_start: float = 0.0
) -> EchoFragment:
    """Refocus the idle exchange of ``pair`` with ``n_flips`` pi pulses.

    Flipping both qubits leaves the XX + YY exchange invariant, so the
    flips act on the first site only and alternate between the x and y
    axes (the XY-4 cycle), at times ``(k + 1/2) tau`` with
    ``tau = idle_duration / n_flips``.  This cancels the exchange to first
    order; the residual bound adds ``(Delta_AB^- tau)**2`` per interval.
    """
    if n_flips < 1:
        raise ValueError("n_flips must be at least 1")
    if idle_duration <= 0:
        raise ValueError("idle_duration must be positive")
    dm, _ = interdimer_exchange_rates(zeta, xi)
    tau = idle_duration / n_flips
    if tau * dm >= 1.0:
        warnings.warn(f"flip interval {tau:.3g} is not short against 1/Delta_AB^- = {1 / dm:.3g}", stacklevel=2)
    segs = tuple(
        Segment(
            t_start + (k + 0.5) * tau,
            t_start + (k + 0.5) * tau,
            "flip",
            (pair[0],),
            axis="x" if k % 2 == 0 else "y",
            label="echo_flip",
        )
        for k in range(n_flips)
    )
    return EchoFragment(segs, tau, min(1.0, n_flips * (dm * tau) ** 2))


def _flip_operator(axis: str, site: int, n_sites: int) -> np.ndarray:
    """Ideal pi rotation on the {G, -} qubit of ``site``; |+> and |E> untouched."""
    s = 1.0 / math.sqrt(2.0)
    g = np.array([1, 0, 0, 0], dtype=complex)
    m = np.array([0, s, -s, 0], dtype=complex)
    if axis == "x":
        q = np.outer(m, g.conj()) + np.outer(g, m.conj())
    elif axis == "y":
        q = 1j * np.outer(m, g.conj()) - 1j * np.outer(g, m.conj())
    else:
        raise ValueError(f"flip axis must be 'x' or 'y', got {axis!r}")
    plus = np.array([0, s, s, 0], dtype=complex)
    e = np.array([0, 0, 0, 1], dtype=complex)
    op4 = q + np.outer(plus, plus.conj()) + np.outer(e, e.conj())
    op = np.eye(1, dtype=complex)
    for k in range(n_sites):
        # higher sites are the left kron factors
        op = np.kron(op4 if k == site else np.eye(4), op)
    return op


@dataclass
class ScheduleResult:
    final_state: np.ndarray
    emission_probability: float
    populations: dict[str, float] = field(default_factory=dict)
    frame_frequency: float = 0.0


def _number_operator_diag(n_atoms: int) -> np.ndarray:
    return np.array([bin(i).count("1") for i in range(2**n_atoms)], dtype=float)


def simulate_schedule(
    schedule: PulseSchedule, layout: ProcessorLayout, initial, duration: float | None = None
) -> ScheduleResult:
    """No-jump simulation of a schedule on a one- or two-site layout.

    The state is carried in the frame rotating at ``omega_eg - Delta`` of
    site 0.  Each piece between segment edges is propagated exactly in the
    frame of its field (if any); ``flip`` segments apply ideal pi rotations.
    Gaps and the tail up to ``duration`` are free evolution.  The returned
    state is normalized and ``emission_probability`` is one minus the
    no-jump weight.
    """
    if layout.n_sites > 2:
        raise ValueError("schedule simulation is limited to two sites (16 states)")
    psi = check_state(initial).astype(complex)
    if psi.ndim != 1:
        raise ValueError("schedule simulation takes a pure initial state")
    n_atoms = 2 * layout.n_sites
    if psi.shape[0] != 2**n_atoms:
        raise ValueError(f"initial state must have dimension {2**n_atoms}")
    norm0 = float(np.vdot(psi, psi).real)
    ref = -coupling_coefficients(layout.sites[0].zeta).delta
    number = _number_operator_diag(n_atoms)
    segs = sorted(schedule.segments, key=lambda s: (s.t_start, s.t_end))
    t_final = max(schedule.duration, duration or 0.0)
    edges = sorted({0.0, t_final} | {s.t_start for s in segs} | {s.t_end for s in segs})
    base = [site.detuning for site in layout.sites]
    done_flips = set()

    def apply_flips(t):
        nonlocal psi
        for k, s in enumerate(segs):
            if s.kind == "flip" and k not in done_flips and s.t_start <= t:
                psi = _flip_operator(s.axis, s.sites[0], layout.n_sites) @ psi
                done_flips.add(k)

    for a, b in zip(edges[:-1], edges[1:]):
        apply_flips(a)
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        det = list(base)
        fields = []
        for s in segs:
            if not s.t_start <= mid < s.t_end:
                continue
            if s.kind == "stark":
                for site, shift in s.shifts:
                    det[site] += shift
            elif s.kind == "field":
                fields.append(s.field)
        if len(fields) > 1:
            raise ValueError("simultaneous fields are not supported in schedule simulation")
        frame = fields[0].detuning if fields else ref
        model = layout.model(detunings=det, frame_frequency=frame).with_fields(*fields)
        heff = Generator(model).effective(mid)
        psi_f = np.exp(1j * (frame - ref) * number * a) * psi
        psi_f = expm(-1j * heff * (b - a)) @ psi_f
        psi = np.exp(-1j * (frame - ref) * number * b) * psi_f
    apply_flips(t_final)
    weight = float(np.vdot(psi, psi).real)
    psi_n = psi / math.sqrt(weight)
    basis = "dimer" if layout.n_sites == 1 else "two_dimer"
    return ScheduleResult(psi_n, 1.0 - weight / norm0, populations(psi_n, basis), ref)


def simulate_echo(
    idle_duration: float,
    n_flips: int,
    zeta: float = 0.02,
    xi: float = 0.1,
    initial=None,
) -> float:
    """Residual error of an echoed idle window between two resonant neighbours.

    Returns ``1 - F`` between the simulated (no-jump, renormalized) state and
    the state the flips alone would produce, starting from |-G> by default.
    ``n_flips = 0`` gives the bare idle evolution.
    """
    from .layout import linear_chain

    layout = linear_chain(2, zeta, xi, stark_mismatch=0.0)
    psi0 = two_dimer_ket("-", "G") if initial is None else np.asarray(initial, dtype=complex)
    segs = echo_neutralize((0, 1), idle_duration, n_flips, zeta, xi).segments if n_flips > 0 else ()
    res = simulate_schedule(PulseSchedule(segs), layout, psi0, duration=idle_duration)
    ideal = psi0
    for s in segs:
        ideal = _flip_operator(s.axis, s.sites[0], 2) @ ideal
    return max(0.0, float(1.0 - abs(np.vdot(ideal, res.final_state)) ** 2 / np.vdot(ideal, ideal).real))
