"""System definition, Hamiltonian and collective dissipator.

Basis convention: the bare product basis over N two-level atoms is indexed by
``i = sum_j b_j 2**j`` where ``b_j = 1`` if atom ``j`` is excited, i.e. atom 0
is the lowest bit.  All frequencies are relative to the nominal transition
frequency and expressed in units of gamma.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..exceptions import GeometryError
from ..rddi import coupling_coefficients

__all__ = [
    "Atom",
    "FieldSpec",
    "SystemModel",
    "CollectiveDecay",
    "lowering_operators",
    "build_hamiltonian",
    "build_dissipator",
    "effective_hamiltonian",
]

MAX_ATOMS = 4


def _vec3(v) -> tuple[float, float, float]:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ValueError(f"expected a finite 3-vector, got {v!r}")
    return (float(arr[0]), float(arr[1]), float(arr[2]))


@dataclass(frozen=True)
class Atom:
    """A two-level atom at ``position`` (units of 1/q).

    ``detuning`` is the offset of this atom's transition frequency from the
    nominal one, in units of gamma.
    """

    position: tuple[float, float, float]
    detuning: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position))
        if not math.isfinite(self.detuning):
            raise ValueError("site detuning must be finite")


@dataclass(frozen=True)
class FieldSpec:
    """A classical plane-wave drive in the rotating-wave approximation.

    ``rabi`` is the single-atom Rabi frequency (complex values carry a drive
    phase); the drive term on atom ``j`` is ``(rabi / 2) e^{i k.r_j}
    |e_j><g_j| + h.c.``.  ``detuning`` is the laser frequency minus the
    nominal transition frequency.  ``targets`` restricts the field to a
    subset of atoms (near-field addressing); ``None`` means all atoms.
    """

    rabi: complex
    detuning: float = 0.0
    k_hat: tuple[float, float, float] = (1.0, 0.0, 0.0)
    window: tuple[float, float] = (0.0, math.inf)
    targets: tuple[int, ...] | None = None

    def __post_init__(self):
        k = _vec3(self.k_hat)
        if abs(math.hypot(*k) - 1.0) > 1e-9:
            raise ValueError(f"k_hat must be a unit vector, got {self.k_hat!r}")
        object.__setattr__(self, "k_hat", k)
        t_on, t_off = (float(x) for x in self.window)
        if not t_on < t_off:
            raise ValueError(f"field window must satisfy t_on < t_off, got {self.window!r}")
        object.__setattr__(self, "window", (t_on, t_off))
        object.__setattr__(self, "rabi", complex(self.rabi))
        if self.targets is not None:
            object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))

    def active(self, t: float) -> bool:
        return self.window[0] <= t < self.window[1]


@dataclass(frozen=True)
class CollectiveDecay:
    """Cooperative decay matrix and its eigen-channels.

    ``jump_operators[k]`` is ``sum_j vectors[j, k] sigma_j`` and fires at rate
    ``rates[k]``; rates are sorted ascending, so for a close dimer channel 0
    is the subradiant one.
    """

    gamma_matrix: np.ndarray
    rates: np.ndarray
    vectors: np.ndarray
    jump_operators: tuple[np.ndarray, ...]

    @property
    def anticommutator_term(self) -> np.ndarray:
        """``sum_k rate_k L_k^dag L_k``, the decay part of the effective Hamiltonian."""
        return sum(r * L.conj().T @ L for r, L in zip(self.rates, self.jump_operators))


@dataclass(frozen=True)
class SystemModel:
    atoms: tuple[Atom, ...]
    fields: tuple[FieldSpec, ...] = ()
    frame_frequency: float = 0.0
    dipole: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        atoms = tuple(a if isinstance(a, Atom) else Atom(*a) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "fields", tuple(self.fields))
        d = _vec3(self.dipole)
        norm = math.hypot(*d)
        if norm == 0:
            raise ValueError("dipole axis must be non-zero")
        object.__setattr__(self, "dipole", tuple(x / norm for x in d))
        n = len(atoms)
        if not 1 <= n <= MAX_ATOMS:
            raise ValueError(f"models support 1..{MAX_ATOMS} atoms, got {n}")
        pos = self.positions
        for i in range(n):
            for j in range(i + 1, n):
                if np.linalg.norm(pos[i] - pos[j]) <= 0.0:
                    raise GeometryError(f"atoms {i} and {j} coincide")
        for f in self.fields:
            if f.targets is not None and any(not 0 <= t < n for t in f.targets):
                raise ValueError(f"field targets {f.targets} out of range for {n} atoms")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def dim(self) -> int:
        return 2**self.n_atoms

    @property
    def positions(self) -> np.ndarray:
        return np.array([a.position for a in self.atoms])

    @property
    def detunings(self) -> np.ndarray:
        return np.array([a.detuning for a in self.atoms])

    @cached_property
    def couplings(self) -> tuple[np.ndarray, np.ndarray]:
        """Pairwise ``(Delta_jk, gamma_jk)`` matrices with ``gamma_jj = 1``."""
        n = self.n_atoms
        pos = self.positions
        dip = np.asarray(self.dipole)
        delta = np.zeros((n, n))
        gamma = np.eye(n)
        for i in range(n):
            for j in range(i + 1, n):
                r = pos[i] - pos[j]
                dist = float(np.linalg.norm(r))
                cos_t = float(np.clip(r @ dip / dist, -1.0, 1.0))
                c = coupling_coefficients(dist, math.acos(cos_t))
                delta[i, j] = delta[j, i] = c.delta
                gamma[i, j] = gamma[j, i] = c.gamma12
        return delta, gamma

    def replace(self, **changes) -> "SystemModel":
        return dataclasses.replace(self, **changes)

    def with_fields(self, *fields: FieldSpec) -> "SystemModel":
        return self.replace(fields=tuple(fields))

    def with_frame(self, frame_frequency: float) -> "SystemModel":
        return self.replace(frame_frequency=float(frame_frequency))

    def with_detunings(self, detunings) -> "SystemModel":
        atoms = tuple(Atom(a.position, float(d)) for a, d in zip(self.atoms, detunings, strict=True))
        return self.replace(atoms=atoms)

    def active_fields(self, t: float) -> tuple[FieldSpec, ...]:
        return tuple(f for f in self.fields if f.active(t))

    def is_static(self, t0: float, t1: float, atol: float = 1e-12) -> bool:
        """True if the generator is constant on ``[t0, t1)`` in this frame."""
        for f in self.fields:
            overlaps = f.window[0] < t1 and f.window[1] > t0
            if not overlaps:
                continue
            inside = f.window[0] <= t0 and f.window[1] >= t1
            if not inside or abs(f.detuning - self.frame_frequency) > atol:
                return False
        return True

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        """Sorted times in ``[t0, t1]`` where a field switches on or off."""
        pts = {t0, t1}
        for f in self.fields:
            for edge in f.window:
                if t0 < edge < t1:
                    pts.add(edge)
        return sorted(pts)


_LOWERING_CACHE: dict[int, tuple[np.ndarray, ...]] = {}


def lowering_operators(n_atoms: int) -> tuple[np.ndarray, ...]:
    """``sigma_j = |g_j><e_j|`` on the 2**n product space, atom 0 lowest bit."""
    if n_atoms not in _LOWERING_CACHE:
        dim = 2**n_atoms
        ops = []
        for j in range(n_atoms):
            s = np.zeros((dim, dim), dtype=complex)
            for i in range(dim):
                if (i >> j) & 1:
                    s[i - (1 << j), i] = 1.0
            s.setflags(write=False)
            ops.append(s)
        _LOWERING_CACHE[n_atoms] = tuple(ops)
    return _LOWERING_CACHE[n_atoms]


def _static_hamiltonian(model: SystemModel) -> np.ndarray:
    sig = lowering_operators(model.n_atoms)
    delta, _ = model.couplings
    h = np.zeros((model.dim, model.dim), dtype=complex)
    for j, s in enumerate(sig):
        h += (model.atoms[j].detuning - model.frame_frequency) * (s.conj().T @ s)
    for i in range(model.n_atoms):
        for j in range(model.n_atoms):
            if i != j and delta[i, j] != 0.0:
                h += delta[i, j] * (sig[i].conj().T @ sig[j])
    return h


def _raising_drive(model: SystemModel, f: FieldSpec) -> np.ndarray:
    """``sum_j (rabi/2) e^{i k.(r_j - r_0)} sigma_j^dag``.

    The drive phase is referenced to the position of atom 0.
    """
    sig = lowering_operators(model.n_atoms)
    pos = model.positions
    k = np.asarray(f.k_hat)
    targets = range(model.n_atoms) if f.targets is None else f.targets
    a = np.zeros((model.dim, model.dim), dtype=complex)
    for j in targets:
        phase = np.exp(1j * float(k @ (pos[j] - pos[0])))
        a += 0.5 * f.rabi * phase * sig[j].conj().T
    return a


def build_hamiltonian(model: SystemModel, t: float = 0.0) -> np.ndarray:
    """Hermitian part of the Hamiltonian in the frame rotating at ``frame_frequency``."""
    h = _static_hamiltonian(model)
    for f in model.active_fields(t):
        a = _raising_drive(model, f)
        rot = np.exp(-1j * (f.detuning - model.frame_frequency) * t)
        h += rot * a + np.conj(rot) * a.conj().T
    return h


def build_dissipator(model: SystemModel) -> CollectiveDecay:
    _, gamma = model.couplings
    rates, vectors = np.linalg.eigh(gamma)
    if rates[0] < -1e-10:
        raise RuntimeError(f"cooperative decay matrix is not positive semidefinite: {rates}")
    rates = np.clip(rates, 0.0, None)
    sig = lowering_operators(model.n_atoms)
    jumps = tuple(sum(vectors[j, k] * sig[j] for j in range(model.n_atoms)) for k in range(len(rates)))
    return CollectiveDecay(gamma, rates, vectors, jumps)


def effective_hamiltonian(model: SystemModel, t: float = 0.0, decay: CollectiveDecay | None = None):
    """``H - (i/2) sum_jk gamma_jk sigma_j^dag sigma_k``: the no-jump generator."""
    decay = decay or build_dissipator(model)
    return build_hamiltonian(model, t) - 0.5j * decay.anticommutator_term
