"""Multi-dimer layouts, circuits and their validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..dynamics.model import Atom, SystemModel
from ..exceptions import ConfigError
from ..geometry import matched_tilt
from ..rddi import interdimer_exchange_rates

__all__ = [
    "Site",
    "ProcessorLayout",
    "LayoutReport",
    "Gate",
    "CIRCUIT_KINDS",
    "linear_chain",
    "validate_layout",
    "validate_circuit",
    "layout_from_dict",
    "circuit_from_list",
]

PERPENDICULAR_TOL = 1e-3  # rad
CIRCUIT_KINDS = ("rotation", "readout", "swap", "sqrt_swap", "cphase")
_NEIGHBOR_SLACK = 1e-6


def _unit(v) -> tuple[float, float, float]:
    a = np.asarray(v, dtype=float).reshape(3)
    n = np.linalg.norm(a)
    if n == 0:
        raise ValueError("axis must be non-zero")
    return tuple(float(x) for x in a / n)


@dataclass(frozen=True)
class Site:
    """One dimer: centre position, intra-dimer axis, separation and site detuning."""

    position: tuple[float, float, float]
    axis: tuple[float, float, float]
    zeta: float
    detuning: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(x) for x in np.asarray(self.position).reshape(3)))
        object.__setattr__(self, "axis", _unit(self.axis))
        if not self.zeta > 0:
            raise ValueError(f"site zeta must be positive, got {self.zeta}")

    def atom_positions(self) -> tuple[np.ndarray, np.ndarray]:
        c, a = np.asarray(self.position), np.asarray(self.axis)
        return c + 0.5 * self.zeta * a, c - 0.5 * self.zeta * a


@dataclass(frozen=True)
class ProcessorLayout:
    """Dimers on a lattice of spacing ``xi`` with a common dipole axis."""

    sites: tuple[Site, ...]
    xi: float
    dipole: tuple[float, float, float] = (0.0, 1.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        object.__setattr__(self, "dipole", _unit(self.dipole))

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def distance(self, i: int, j: int) -> float:
        return float(np.linalg.norm(np.subtract(self.sites[i].position, self.sites[j].position)))

    def neighbors(self) -> list[tuple[int, int]]:
        lim = self.xi * (1.0 + _NEIGHBOR_SLACK)
        return [(i, j) for i, j in combinations(range(self.n_sites), 2) if self.distance(i, j) <= lim]

    def are_neighbors(self, i: int, j: int) -> bool:
        return tuple(sorted((i, j))) in self.neighbors()

    def model(self, site_indices=None, detunings=None, frame_frequency: float = 0.0) -> SystemModel:
        """Atom model for a subset of sites (two atoms each, in the given order)."""
        idx = range(self.n_sites) if site_indices is None else site_indices
        atoms = []
        for k, s in enumerate(idx):
            site = self.sites[s]
            d = site.detuning if detunings is None else detunings[k]
            atoms += [Atom(p, d) for p in site.atom_positions()]
        return SystemModel(tuple(atoms), frame_frequency=frame_frequency, dipole=self.dipole)

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "dipole": list(self.dipole),
            "sites": [
                {"position": list(s.position), "axis": list(s.axis), "zeta": s.zeta, "detuning": s.detuning}
                for s in self.sites
            ],
        }


def linear_chain(
    n_sites: int,
    zeta: float = 0.02,
    xi: float = 0.1,
    stark_mismatch: float | None = None,
    delta_inh: float = 0.0,
    seed: int | None = None,
) -> ProcessorLayout:
    """Chain along y with dipoles along the chain.

    Dimer axes alternate between x and the matched tilt near z, so every
    neighbouring pair has the qubit exchange ``3 zeta**2 / (20 xi**3)``.
    Site detunings alternate ``+- stark_mismatch / 2`` (default
    ``100 Delta_AB^-``, i.e. exchange switched off) plus, when ``delta_inh``
    is positive, an inhomogeneous offset drawn uniformly from
    ``[-delta_inh, delta_inh]`` with ``numpy.random.default_rng(seed)``.
    """
    if n_sites < 1:
        raise ValueError("a layout needs at least one site")
    dm, _ = interdimer_exchange_rates(zeta, xi)
    mismatch = 100.0 * dm if stark_mismatch is None else float(stark_mismatch)
    alpha = matched_tilt(zeta, xi)
    tilted = (math.cos(alpha), 0.0, math.sin(alpha))
    offsets = np.zeros(n_sites)
    if delta_inh > 0:
        offsets = np.random.default_rng(seed).uniform(-delta_inh, delta_inh, n_sites)
    sites = tuple(
        Site(
            (0.0, k * xi, 0.0),
            (1.0, 0.0, 0.0) if k % 2 == 0 else tilted,
            zeta,
            (0.5 if k % 2 == 0 else -0.5) * mismatch + float(offsets[k]),
        )
        for k in range(n_sites)
    )
    return ProcessorLayout(sites, xi)


@dataclass
class LayoutReport:
    valid: bool
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    neighbor_xi: list[tuple[int, int, float]] = field(default_factory=list)


def validate_layout(layout: ProcessorLayout) -> LayoutReport:
    """Check the addressing geometry; failures are reported, not raised."""
    errors, warns = [], []
    limit = math.sin(PERPENDICULAR_TOL)
    zmax = max((s.zeta for s in layout.sites), default=0.0)
    if layout.sites and layout.xi <= zmax:
        errors.append(f"lattice spacing xi={layout.xi} does not exceed zeta={zmax}")
    for i, j in combinations(range(layout.n_sites), 2):
        d = layout.distance(i, j)
        if d <= max(layout.sites[i].zeta, layout.sites[j].zeta):
            errors.append(f"sites {i} and {j} overlap (distance {d:.4g})")
    nb = []
    for i, j in layout.neighbors():
        r = np.subtract(layout.sites[j].position, layout.sites[i].position)
        d = float(np.linalg.norm(r))
        nb.append((i, j, d))
        if d == 0:
            continue
        rhat = r / d
        for s in (i, j):
            if abs(float(np.dot(layout.sites[s].axis, rhat))) > limit:
                errors.append(f"site {s} axis is not perpendicular to the axis of pair ({i}, {j})")
    # next-nearest dimers on a line see the pair's coupling field; not modeled
    for i, j, k in combinations(range(layout.n_sites), 3):
        p = [np.asarray(layout.sites[m].position) for m in (i, j, k)]
        if np.linalg.norm(np.cross(p[1] - p[0], p[2] - p[0])) < 1e-12 * layout.xi**2:
            warns.append("more than two collinear sites: coupling-field crosstalk on next-nearest dimers is not modeled")
            break
    return LayoutReport(not errors, errors, warns, nb)


@dataclass(frozen=True)
class Gate:
    """One circuit element; ``sites`` has one entry for single-dimer gates, two for pairs."""

    kind: str
    sites: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in CIRCUIT_KINDS:
            raise ConfigError(f"unknown gate kind {self.kind!r}; expected one of {CIRCUIT_KINDS}")
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        want = 1 if self.kind in ("rotation", "readout") else 2
        if len(self.sites) != want:
            raise ConfigError(f"{self.kind} acts on {want} site(s), got {self.sites}")
        if self.kind == "rotation" and self.angle is None:
            object.__setattr__(self, "angle", math.pi)


def validate_circuit(circuit, layout: ProcessorLayout) -> None:
    """Raise :class:`ConfigError` if a gate addresses a missing site or non-neighbours."""
    for n, g in enumerate(circuit):
        for s in g.sites:
            if not 0 <= s < layout.n_sites:
                raise ConfigError(f"gate {n} ({g.kind}) addresses missing site {s}")
        if len(g.sites) == 2 and not layout.are_neighbors(*g.sites):
            raise ConfigError(f"gate {n} ({g.kind}) acts on non-neighbouring sites {g.sites}")


def layout_from_dict(doc: dict) -> ProcessorLayout:
    """Build a layout from ``{"xi": .., "sites": [{"position", "axis", "zeta", "detuning"}], "dipole"?}``."""
    try:
        sites = tuple(Site(**s) for s in doc["sites"])
        return ProcessorLayout(sites, float(doc["xi"]), tuple(doc.get("dipole", (0.0, 1.0, 0.0))))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid layout: {exc}") from exc


def circuit_from_list(items) -> tuple[Gate, ...]:
    """Gates from ``[{"kind": "rotation", "sites": [0], "angle": 3.14}, ...]``."""
    try:
        return tuple(Gate(g["kind"], tuple(g["sites"]), g.get("angle")) for g in items)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"invalid circuit entry: {exc}") from exc
