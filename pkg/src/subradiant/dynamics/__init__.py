"""Open-system dynamics for up to four two-level atoms."""

from .evolution import (
    Generator,
    channel_emissions,
    conditional_propagator,
    evolve_conditional,
    evolve_lindblad,
    liouvillian,
    no_decay,
)
from .model import (
    Atom,
    CollectiveDecay,
    FieldSpec,
    SystemModel,
    build_dissipator,
    build_hamiltonian,
    effective_hamiltonian,
    lowering_operators,
)
from .states import (
    as_density,
    bare_labels,
    basis_matrix,
    check_state,
    dimer_ket,
    populations,
    qubit_embedding,
    state_from_json,
    state_to_json,
    two_dimer_ket,
)
from .trajectories import TrajectoryRecord, events_to_csv, monte_carlo_trajectories, trajectory_rng

__all__ = [
    "Atom",
    "CollectiveDecay",
    "FieldSpec",
    "Generator",
    "SystemModel",
    "TrajectoryRecord",
    "as_density",
    "bare_labels",
    "basis_matrix",
    "build_dissipator",
    "build_hamiltonian",
    "channel_emissions",
    "check_state",
    "conditional_propagator",
    "dimer_ket",
    "effective_hamiltonian",
    "events_to_csv",
    "evolve_conditional",
    "evolve_lindblad",
    "liouvillian",
    "lowering_operators",
    "no_decay",
    "monte_carlo_trajectories",
    "populations",
    "qubit_embedding",
    "state_from_json",
    "state_to_json",
    "trajectory_rng",
    "two_dimer_ket",
]
