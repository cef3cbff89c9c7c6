"""Gate protocols for subradiant-dimer qubits: plans with analytic bounds, and simulated runs."""

from .base import GATE_KINDS, GatePlan, GateReport, bound_check_csv, state_fidelity
from .single import ReadoutReport, plan_readout, plan_rotation, rotation_bounds, run_readout, run_rotation
from .two_qubit import (
    cphase_bounds,
    cphase_time,
    exchange_unitary,
    plan_cphase,
    plan_swap,
    run_cphase,
    run_swap,
    speed_ratio,
    swap_bound,
    swap_time,
)

__all__ = [
    "GATE_KINDS",
    "GatePlan",
    "GateReport",
    "ReadoutReport",
    "bound_check_csv",
    "cphase_bounds",
    "cphase_time",
    "exchange_unitary",
    "plan_cphase",
    "plan_swap",
    "rotation_bounds",
    "run_cphase",
    "run_swap",
    "speed_ratio",
    "swap_bound",
    "swap_time",
    "plan_readout",
    "plan_rotation",
    "run_readout",
    "run_rotation",
    "state_fidelity",
]
