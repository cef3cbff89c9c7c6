"""Multi-dimer layouts, schedule compilation, echo and cross-scheme analysis."""

from .analysis import ComparisonReport, inhomogeneity_penalty, scheme_comparison
from .layout import (
    CIRCUIT_KINDS,
    Gate,
    LayoutReport,
    ProcessorLayout,
    Site,
    circuit_from_list,
    layout_from_dict,
    linear_chain,
    validate_circuit,
    validate_layout,
)
from .schedule import (
    CompileDefaults,
    EchoFragment,
    FidelityBudget,
    PulseSchedule,
    ScheduleResult,
    Segment,
    compile_circuit,
    detuned_transfer,
    echo_neutralize,
    simulate_echo,
    simulate_schedule,
    stark_window,
)

# the operation is called "compile"; keep the builtin unshadowed inside the package
compile = compile_circuit  # noqa: A001

__all__ = [
    "CIRCUIT_KINDS",
    "ComparisonReport",
    "CompileDefaults",
    "EchoFragment",
    "FidelityBudget",
    "Gate",
    "LayoutReport",
    "ProcessorLayout",
    "PulseSchedule",
    "ScheduleResult",
    "Segment",
    "Site",
    "circuit_from_list",
    "compile",
    "compile_circuit",
    "detuned_transfer",
    "echo_neutralize",
    "inhomogeneity_penalty",
    "layout_from_dict",
    "linear_chain",
    "scheme_comparison",
    "simulate_echo",
    "simulate_schedule",
    "stark_window",
    "validate_circuit",
    "validate_layout",
]
