"""Simulation toolkit for qubits encoded in subradiant states of atom dimers."""

__version__ = "0.1.0"
