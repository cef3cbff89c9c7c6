"""Exception hierarchy shared by all subpackages."""


class SubradiantError(Exception):
    """Base class for errors raised by this package."""


class DomainError(SubradiantError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class GeometryError(SubradiantError, ValueError):
    """Atom or dimer placement is physically inconsistent (overlap, adjacency)."""


class InvalidStateError(SubradiantError, ValueError):
    """A state vector or density matrix violates its invariants."""


class StiffnessError(SubradiantError, RuntimeError):
    """The adaptive integrator cannot resolve the fastest frequency scale.

    Usually fixed by moving to a rotating frame closer to the dominant
    transition, or by using the exact piecewise-constant propagator.
    """


class ConfigError(SubradiantError, ValueError):
    """A scenario configuration failed to parse or validate."""
