"""Exception hierarchy.

The CLI maps these onto exit codes: validation problems (``ValueError``
subclasses) exit 1, solver failures (``SolverError``) exit 2.
"""


class PotentialDomainError(ValueError):
    """Argument outside the open interval (0, 1)."""


class PotentialRangeError(ValueError):
    """Argument inside (0, 1) but too close to an endpoint to evaluate safely."""


class ConfigError(ValueError):
    pass


class DataHypothesisError(ValueError):
    """Initial data violate mu0 >= 0 or 0 < rho0 < 1."""


class DegenerateError(ValueError):
    """A normalizing quantity vanishes identically."""


class SolverError(RuntimeError):
    pass


class NewtonDiverged(SolverError):
    pass


class ConfinementLost(SolverError):
    """Damping could not keep the Newton iterate inside (0, 1)."""


class LinearSolveFailed(SolverError):
    pass


class ResolventError(SolverError):
    """Scalar resolvent iteration failed to bracket the root."""


class BufferUnderrun(RuntimeError):
    """Delay history is shorter than the requested lag."""
