"""Exception taxonomy shared by all modules."""


class Error(Exception):
    """Base class for all package errors."""


class DomainError(Error):
    """An argument lies outside the mathematical domain of an operation."""


class NoBracket(Error):
    """A root bracket does not enclose a sign change."""


class NoConvergence(Error):
    """An iterative routine exhausted its budget without converging."""


class StepUnderflow(Error):
    """An adaptive integrator was forced below the minimum step size."""


class DegenerateInput(Error):
    """Input data carries no usable information (e.g. all abscissae equal)."""


class ConfigError(Error):
    """A run configuration failed schema validation."""
