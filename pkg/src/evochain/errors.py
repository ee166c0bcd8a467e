"""Exception hierarchy shared by the library and the CLI."""


class EvoChainError(Exception):
    """Base class for all errors raised by evochain."""

    kind = "error"


class SpecError(EvoChainError):
    """A chain specification is malformed or violates its invariants."""

    kind = "SpecError"


class DomainError(EvoChainError):
    """A structural matrix was requested outside its domain of definition."""

    kind = "DomainError"


class SolverInconclusive(EvoChainError):
    """The fallback idempotent search failed to converge from every start."""

    kind = "SolverInconclusive"


class UnsupportedFamily(EvoChainError):
    kind = "UnsupportedFamily"


class PreconditionViolated(EvoChainError):
    kind = "PreconditionViolated"
