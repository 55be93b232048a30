"""Exception types shared across the toolkit."""


class ErgokitError(Exception):
    """Base class for all toolkit-specific failures."""


class SupportViolation(ErgokitError):
    """A relative entropy was requested between states/distributions with
    incompatible supports (the reference vanishes where the argument does not)."""


class SupportMismatch(ErgokitError):
    """Two geometric states cannot be paired point-by-point on the manifold."""


class EmptyShell(ErgokitError):
    """A microcanonical energy shell contains no grid cells."""


class NonDeterministicKernel(ErgokitError):
    """An operation that requires a permutation (deterministic) kernel received
    a genuinely stochastic one."""


class NotConverged(ErgokitError):
    """Iterative refinement hit its limit before meeting the accuracy gate."""
