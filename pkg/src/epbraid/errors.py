"""Exception hierarchy shared across the package.

Two broad families matter to callers: validation failures (bad inputs,
malformed configuration) and numeric failures (degeneracies, ambiguous
continuations, unstable integration).  The CLI maps them to distinct
exit codes.
"""


class EpbraidError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(EpbraidError, ValueError):
    """Input values or configuration violate a documented precondition."""


class NumericError(EpbraidError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy result."""


class DegenerateLoopError(NumericError):
    """A control loop passes too close to an exceptional point."""


class AmbiguousCrossingError(NumericError):
    """Strand crossings could not be ordered unambiguously after refinement."""


class DegenerateEigenbasisError(NumericError):
    """Eigenvectors requested at (or numerically at) a spectral degeneracy."""


class IntegrationUnstableError(NumericError):
    """State norm grew during propagation, signalling a step size too large."""


class FitDivergedError(NumericError):
    """The damped least-squares iteration failed to make progress."""
