"""Exception types shared across the toolkit."""


class IsobispecError(Exception):
    """Base class for all toolkit errors."""


class DelayOutOfRange(IsobispecError, ValueError):
    """Delay parameter outside the supported range."""


class OutOfSupport(IsobispecError, ValueError):
    """Evaluation or integration outside a function's support."""


class SupportMismatch(IsobispecError, ValueError):
    """Operands live on incompatible supports or grids."""


class ZeroOperator(IsobispecError, ValueError):
    """The discretized integral operator is numerically zero."""


class ConvergenceFailure(IsobispecError, RuntimeError):
    """An iterative refinement did not reach its tolerance."""


class GridTooCoarseForRho(IsobispecError, ValueError):
    """Requested |rho| lies outside the trust region of the current grid."""


class NoConvergence(IsobispecError, RuntimeError):
    """Newton iteration did not converge."""


class LeftTrustRegion(IsobispecError, RuntimeError):
    """Newton iterate escaped the grid's trusted |rho| region."""


class ContourThroughZero(IsobispecError, RuntimeError):
    """A winding-number contour could not be cleared of near-zeros."""


class DegenerateFamily(IsobispecError, RuntimeError):
    """The eigenfunction integral vanishes; the omega channel degenerates."""
