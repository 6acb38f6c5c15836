"""Exception hierarchy shared by every module."""


class LpPathError(Exception):
    """Base class for all errors raised by lpcritpath."""


class InstanceParseError(LpPathError):
    """Instance file is unreadable or does not match the schema."""


class DimensionMismatchError(LpPathError):
    """Arrays in an instance have inconsistent shapes."""


class NotPositiveDefiniteError(LpPathError):
    """Gram matrix (or a principal block of it) is not positive definite."""


class PenaltyDerivativeAtZero(LpPathError):
    """The lp penalty derivative is unbounded at zero."""


class ZeroComponentError(LpPathError):
    """A component listed as active is zero."""


class NotCriticalError(LpPathError):
    """Input point does not satisfy the first-order critical condition."""


class BranchPointError(LpPathError):
    """Augmented Jacobian is rank deficient: more than one path passes here."""


class StalledError(LpPathError):
    """Continuation step size underflowed."""


class CorrectorDivergenceError(LpPathError):
    """Newton corrector failed after the maximum number of retries."""


class SeedCorrectionError(LpPathError):
    """Could not correct a seeded point onto the critical curve."""


class NonOrthogonalInstanceError(LpPathError):
    """Operation requires G = I."""


class SegmentMismatchError(LpPathError):
    """Two segments do not share an endpoint."""


class VariantMismatchError(LpPathError):
    """Greedy path and OMP run come from different variants."""


class SingularHessianError(LpPathError):
    """Restricted Hessian K is singular where an inverse is needed."""


class ConfigError(LpPathError):
    """Unknown or malformed tolerance override."""


class FixtureMissingError(LpPathError):
    """A bundled or user-supplied verification fixture is absent."""
