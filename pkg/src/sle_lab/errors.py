"""Exception types shared across the library.

Everything raised on bad input derives from ValueError so that callers
who do not care about the fine-grained class can catch one thing.
"""


class SleLabError(Exception):
    """Base class for library-specific errors."""


class ValidationError(SleLabError, ValueError):
    """Bad parameters or grids, detected before any heavy computation."""


class NonPositiveKappa(ValidationError):
    """kappa must be strictly positive."""


class SupercriticalR(ValidationError):
    """r >= r_c: the weight exponent q = r_c - r would not be positive."""


class BadGrid(ValidationError):
    """Time grid is unusable (dt <= 0, dt > T, or values outside range)."""


class NonInteriorPoint(ValidationError):
    """Flow started at a point not in the open upper half-plane."""


class HorizonExceeded(ValidationError):
    """Requested time lies beyond the sampled horizon of the path."""


class BadYmin(ValidationError):
    """Trace cutoff height must be positive (and not absurdly large)."""


class BadTime(ValidationError):
    """Negative time, or time outside the path horizon."""


class WrongMeasure(ValidationError):
    """Operation requires a path simulated under the other measure."""


class TooFewPoints(ValidationError):
    """Not enough samples or grid points for the requested estimate."""


class ExponentRegime(ValidationError):
    """Parameters leave the regime where the estimator is meaningful."""


class ConfigInvalid(ValidationError):
    """Experiment configuration failed validation.

    Carries the list of human-readable violations.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
