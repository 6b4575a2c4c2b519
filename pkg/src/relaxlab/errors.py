"""Exception types shared across the package."""


class RelaxLabError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(RelaxLabError):
    """Operation requested in an unsupported spatial dimension."""


class MeanNotZero(RelaxLabError):
    """A mean-zero field was required (negative-order multipliers)."""


class MeanNotOne(RelaxLabError):
    """Density must have unit mean for Gauss-law compatibility on the torus."""


class VacuumError(RelaxLabError):
    """Density left the admissible positive band."""


class CFLViolation(RelaxLabError):
    """Post-step blow-up guard tripped; the time step is too large."""


class BlowupGuard(RelaxLabError):
    """Solution norm exceeded the runtime smallness guard."""


class ConstraintDrift(RelaxLabError):
    """Gauss-law residual div E - (1 - rho) grew beyond tolerance."""


class SamplingTooCoarse(RelaxLabError):
    """Stored limit-solution samples are too coarse for the corrector step."""


class AlignmentError(RelaxLabError):
    """Trajectories do not share a common sample-time grid."""


class NegativeTime(RelaxLabError):
    """Initial-layer evaluation requires t >= 0."""


class InsufficientPoints(RelaxLabError):
    """Rate fitting needs at least three usable (eps, error) rows."""


class NotWellPrepared(RelaxLabError):
    """Initial data violate the well-preparedness residual bounds."""


class ParseError(RelaxLabError):
    """Config file could not be parsed."""

    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key


class ValidationError(RelaxLabError):
    """Config violates an invariant."""
