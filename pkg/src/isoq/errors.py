"""Exception hierarchy shared by all isoq modules."""


class IsoqError(Exception):
    """Base class for every error raised by isoq."""


class DomainError(IsoqError, ValueError):
    """A scalar argument lies outside its admissible range."""


class DegenerateShape(IsoqError, ValueError):
    """Radial profile dips below the degeneracy threshold."""


class NotStarShaped(IsoqError, ValueError):
    """Some ray from the origin fails to meet the boundary exactly once."""


class NotNormalized(IsoqError, ValueError):
    """The shape's area differs from pi; call normalize_volume first."""


class BallLike(IsoqError, ValueError):
    """Asymmetry vanishes, so the quotient is undefined."""


class EmptyBoundary(IsoqError, ValueError):
    """The probe ball does not meet the boundary."""


class AliasError(IsoqError, ValueError):
    """Requested truncation degree exceeds N/4."""


class PreconditionError(IsoqError, ValueError):
    """Smallness or centering hypothesis of a spectral estimate fails."""


class ConfigError(IsoqError, ValueError):
    """Invalid optimizer or experiment configuration."""


class InsufficientData(IsoqError, ValueError):
    """Not enough rows to fit an extrapolation."""


class DegenerateDenominator(IsoqError, ValueError):
    """The L1 distance to the translation modes is numerically zero."""
