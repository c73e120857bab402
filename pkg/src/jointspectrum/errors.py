"""Exception types shared across the library."""


class JointSpectrumError(Exception):
    """Base class for all library-specific errors."""


class SingularInput(JointSpectrumError):
    """Input matrix is singular or numerically indistinguishable from singular."""


class NumericalFailure(JointSpectrumError):
    """A dense linear-algebra routine failed to converge or returned garbage."""


class BadIndex(JointSpectrumError):
    """Representation index k outside the valid range."""


class BadResolution(JointSpectrumError):
    """Direction-set resolution below the minimum (or not realizable)."""


class EmptyInput(JointSpectrumError):
    """An operation that needs at least one point/matrix got none."""


class DirsetMismatch(JointSpectrumError):
    """Two support bodies built over different direction sets were combined."""


class DegenerateBody(JointSpectrumError):
    """All witnesses of a body sit at the origin; its cone is undefined."""


class ParseError(JointSpectrumError):
    """Malformed matrix-set file; message carries the offending field."""


class DimMismatch(JointSpectrumError):
    """Matrices of inconsistent dimension were mixed."""
