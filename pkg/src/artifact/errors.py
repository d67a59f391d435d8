"""Exception and warning types shared across the package."""


class ArtifactError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ArtifactError, ValueError):
    """An input object or configuration failed validation."""


class ParabolicChannel(ValidationError):
    """|E - a_j| is too close to 2 to classify the channel."""


class NoEllipticChannel(ValidationError):
    """The energy has no elliptic channel, so no eigenvalue process exists."""


class SingularStart(ArtifactError):
    """The lower-right block of the initial condition is not invertible."""


class SingularPivot(ArtifactError):
    """A pivot block in the Schur-complement recursion is ill-conditioned."""

    def __init__(self, message, step=None, replicas=None):
        super().__init__(message)
        self.step = step
        self.replicas = replicas


class RankCollapse(ArtifactError):
    """A propagated flag lost rank."""


class RankDeficient(ArtifactError):
    """A subspace basis is not of full column rank."""


class InvalidCovariance(ArtifactError):
    """A covariance structure is not positive semidefinite."""


class SizeCap(ArtifactError):
    """A requested dense problem exceeds the configured size cap."""


class NonRealSpectrum(ArtifactError):
    """A self-adjoint discretization produced eigenvalues off the real axis."""


class TooFewPoints(ArtifactError):
    """A point process has too few points to form gaps."""


class MissedRoot(UserWarning):
    """A determinant scan found fewer roots than an eigenvalue count predicts."""
