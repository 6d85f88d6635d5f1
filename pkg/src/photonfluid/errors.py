"""Exception types shared across the package."""


class PhotonFluidError(Exception):
    """Base class for package errors."""


class ConfigError(PhotonFluidError):
    """Invalid or inconsistent configuration (bad field, overlapping schedule...)."""


class NumericalError(PhotonFluidError):
    """A numerical procedure failed to converge or produced ill-conditioned results."""


class StepSizeError(PhotonFluidError):
    """Step size violates an accuracy guard (e.g. nonlinear phase per step too large)."""


class BlowupError(PhotonFluidError):
    """Non-finite samples appeared during propagation."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class TrackingError(PhotonFluidError):
    """A tracked feature or wavepacket left the analysis window."""
