"""Exception hierarchy shared by all modules."""


class EulerPmlError(Exception):
    """Base class for all package errors."""


class SupersonicFlow(EulerPmlError):
    """Background speed is not strictly subsonic."""


class NonpositiveDensityOrSound(EulerPmlError):
    """rho_bar or c_bar is not strictly positive."""


class ZeroNormalVelocity(EulerPmlError):
    """u_bar = 0 while mode/factorization formulas divide by it."""


class OutOfLayer(EulerPmlError):
    """Depth outside [0, delta] passed to the damping profile."""


class DegenerateFrequency(EulerPmlError):
    """(omega, k) at which a mode or factor formula divides by zero."""


class BranchBoundary(EulerPmlError):
    """|k| sqrt(c^2 - u^2) == |omega + k v|: branch formulas undefined."""


class SingularMatrix(EulerPmlError):
    """Polynomial matrix with identically zero determinant."""


class SingularF(EulerPmlError):
    """F evaluated at a mode exponent is numerically singular."""


class SingularInterfaceSystem(EulerPmlError):
    """Degenerate exponent coincidence in an interface solve."""


class LayerTooWide(EulerPmlError):
    """PML layer does not fit in the grid."""


class UnstableState(EulerPmlError):
    """Field magnitude blew up or became non-finite during a run."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class ReflectedContamination(EulerPmlError):
    """Reference-domain outer boundary is reachable within the horizon."""


class ZeroReference(EulerPmlError):
    """Relative error undefined: reference norm is zero."""


class CflOutOfRange(EulerPmlError):
    """Courant number outside (0, 1)."""


class ConfigError(EulerPmlError):
    """Malformed configuration file."""
