"""Exception types shared across the package."""


class HetsyncError(Exception):
    """Base class for all package errors."""


class UnsupportedCouplingError(HetsyncError):
    """Coupling preset requested for an N it is not defined for."""


class ReductionUnavailableError(HetsyncError):
    """Phase-difference reduction requested while symmetry-breaking terms are on."""


class IntegrationError(HetsyncError):
    """Integrator produced a non-finite state."""


class NoClosedFormError(HetsyncError):
    """No analytic spectrum is available for the requested label/parameters."""


class NotASaddleError(HetsyncError):
    """Saddle value requested at a point without both expansion and contraction."""


class NoCertifiedCycleError(HetsyncError):
    """Cycle/chain report requested outside the certified parameter window."""


class IndeterminatePointError(HetsyncError):
    """Ratio evaluated inside the exclusion region where it is numerically 0/0."""


class BoundaryStructureError(HetsyncError):
    """Boundary equilibrium count differs from the certified regime."""


class ConnectionFailure(HetsyncError):
    """A heteroclinic connection could not be verified."""


class ConfigError(HetsyncError):
    """Invalid run configuration or CLI usage."""
