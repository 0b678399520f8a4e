"""Exception types shared across the package."""


class FractalZetaError(Exception):
    """Base class for all package-specific errors."""


class ResolutionTooCoarse(FractalZetaError):
    """Requested accuracy is unattainable within the configured cell/sample budget."""


class VarianceOverflow(FractalZetaError):
    """Monte Carlo variance diverges, signalling Re s at or below the abscissa of convergence."""


class QuadratureNonconvergent(FractalZetaError):
    """Successive quadrature refinement failed to stabilize to the requested tolerance."""


class NoClosedForm(FractalZetaError):
    """No closed-form zeta function is known for the given set descriptor."""


class DeltaTooSmall(FractalZetaError):
    """The cutoff delta violates the lower bound required by the closed form."""


class NearPole(FractalZetaError):
    """Evaluation point is too close to a pole for direct evaluation."""


class BoundaryPole(FractalZetaError):
    """A pole or zero sits too close to the search-region boundary."""


class NonIsolable(FractalZetaError):
    """Rectangle subdivision failed to isolate a pole (or its order exceeds the supported range)."""


class ContourContaminated(FractalZetaError):
    """Contour quadrature did not stabilize when the node count was doubled."""


class PoleOnLine(FractalZetaError):
    """A growth-probe sample point sits on top of a pole."""


class NotAPole(FractalZetaError):
    """The given point is not a pole of the zeta function."""


class DimensionCollision(FractalZetaError):
    """A complex dimension coincides with the ambient dimension (N - omega == 0)."""


class NonpositiveContent(FractalZetaError):
    """A residue that should yield a positive Minkowski content is nonpositive."""


class InsufficientSamples(FractalZetaError):
    """Too few tube samples (or too narrow a scale range) for a stable estimate."""
