"""Exception types shared across the package."""


class ReslError(Exception):
    """Base class for all domain errors raised by resl."""


# -- construction / validation ------------------------------------------------

class EmptySupport(ReslError):
    """Perturbation has no support sites (p must be >= 1)."""


class SingularCoefficient(ReslError):
    """An off-diagonal coefficient a_x or s_x is numerically singular."""


class AmbiguousOrder(ReslError):
    """Neither support-edge pattern holds, so the order q cannot be inferred."""


# -- elementary maps and polynomial plumbing ----------------------------------

class DivisionAtZero(ReslError):
    """Evaluation requires 1/k but k = 0."""


class OnCut(ReslError):
    """Spectral parameter lies within tolerance of the essential spectrum [-2, 2]."""


class DuplicateNodes(ReslError):
    """Interpolation nodes are not pairwise distinct."""


class InconsistentSamples(ReslError):
    """Sample values are not consistent with the assumed model/degree."""


class StructureViolation(ReslError):
    """The solution recursion produced coefficients outside the admissible band."""


# -- spectra ------------------------------------------------------------------

class DegreeMismatch(ReslError):
    """A determinant polynomial does not have the structurally required degree."""


class NonConvergence(ReslError):
    """Iterative root refinement failed to converge."""


class ClassificationAnomaly(ReslError):
    """Self-adjoint data produced a root configuration that should be impossible."""


class NotAnEigenvalue(ReslError):
    """The requested point is not a determinant zero inside the unit disc."""


class DegenerateKernel(ReslError):
    """Numerical rank of a kernel space is ambiguous at the working tolerance."""


class SingularDerivativeBlock(ReslError):
    """The derivative block that should be invertible on the kernel is not."""


class AtPole(ReslError):
    """Evaluation requested at (or numerically on top of) a pole."""


# -- scattering ---------------------------------------------------------------

class SingularDenominator(ReslError):
    """A Weyl-function denominator matrix is numerically singular."""


class DegreeOverflow(ReslError):
    """The determinant came out with a higher degree than the support allows."""


class OnRoot(ReslError):
    """Evaluation point coincides with a root of the determinant."""


# -- inverse problems ---------------------------------------------------------

class MomentDegeneracy(ReslError):
    """Block orthogonalization broke down: the measure is not admissible."""


class RoundTripFailure(ReslError):
    """Reconstructed coefficients fail to reproduce the input data."""


class DegenerateClustering(ReslError):
    """Eigenvalue clusters cannot be separated at the working tolerance."""


class AtEigenvalue(ReslError):
    """The Weyl function was evaluated at a spectral point."""


# -- sweeps -------------------------------------------------------------------

class TrackingLoss(ReslError):
    """Root correspondence between successive coupling values is ambiguous."""
