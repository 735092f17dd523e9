"""Exception hierarchy for maslovkit.

Numeric failures are surfaced as typed exceptions carrying the offending
quantities, so callers (and the CLI) can report exactly what went wrong.
"""


class MaslovkitError(Exception):
    """Base class for all library errors."""


class OddDimension(MaslovkitError):
    def __init__(self, shape):
        super().__init__(f"expected a square 2n x 2n matrix, got shape {shape}")
        self.shape = shape


class NotSymplectic(MaslovkitError):
    def __init__(self, defect, tol):
        super().__init__(
            f"symplectic defect {defect:.3e} exceeds tolerance {tol:.3e}"
        )
        self.defect = defect
        self.tol = tol


class DimensionMismatch(MaslovkitError):
    pass


class RealnessViolated(MaslovkitError):
    """The shifted determinant had a large imaginary part.

    For a genuinely symplectic matrix the normalized determinant is real;
    a violation signals the input drifted far from the group.
    """

    def __init__(self, imag, scale):
        super().__init__(
            f"imaginary residue {imag:.3e} exceeds tolerance at scale {scale:.3e}"
        )
        self.imag = imag
        self.scale = scale


class NoConvergence(MaslovkitError):
    pass


class EndpointMismatch(MaslovkitError):
    pass


class InvolutionRequired(MaslovkitError):
    """Twisted iteration needs P with P^2 = I, else the path is discontinuous."""


class DegenerateEndpoint(MaslovkitError):
    def __init__(self, nullity):
        super().__init__(
            f"path endpoint is degenerate at this unit-circle point (nullity {nullity})"
        )
        self.nullity = nullity


class TangentialCrossing(MaslovkitError):
    """All perturbation attempts left a non-transversal crossing unresolved."""


class PerturbationUnstable(MaslovkitError):
    def __init__(self, ladder):
        super().__init__(f"perturbation ladder did not stabilize: {ladder}")
        self.ladder = ladder


class InfNotAttained(MaslovkitError):
    def __init__(self, value, neighbor_value):
        super().__init__(
            f"sampled neighbor has index {neighbor_value} below the family value {value}"
        )
        self.value = value
        self.neighbor_value = neighbor_value


class EpsilonUnstable(MaslovkitError):
    def __init__(self, eps, values):
        super().__init__(
            f"splitting numbers disagree between eps={eps:.3e} and eps/2: {values}"
        )
        self.eps = eps
        self.values = values


class WitnessMismatch(MaslovkitError):
    pass


class MeanIndexInconsistent(MaslovkitError):
    def __init__(self, iterate_estimate, circle_average, tol):
        super().__init__(
            f"mean index estimates disagree: iterate {iterate_estimate:.6f} vs "
            f"circle average {circle_average:.6f} (tol {tol:.6f})"
        )
        self.iterate_estimate = iterate_estimate
        self.circle_average = circle_average
        self.tol = tol


class AmbiguousCeiling(MaslovkitError):
    """m*theta/(2 pi) sits within the guard band of an integer and the angle
    has no exact rational form; the closed-form index is discontinuous there."""


class HypothesesNotMet(MaslovkitError):
    """The positivity hypotheses for the common jump search fail for an
    input path, so the search is not even well-posed."""


class NoneFoundWithinBound(MaslovkitError):
    def __init__(self, n_max):
        super().__init__(
            f"no common jump tuple found with N <= {n_max}; this is not a "
            f"theory violation, raise the bound and retry"
        )
        self.n_max = n_max


class SchemaError(MaslovkitError):
    pass
