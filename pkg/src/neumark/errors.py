"""Exception hierarchy shared by every stage of the pipeline."""


class NeumarkError(ValueError):
    """Base class for all domain errors raised by this package."""


class NotUnitary(NeumarkError):
    pass


class DimensionMismatch(NeumarkError):
    pass


class NotNormalized(NeumarkError):
    pass


class TooFewElements(NeumarkError):
    pass


class IncompletePovm(NeumarkError):
    """The operators do not resolve the identity within tolerance."""

    def __init__(self, residual, tolerance):
        super().__init__(
            f"completeness residual {residual:.3e} exceeds tolerance {tolerance:.1e}"
        )
        self.residual = residual
        self.tolerance = tolerance


class ZeroProbabilityOutcome(NeumarkError):
    pass


class NotContraction(NeumarkError):
    """A factor produced during module extraction has a singular value above one."""


class InsufficientAncillas(NeumarkError):
    pass


class TooManyQubits(NeumarkError):
    pass


class LayoutMismatch(NeumarkError):
    pass
