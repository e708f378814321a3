"""Exception hierarchy shared by all qdice modules."""


class QdiceError(Exception):
    """Base class for every error raised by qdice."""


class DimensionError(QdiceError, ValueError):
    pass


class LinearDependenceError(QdiceError, ValueError):
    """Raised by Gram-Schmidt when an input vector is (numerically) dependent."""

    def __init__(self, index, residual):
        self.index = index
        self.residual = residual
        super().__init__(
            f"vector {index} is linearly dependent on its predecessors "
            f"(residual norm {residual:.3e})"
        )


class InvalidStateError(QdiceError, ValueError):
    pass


class InvalidMeasureError(QdiceError, ValueError):
    pass


class NullEventError(QdiceError, ValueError):
    """Conditioning on an outcome whose probability is zero."""

    def __init__(self, probability=0.0, outcome=None):
        self.probability = probability
        self.outcome = outcome
        where = "" if outcome is None else f" (outcome {outcome!r})"
        super().__init__(
            f"conditioning on null event{where}: probability {probability:.3e}"
        )


class WeakResolutionError(QdiceError, ValueError):
    """The prospect family does not resolve unity on average for this state."""

    def __init__(self, residual):
        self.residual = residual
        super().__init__(
            f"weak resolution of unity violated: Tr(rho sum P(pi)) - 1 = {residual:.3e}"
        )


class CalibrationError(QdiceError, ValueError):
    pass
