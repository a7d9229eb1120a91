"""Exception hierarchy shared by all modules."""


class HardballError(Exception):
    """Base class for every error raised by this package."""


class DomainViolationError(HardballError, ValueError):
    """A point lies outside the closed box."""


class ParameterError(HardballError, ValueError):
    """An argument is outside the range an operation accepts."""


class DegenerateGradientError(HardballError, ValueError):
    """A pair constraint was evaluated at coincident points."""


class LPNumericError(HardballError, RuntimeError):
    """The simplex solver hit its iteration cap or lost feasibility."""


class AmbiguousClassificationError(HardballError):
    """Neither (or both) Farkas certificates cleared their thresholds.

    Parameters
    ----------
    margin : float
        Optimal ascent margin of the direction LP.
    residual : float
        Euclidean norm of the best balancing combination of gradients.
    """

    def __init__(self, margin, residual, message=None):
        self.margin = margin
        self.residual = residual
        super().__init__(
            message
            or f"ambiguous classification: ascent margin {margin:.3e}, "
            f"balance residual {residual:.3e}"
        )


class PreconditionError(HardballError, ValueError):
    """An operation was handed input that violates its stated precondition."""


class PartialRetractionError(HardballError):
    """Some flows stalled below the target level."""

    def __init__(self, stalled, report=None):
        self.stalled = list(stalled)
        self.report = report
        super().__init__(f"{len(self.stalled)} trajectories stalled: {self.stalled}")


class IterationCapError(HardballError, RuntimeError):
    """A flow exhausted its iteration budget in strict mode."""


class NonUniquenessError(HardballError):
    """Multistart root finding converged to distinct points."""


class DegenerateSampleError(HardballError):
    """The Jacobian of the chain equations lost rank at a sample."""


class GeodesicAmbiguityError(HardballError, ValueError):
    """A chain link points (almost) straight against the spanned axis."""


class InsufficientDataError(HardballError):
    """Fewer than two roadmap nodes could be sampled."""
