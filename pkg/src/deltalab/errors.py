"""Exception hierarchy shared by all deltalab modules."""


class DeltaLabError(ValueError):
    """Base class for every error raised by deltalab."""


class BadShapeError(DeltaLabError):
    """Histogram edges/heights have inconsistent lengths or unordered edges."""


class NegativeHeightError(DeltaLabError):
    pass


class NonNormalizedError(DeltaLabError):
    """Total mass differs from 1 by more than the normalization tolerance."""


class ZeroMassError(DeltaLabError):
    pass


class NegativeArgumentError(DeltaLabError):
    pass


class NonPositiveScaleError(DeltaLabError):
    pass


class UndefinedConditionalError(DeltaLabError):
    """P(X+Y >= 2z) vanishes, so the conditional probability is undefined."""


class ZeroDenominatorError(DeltaLabError):
    """P(min(X,Y) >= z) vanishes, so the weighted ratio is undefined."""


class SamplerUnavailableError(DeltaLabError):
    pass


class InsufficientDataError(DeltaLabError):
    pass


class InfeasibleConstraintError(DeltaLabError):
    pass
