"""Exception hierarchy for twistorlab."""


class TwistorError(Exception):
    """Base class for all library errors."""


class NonSymmetric(TwistorError, ValueError):
    pass


class AmbientMismatch(TwistorError, ValueError):
    pass


class DimensionMismatch(TwistorError, ValueError):
    pass


class InvalidStructure(TwistorError, ValueError):
    """A matrix that should be a g-orthogonal complex structure is not one."""


class NotTangent(TwistorError, ValueError):
    pass


class EvaluationFailure(TwistorError, RuntimeError):
    pass


class BlockFailure(TwistorError, RuntimeError):
    """A candidate quaternionic block came out rank deficient."""


class DegenerateCluster(TwistorError, ValueError):
    pass


class InfeasibleSpec(TwistorError, ValueError):
    pass


class NotInDomain(TwistorError, ValueError):
    pass


class HypothesisViolated(TwistorError, ValueError):
    pass


class RankJump(TwistorError, RuntimeError):
    """Distribution rank changes inside the probe radius."""


class SubspaceMismatch(TwistorError, ValueError):
    pass


class UnknownCase(TwistorError, KeyError):
    pass
