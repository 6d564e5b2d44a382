"""Exception hierarchy shared by all operlab modules.

Validation problems (bad input, unsupported algebra) derive from
``ValidationError``; failures of a numerical procedure derive from
``NumericFailure``.  The CLI maps the two families to distinct exit codes.
"""


class OperlabError(Exception):
    pass


class ValidationError(OperlabError):
    pass


class NumericFailure(OperlabError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class UnsupportedAlgebra(ValidationError):
    pass


class InvalidDiagram(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class CapExceeded(ValidationError):
    pass


class EvaluationAtPole(ValidationError):
    pass


class NotGeneric(ValidationError):
    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class VariantMismatch(ValidationError):
    pass


class ShapeViolation(ValidationError):
    pass


class AssumptionViolated(ValidationError):
    def __init__(self, message, assumption=None, where=None, gap=None):
        super().__init__(message)
        self.assumption = assumption
        self.where = where
        self.gap = gap


class UnsupportedTwistedType(ValidationError):
    pass


class NotGoodInterval(ValidationError):
    pass


class NotConsecutive(ValidationError):
    pass


class PathThroughSingularity(ValidationError):
    pass


class LoopHitsSingularity(ValidationError):
    pass


class MissingSample(ValidationError):
    pass


class OutsideValidityRadius(ValidationError):
    pass


class StepUnderflow(NumericFailure):
    pass


class NonFiniteValue(NumericFailure):
    pass


class NoConvergence(NumericFailure):
    pass


class NoMaximalEigenvalue(NumericFailure):
    pass


class LinearSolveSingular(NumericFailure):
    pass


class TailNotConverged(NumericFailure):
    pass


class SeedInconsistent(NumericFailure):
    pass


class FrameSingular(NumericFailure):
    pass


class MatchingInconsistent(NumericFailure):
    pass


class DenominatorZero(NumericFailure):
    pass


class CountMismatch(NumericFailure):
    pass
