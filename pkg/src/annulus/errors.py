"""Exception hierarchy shared by all modules.

InputError subclasses signal bad user input (CLI exit code 2); TheoremViolation
signals an internal assertion that would contradict a structure theorem (exit 3).
"""


class AnnulusError(Exception):
    pass


class InputError(AnnulusError):
    pass


class NotConnected(InputError):
    pass


class NotGenusZero(InputError):
    pass


class BadRotation(InputError):
    pass


class UnknownEndFace(InputError):
    pass


class TooLarge(InputError):
    pass


class WrongDegree(InputError):
    pass


class UnclassifiedFace(AnnulusError):
    pass


class LoopPivot(InputError):
    pass


class NotTriangle(InputError):
    pass


class NotQuad(InputError):
    pass


class DiagonalDegenerate(InputError):
    pass


class BadPartition(InputError):
    pass


class NotTight(InputError):
    pass


class IllegalStep(InputError):
    pass


class GroupLevelMismatch(InputError):
    pass


class SurfaceLevelMismatch(InputError):
    pass


class UnsupportedGroup(InputError):
    pass


class ValidationFailed(AnnulusError):
    pass


class EpsilonExhausted(AnnulusError):
    pass


class NotPointed(ValidationFailed):
    pass


class BadFaceCount(ValidationFailed):
    pass


class CrossingEdges(ValidationFailed):
    pass


class TheoremViolation(AnnulusError):
    """The paper guarantees this cannot happen; reaching it is an implementation bug."""


class NoMoveFound(TheoremViolation):
    pass


class CompletionStuck(TheoremViolation):
    pass
