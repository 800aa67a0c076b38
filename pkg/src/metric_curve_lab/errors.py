"""Exception and warning types raised across the package."""


class CurveLabError(Exception):
    """Base class for all package errors."""


class CurveLabWarning(UserWarning):
    """Non-fatal diagnostics (dropped seeds, odd cell structure, ...)."""


class PolySyntaxError(SyntaxError, CurveLabError):
    """Malformed polynomial expression. ``offset`` is the 0-based byte offset."""

    def __init__(self, msg, text="", offset=0):
        super().__init__(f"{msg} at offset {offset}")
        self.msg = msg
        self.text = text
        self.offset = offset


class DegreeError(ValueError, CurveLabError):
    pass


class NotOnCurve(ValueError, CurveLabError):
    pass


class SingularPoint(ValueError, CurveLabError):
    pass


class HessianDegenerate(ValueError, CurveLabError):
    pass


class NoRealPoints(CurveLabError):
    pass


class TraceStopped(CurveLabError):
    """A trace halted early; the partial arc is kept on ``points``."""

    def __init__(self, msg, points=None):
        super().__init__(msg)
        self.points = points if points is not None else []


class BoxExit(TraceStopped):
    pass


class SingularEncounter(TraceStopped):
    pass


class NoConvergence(ArithmeticError, CurveLabError):
    pass


class SingularJacobian(ArithmeticError, CurveLabError):
    pass


class DegenerateInput(ValueError, CurveLabError):
    pass


class BadCellStructure(ValueError, CurveLabError):
    pass


class TooFewPoints(ValueError, CurveLabError):
    pass


class SingularCurve(ValueError, CurveLabError):
    pass


class EmptySet(ValueError, CurveLabError):
    pass
