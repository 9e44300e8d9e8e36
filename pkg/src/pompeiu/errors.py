"""Exception types shared across the package."""


class PompeiuError(Exception):
    """Base class; ``code`` is a stable machine-readable tag."""

    code = "error"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class DenominatorOverflow(PompeiuError):
    code = "denominator_overflow"


class InsufficientWindow(PompeiuError):
    code = "insufficient_window"


class GadgetFailure(PompeiuError):
    code = "gadget_failure"


class BranchCapExceeded(PompeiuError):
    code = "branch_cap_exceeded"


class PositionError(PompeiuError):
    code = "position_error"

    def __init__(self, which: str, message: str = ""):
        self.which = which
        super().__init__(message or which)

    def to_dict(self) -> dict:
        return {"error": self.code, "which": self.which, "message": str(self)}


class AmbiguityError(PompeiuError):
    code = "ambiguity_error"


class ParseError(PompeiuError):
    code = "parse_error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 key: str | None = None):
        self.line, self.column, self.key = line, column, key
        super().__init__(message)

    def to_dict(self) -> dict:
        out = {"error": self.code, "message": str(self)}
        if self.line is not None:
            out["line"] = self.line
            out["column"] = self.column
        if self.key is not None:
            out["key"] = self.key
        return out


class ValidationError(PompeiuError):
    code = "validation_error"

    def __init__(self, invariant: str, message: str = ""):
        self.invariant = invariant
        super().__init__(message or invariant)

    def to_dict(self) -> dict:
        return {"error": self.code, "invariant": self.invariant, "message": str(self)}
