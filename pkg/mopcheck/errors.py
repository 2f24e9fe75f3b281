"""Error hierarchy. Every documented failure of an operation is a MopError."""


class MopError(Exception):
    pass


class ExactArithmeticError(MopError, ZeroDivisionError):
    pass


class SingularMatrixError(MopError):
    pass


class ShapeMismatchError(MopError, ValueError):
    pass


class WeightError(MopError, ValueError):
    """Invalid kernel parameters, nonexistent moments or a non-positive factor."""


class SingularHankelError(MopError):
    pass


class FiltrationError(MopError):
    """The operator does not preserve the degree filtration."""


class WindowError(MopError):
    """A finite window is too small for the requested computation."""


class InconclusiveError(MopError):
    """A bounded search ran out of budget (order cap, window) without deciding."""


class CertificateError(MopError):
    """An identity that must hold exactly did not."""

    def __init__(self, name: str, residual: str = ""):
        self.name = name
        self.residual = residual
        super().__init__(f"{name} failed" + (f": {residual}" if residual else ""))


class SpecSyntaxError(MopError):
    def __init__(self, message: str, line: int, column: int, offset: int):
        self.line = line
        self.column = column
        self.offset = offset
        super().__init__(f"{message} at line {line}, column {column} (offset {offset})")


class SpecSemanticError(MopError):
    pass
