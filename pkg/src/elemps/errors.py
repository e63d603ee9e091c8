"""Exception hierarchy shared by every stage of the pipeline."""


class ElempsError(Exception):
    """Base class for all errors raised by this package."""


class DivisionError(ElempsError):
    """Exact polynomial division left a nonzero remainder."""


class VariableError(ElempsError):
    """A variable is not among the polynomial's variables."""


class TowerError(ElempsError):
    """A generator lacks a derivative rule for the requested variable."""


class NotRationalError(ElempsError):
    """An expression contains heads that are not rational in the tower."""


class ODESyntaxError(ElempsError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnsupportedFunctionError(ElempsError):
    """Unknown function head in the input."""


class UnsupportedInputError(ElempsError):
    """Input lies outside the class the reducer can handle."""


class MultipleTowersError(UnsupportedInputError):
    """The ODE needs more than one transcendental generator."""

    def __init__(self, detail=""):
        msg = "MultipleTowersError: the ODE contains more than one irreducible elementary function"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class SearchBudgetExceeded(ElempsError):
    """Case-split count or wall-clock deadline exhausted."""


class NotFound(ElempsError):
    """No candidate exists at the requested degrees."""


class NotReducible(ElempsError):
    """D[G]/f cannot be written as a function of x and G alone."""


class AssociatedUnsolved(ElempsError):
    """Every subsolver in the chain failed on a reduced first-order ODE."""


class GuardViolation(ElempsError):
    """System violates a guard required by the S-function route."""


class NonElementaryResidual(ElempsError):
    """An unevaluated integral survives where it cannot be certified."""


class VerificationFailure(ElempsError):
    """A produced invariant failed symbolic verification (a bug)."""
