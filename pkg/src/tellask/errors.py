"""Exception types shared across the package."""


class TellaskError(Exception):
    """Base class for all package errors."""


class BoundsError(TellaskError):
    """Variable bounds outside the representable range, or lo > hi."""


class DomainError(TellaskError):
    """Malformed domain (e.g. set glb not a subset of lub)."""


class KindError(TellaskError):
    """Variable accessed with an accessor of the wrong kind."""


class ArityError(TellaskError):
    """Operation called with the wrong number of arguments."""


class UndeclaredVariable(TellaskError):
    """Process references a variable with no declaration in scope."""


class UnknownProcedure(TellaskError):
    """Call to a procedure name absent from the procedure table."""


class UnknownCell(TellaskError):
    """Cell operation on a name that was never created."""


class DoubleAssign(TellaskError):
    """Two assign/exch operations target the same cell in one time unit."""


class UnguardedRecursion(TellaskError):
    """Recursive call not guarded by a next, outside general-recursion mode."""


class BudgetExceeded(TellaskError):
    """Per-unit process budget exhausted (general-recursion mode)."""


class InconsistentUnit(TellaskError):
    """The store of one time unit became inconsistent."""

    def __init__(self, unit: int, constraints: list[str]):
        self.unit = unit
        self.constraints = constraints
        shown = "; ".join(constraints[-8:])
        super().__init__(f"store inconsistent in time unit {unit}: {shown}")


class DslSyntaxError(TellaskError):
    """Spec text failed to parse; carries line and column."""

    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{message} (line {line}, column {col})")


class UnknownName(TellaskError):
    """Elaboration met an unbound identifier."""


class DimensionError(TellaskError):
    """Indexed access to a variable with no declared dimension, or out of range."""


class ConfigError(TellaskError):
    """Invalid model configuration."""


class RangeError(TellaskError):
    """Value outside the accepted range (e.g. factor oracle symbols)."""
