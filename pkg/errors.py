"""
Exception hierarchy for sheaf computations
"""


class SheafCalcError(Exception):
    """Base class for all errors raised by this package"""
    pass


class ParseError(SheafCalcError):
    """Malformed serialized input, reported with line and column"""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValidationError(SheafCalcError):
    """Object violates a structural invariant (d∘d ≠ 0, non-functoriality)"""
    pass


class PreconditionError(SheafCalcError):
    """Operation called on inputs outside its domain"""
    pass


class BudgetExceededError(SheafCalcError):
    """Computation refused because a configured size budget would be exceeded"""
    pass
