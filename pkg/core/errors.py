"""
core/errors.py | Error Types
Purpose: Named exception types for contract, parsing, numerical and configuration failures.
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: None
Abstract Spec: Every type subclasses the built-in exception a caller would otherwise catch
(ValueError, ArithmeticError), so generic handlers in entry scripts keep working.
"""


class ContractViolation(ValueError):
    """Raised when an environment or agent is called outside its preconditions."""


class LayoutParseError(ValueError):
    """Raised when a grid layout string is malformed; carries the offending row/col."""

    def __init__(self, message: str, row: int = None, col: int = None):
        self.detail = message
        self.row = row
        self.col = col
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", col {col})" if col is not None else ")")
        super().__init__(f"[ERROR] {message}{where}")


class SingularDesignError(ArithmeticError):
    """Raised when X^T X is rank deficient or too ill-conditioned to invert."""


class DegenerateUpdateError(ArithmeticError):
    """Raised when a Sherman-Morrison denominator falls below the numerical floor."""


class ConfigError(ValueError):
    """Raised when an experiment config field is missing or violates its constraint."""

    def __init__(self, field: str, constraint: str):
        self.field = field
        self.constraint = constraint
        super().__init__(f"[ERROR] Config field '{field}': {constraint}")


class BudgetError(ValueError):
    """Raised when a measurement or step budget cannot support the requested operation."""
