"""
Error hierarchy.

Every failure raised by the library derives from ``TreeLengthError`` and
carries a stable machine ``code`` plus the process ``exit_code`` the CLI
returns for it.
"""

from typing import Optional


class TreeLengthError(Exception):
    code = "error"
    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def error_line(self) -> str:
        return f"error code={self.code} exit={self.exit_code} message={self.message}"


class TreeParseError(TreeLengthError):
    """Malformed tree text, distribution file or split sequence text."""

    code = "parse"
    exit_code = 2

    def __init__(self, message: str, position: Optional[int] = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnknownLabelError(TreeLengthError):
    code = "unknown_label"
    exit_code = 3

    def __init__(self, label: str):
        super().__init__(f"unknown leaf label: {label!r}")
        self.label = label


class PreconditionError(TreeLengthError):
    code = "precondition"
    exit_code = 3


class InfeasibleError(TreeLengthError):
    """A configured cap would be exceeded."""

    code = "infeasible"
    exit_code = 4


class EmptyEventError(TreeLengthError):
    code = "empty_event"
    exit_code = 5


class ClassViolationError(TreeLengthError):
    """The distribution does not fit the a-priori tree class at ``step``."""

    code = "class_violation"
    exit_code = 6

    def __init__(self, step: str, message: str):
        super().__init__(f"{step}: {message}")
        self.step = step


class NotATreeMetricError(ClassViolationError):
    code = "not_a_tree_metric"

    def __init__(self, message: str):
        super().__init__("four-point", message)
        self.reason = message


class InternalConsistencyError(TreeLengthError):
    code = "internal_consistency"
    exit_code = 7


class InputNotInModelError(TreeLengthError):
    code = "input_not_in_model"
    exit_code = 8
