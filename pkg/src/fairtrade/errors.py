"""Exception types shared across the package.

The CLI maps these onto exit codes: data problems (malformed input,
degenerate groups or labels) exit with 3, infeasible targets with 4.
"""


class DataFormatError(ValueError):
    """Input file or table violates the expected format."""


class DegenerateGroupError(ValueError):
    """A group is empty, or the group share is 0 or 1."""


class DegenerateLabelsError(ValueError):
    """Label distribution makes the requested quantity undefined (e.g. all labels equal)."""


class InfeasibleError(ValueError):
    """Requested target cannot be realized with the available counts."""


class StepSizeError(RuntimeError):
    """Gradient descent diverged (loss became non-finite)."""
