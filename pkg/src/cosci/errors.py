"""Exception hierarchy shared by all cosci modules.

Each exception carries the process exit code the command-line front-end
reports for it.
"""


class CosciError(Exception):
    """Base class for all cosci errors."""

    exit_code = 1


class InputError(CosciError, ValueError):
    """Invalid argument, malformed data or a violated precondition."""

    exit_code = 2


class IngestionError(InputError):
    """A data file could not be read into a matrix."""


class FitError(CosciError, RuntimeError):
    """A statistical model could not be fitted.

    Parameters
    ----------
    message : str
        Human readable description.
    stage : str, optional
        Pipeline stage that failed (``"null"``, ``"mixture"``, ...).
    diagnostics : dict, optional
        Optimizer state or other details useful for debugging.
    """

    exit_code = 3

    def __init__(self, message, stage=None, diagnostics=None):
        if stage is not None:
            message = f"[{stage}] {message}"
        super().__init__(message)
        self.stage = stage
        self.diagnostics = dict(diagnostics or {})


class CalibrationError(CosciError, RuntimeError):
    """No grid threshold met the detection tolerance.

    The full detection-fraction table is attached as ``table``, a dict
    mapping each grid threshold to the fraction of replicates whose score
    reached it.
    """

    exit_code = 4

    def __init__(self, message, table):
        super().__init__(message)
        self.table = dict(table)
