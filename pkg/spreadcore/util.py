"""Provide utility for the spreadcore package."""
import numpy as np

from .codes import codes
from .exceptions import FrontHitBoundary, HypothesisFailure

_exit_code_mapping = {
    FrontHitBoundary: codes["front_hit_boundary"],
    HypothesisFailure: codes["hypothesis_failure"],
}


def exit_code_for(exception):
    """Return the process exit code that reports ``exception``.

    :param exception: The exception that ended a command.

    """
    for exception_class in type(exception).__mro__:
        if exception_class in _exit_code_mapping:
            return _exit_code_mapping[exception_class]
    return codes["operational_error"]


def format_value(value):
    """Return the text of one CSV or report value.

    Floats are written in their shortest round-trip form, booleans as
    ``true``/``false`` and ``None`` as an empty field.

    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)
