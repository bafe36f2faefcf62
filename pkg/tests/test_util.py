"""Test for spreadcore.util module."""
import unittest

import numpy as np

from spreadcore.codes import codes
from spreadcore.exceptions import (
    FrontHitBoundary,
    HB1Violated,
    InvalidInvocation,
    NoConvergence,
    TaskException,
)
from spreadcore.util import exit_code_for, format_value


class ExitCodeForTest(unittest.TestCase):
    def test_exit_code_for(self):
        self.assertEqual(2, exit_code_for(HB1Violated(1, -0.5)))
        self.assertEqual(2, exit_code_for(FrontHitBoundary(3.0, 40.0, 42.0)))
        self.assertEqual(1, exit_code_for(NoConvergence("orbit", 10)))
        self.assertEqual(1, exit_code_for(InvalidInvocation("bad")))
        self.assertEqual(
            1, exit_code_for(TaskException(HB1Violated(1, -0.5), (), {}))
        )

    def test_codes(self):
        self.assertEqual(0, codes["determinate"])
        self.assertEqual(codes["usage_error"], codes["operational_error"])
        self.assertEqual(2, codes["verdict_failure"])


class FormatValueTest(unittest.TestCase):
    def test_format_value(self):
        self.assertEqual("0.1", format_value(0.1))
        self.assertEqual("1e-12", format_value(np.float64(1e-12)))
        self.assertEqual("true", format_value(True))
        self.assertEqual("false", format_value(np.bool_(False)))
        self.assertEqual("", format_value(None))
        self.assertEqual("7", format_value(7))
        self.assertEqual("determinate", format_value("determinate"))
