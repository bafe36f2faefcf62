"""Test for spreadcore.exceptions module."""
import pickle
import unittest

from spreadcore.exceptions import (
    ConfigError,
    HypothesisFailure,
    HypothesisHB0Violated,
    SpreadcoreException,
    TaskException,
)


class PickleTest(unittest.TestCase):
    def test_pickle__keeps_state(self):
        exception = HypothesisHB0Violated("b1", 0.25, 0.5, -1.0)
        restored = pickle.loads(pickle.dumps(exception))
        self.assertIsInstance(restored, HypothesisFailure)
        self.assertEqual(str(exception), str(restored))
        self.assertEqual(
            ("b1", 0.25, 0.5, -1.0),
            (restored.coefficient, restored.t, restored.x, restored.value),
        )

    def test_pickle__task_exception(self):
        exception = TaskException(ConfigError("run", "L", "missing"), (3,), {})
        restored = pickle.loads(pickle.dumps(exception))
        self.assertIsInstance(restored.original_exception, ConfigError)
        self.assertEqual((3,), restored.task_args)

    def test_hierarchy(self):
        self.assertTrue(issubclass(HypothesisHB0Violated, SpreadcoreException))
