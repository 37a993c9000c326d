"""
Unit tests for the solver logger and its environment configuration.
"""

import io
import os
import json
import logging
import tempfile
import unittest
from unittest.mock import patch

from ascbs.utils.logging import configure_from_env, get_logger


class TestConfigureFromEnv(unittest.TestCase):
    """Tests for the ASCBS_LOG level setting"""

    def setUp(self):
        self.stream = io.StringIO()
        self.handler = logging.StreamHandler(self.stream)
        get_logger().logger.addHandler(self.handler)

    def tearDown(self):
        get_logger().logger.removeHandler(self.handler)
        get_logger().set_level(logging.ERROR)

    def test_known_levels(self):
        for name, level in (("debug", logging.DEBUG), ("INFO", logging.INFO), ("error", logging.ERROR)):
            with patch.dict(os.environ, {"ASCBS_LOG": name}):
                configure_from_env()
            self.assertEqual(get_logger().logger.level, level, name)
        self.assertEqual(self.stream.getvalue(), "")

    def test_unknown_value_warns(self):
        """Test that an unknown level falls back to error and says so while at error level"""
        get_logger().set_level(logging.ERROR)
        with patch.dict(os.environ, {"ASCBS_LOG": "verbose"}):
            configure_from_env()
        self.assertEqual(get_logger().logger.level, logging.ERROR)
        self.assertIn("Unknown ASCBS_LOG value 'verbose'", self.stream.getvalue())
        get_logger().warning("suppressed at error level")
        self.assertNotIn("suppressed", self.stream.getvalue())


class TestEvents(unittest.TestCase):
    """Tests for structured event records"""

    def tearDown(self):
        get_logger().set_level(logging.ERROR)

    def test_expansions_only_at_debug(self):
        logger = get_logger()
        logger.start_solve("run", {"variant": "a-nd"})
        logger.log_expansion(5, 2, 0, "vertex")
        logger.set_level(logging.DEBUG)
        logger.log_expansion(6, 1, 1, "edge")
        logger.end_solve("solved", {"soc": 6})
        self.assertEqual([e["type"] for e in logger.events], ["solve_start", "ct_expand", "solve_end"])
        self.assertEqual(logger.events[1]["cost"], 6)

    def test_save_events(self):
        logger = get_logger()
        logger.start_solve("run", {})
        logger.end_solve("timeout", {"soc": None})
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "logs", "events.json")
            logger.save_events(path)
            with open(path) as f:
                events = json.load(f)
        self.assertEqual(events[-1]["outcome"], "timeout")
        self.assertEqual(events[0]["run_id"], "run")


if __name__ == "__main__":
    unittest.main()
