"""
Unit tests for the command-line front end.
"""

import io
import os
import json
import tempfile
import unittest
from unittest.mock import patch

import pandas as pd

from ascbs.cli import EXIT_ERROR, EXIT_OK, EXIT_TIMEOUT, EXIT_UNSOLVABLE, main
from ascbs.bench import BENCH_COLUMNS
from tests.fixtures import data_path


INSTANCE = data_path("three_streams_instance.json")
SOLUTION = data_path("three_streams_solution.json")
MAP = os.path.abspath(data_path("empty-8-8.map"))
SCEN = data_path("empty-8-8-random-1.scen")


def run(argv):
    """Run the CLI and return (exit code, captured stdout)."""
    with patch('sys.stdout', new_callable=io.StringIO) as out, patch('sys.stderr', new_callable=io.StringIO):
        try:
            code = main(argv)
        except SystemExit as e:
            code = e.code
    return code, out.getvalue()


def write_json(directory, name, document):
    path = os.path.join(directory, name)
    with open(path, "w") as f:
        json.dump(document, f)
    return path


def instance_doc(streams, cycle_time):
    return {
        "map": MAP,
        "mode": "uniform",
        "cycle_time": cycle_time,
        "streams": [
            {"id": i, "start": list(s), "goal": list(g), "t_start": t}
            for i, (s, g, t) in enumerate(streams)
        ],
    }


class TestSolveCommand(unittest.TestCase):
    """Tests for the solve subcommand"""

    def test_solve_and_validate(self):
        with tempfile.TemporaryDirectory() as tmp:
            out_path = os.path.join(tmp, "solution.json")
            code, out = run(["solve", "--instance", INSTANCE, "--out", out_path])
            self.assertEqual(code, EXIT_OK)
            self.assertIn("outcome=solved", out)
            self.assertTrue(out.startswith("variant=ASCBS-A-ND"))
            code, out = run(["validate", "--instance", INSTANCE, "--solution", out_path])
            self.assertEqual(code, EXIT_OK)

    def test_unsolvable(self):
        """Test that two streams sharing a start and start time exit with code 2"""
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(tmp, "dup.json", instance_doc([((0, 0), (0, 1), 0), ((0, 0), (0, 1), 0)], 1))
            code, out = run(["solve", "--instance", path])
            self.assertEqual(code, EXIT_UNSOLVABLE)
            self.assertIn("soc=-", out)

    def test_timeout(self):
        code, out = run(["solve", "--instance", INSTANCE, "--timeout", "0"])
        self.assertEqual(code, EXIT_TIMEOUT)
        self.assertIn("outcome=timeout", out)

    def test_from_scenario(self):
        code, out = run(["solve", "--map", MAP, "--scen", SCEN, "--streams", "2", "--cycle", "3",
                         "--variant", "a-d", "--timeout", "30"])
        self.assertEqual(code, EXIT_OK)
        self.assertIn("variant=ASCBS-A-D", out)

    def test_missing_inputs(self):
        code, _ = run(["solve", "--map", MAP])
        self.assertEqual(code, EXIT_ERROR)

    def test_event_log(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "events.json")
            code, _ = run(["solve", "--instance", INSTANCE, "--log-events", path])
            self.assertEqual(code, EXIT_OK)
            with open(path) as f:
                events = json.load(f)
            self.assertEqual(events[-1]["type"], "solve_end")


class TestValidateCommand(unittest.TestCase):
    """Tests for the validate subcommand"""

    def test_bundled_solution(self):
        code, out = run(["validate", "--instance", INSTANCE, "--solution", SOLUTION])
        self.assertEqual(code, EXIT_OK)
        self.assertIn("valid", out)

    def test_off_map_action(self):
        with open(SOLUTION) as f:
            doc = json.load(f)
        doc["streams"][2]["actions"] = "U"
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(tmp, "bad.json", doc)
            code, out = run(["validate", "--instance", INSTANCE, "--solution", path])
        self.assertEqual(code, EXIT_ERROR)
        self.assertIn("structural", out)

    def test_swap_collision(self):
        """Test that a swap is printed as one edge event within horizon 1"""
        with tempfile.TemporaryDirectory() as tmp:
            inst = write_json(tmp, "swap.json", instance_doc([((0, 0), (0, 1), 0), ((0, 1), (0, 0), 0)], 2))
            sol = write_json(tmp, "swap_solution.json", {
                "cycle_time": 2,
                "soc": 2,
                "streams": [
                    {"id": 0, "t_start": 0, "start": [0, 0], "actions": "R"},
                    {"id": 1, "t_start": 0, "start": [0, 1], "actions": "L"},
                ],
            })
            code, out = run(["validate", "--instance", inst, "--solution", sol, "--horizon", "1"])
        self.assertEqual(code, EXIT_ERROR)
        events = [line for line in out.splitlines() if line.startswith("t=")]
        self.assertEqual(events, ["t=0 kind=e a=(0,0) b=(1,0) at=(0,0)->(0,1)"])

    def test_shifted_start_time(self):
        with open(SOLUTION) as f:
            doc = json.load(f)
        doc["streams"][0]["t_start"] = 1
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(tmp, "shifted.json", doc)
            code, out = run(["validate", "--instance", INSTANCE, "--solution", path])
        self.assertEqual(code, EXIT_ERROR)
        self.assertNotIn("valid", out)

    def test_missing_file(self):
        code, _ = run(["validate", "--instance", "no-such-file.json", "--solution", SOLUTION])
        self.assertEqual(code, EXIT_ERROR)


class TestBenchCommand(unittest.TestCase):
    """Tests for the bench subcommand"""

    def bench(self, csv_path):
        return run(["bench", "--map", MAP, "--scen", SCEN, "--streams-list", "2", "--cycle-list", "2",
                    "--seeds", "1", "--variants", "a-nd,a-d", "--timeout", "30", "--csv", csv_path,
                    "--deterministic"])

    def test_rows_and_header(self):
        with tempfile.TemporaryDirectory() as tmp:
            first, second = os.path.join(tmp, "a.csv"), os.path.join(tmp, "b.csv")
            code, out = self.bench(first)
            self.assertEqual(code, EXIT_OK)
            self.assertIn("success_rate", out)
            self.bench(second)
            with open(first) as f:
                text = f.read()
            with open(second) as f:
                self.assertEqual(text, f.read())

            self.assertEqual(text.splitlines()[0], ",".join(BENCH_COLUMNS))
            df = pd.read_csv(first)
            self.assertEqual(len(df), 2)
            self.assertEqual(list(df["variant"]), ["a-nd", "a-d"])
            self.assertTrue((df["runtime_ms"] == 0).all())
            self.assertEqual(df["map"].iloc[0], "empty-8-8.map")

    def test_bad_lists(self):
        code, _ = run(["bench", "--map", MAP, "--scen", SCEN, "--streams-list", "x", "--cycle-list", "2"])
        self.assertEqual(code, EXIT_ERROR)
        code, _ = run(["bench", "--map", MAP, "--scen", SCEN, "--streams-list", "2", "--cycle-list", "2",
                       "--variants", "nope"])
        self.assertEqual(code, EXIT_ERROR)
        code, _ = run(["bench", "--map", MAP, "--scen", SCEN, "--streams-list", "99", "--cycle-list", "2"])
        self.assertEqual(code, EXIT_ERROR)


class TestCompareCommand(unittest.TestCase):

    def test_straight_lines(self):
        with tempfile.TemporaryDirectory() as tmp:
            inst = write_json(tmp, "lines.json", instance_doc([((0, 0), (0, 3), 0), ((5, 0), (5, 3), 0)], 2))
            csv_path = os.path.join(tmp, "compare.csv")
            code, out = run(["compare-cbs", "--instance", inst, "--horizons", "0,4", "--csv", csv_path])
            self.assertEqual(code, EXIT_OK)
            df = pd.read_csv(csv_path)
        self.assertEqual(list(df["horizon"]), [0, 4])
        self.assertEqual(list(df["n_agents"]), [2, 6])
        self.assertTrue((df["relative_error"] == 0).all())


if __name__ == "__main__":
    unittest.main()
