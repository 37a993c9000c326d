"""
Unit tests for the instance model, scenario parsing and the JSON documents.
"""

import os
import json
import tempfile
import unittest

from ascbs.grid import Vertex, load_map
from ascbs.instance import (
    AgentStream, CycleMode, Instance, InstanceDocumentError, PathError, ScenarioError, Solution,
    StreamPath, actions_of, load_instance, load_scen, load_solution, parse_scen, path_errors, path_of,
    save_instance, save_solution, soc,
)
from tests.fixtures import data_path, map_from_rows, nonuniform_instance, open_map, uniform_instance


SCEN = data_path("empty-8-8-random-1.scen")


def scen_text(*rows):
    return "version 1\n" + "".join("\t".join(str(x) for x in row) + "\n" for row in rows)


class TestScenario(unittest.TestCase):
    """Tests for parse_scen and load_scen"""

    def setUp(self):
        self.map = load_map(data_path("empty-8-8.map"))

    def test_first_rows(self):
        """Test that the first n rows become streams in order"""
        inst = load_scen(SCEN, self.map, 3, 3, 7)
        self.assertEqual(inst.n, 3)
        self.assertEqual(inst.cycle_time, 3)
        self.assertEqual(inst.mode, CycleMode.UNIFORM)
        self.assertEqual(inst.map_name, "empty-8-8.map")
        self.assertEqual(inst.streams[0].start, Vertex(0, 0))
        self.assertEqual(inst.streams[0].goal, Vertex(7, 7))
        for s in inst.streams:
            self.assertEqual(s.cycle, 3)
            self.assertTrue(0 <= s.t_start < 3)

    def test_column_row_order(self):
        """Test that scenario columns are read as (col, row)"""
        inst = load_scen(SCEN, self.map, 4, 1, 0)
        self.assertEqual(inst.streams[3].start, Vertex(5, 1))
        self.assertEqual(inst.streams[3].goal, Vertex(2, 6))

    def test_unit_cycle_starts_at_zero(self):
        """Test that a cycle time of 1 forces every t_start to 0"""
        inst = load_scen(SCEN, self.map, 12, 1, 99)
        self.assertEqual([s.t_start for s in inst.streams], [0] * 12)

    def test_seed_determinism(self):
        """Test that equal seeds give equal start times"""
        a = load_scen(SCEN, self.map, 12, 5, 3)
        b = load_scen(SCEN, self.map, 12, 5, 3)
        self.assertEqual([s.t_start for s in a.streams], [s.t_start for s in b.streams])

    def test_version_line(self):
        """Test that the version header is required"""
        with self.assertRaises(ScenarioError) as ctx:
            parse_scen("version 2\n", self.map, 0, 1, 0)
        self.assertEqual(ctx.exception.line, 1)
        self.assertEqual(parse_scen("version 1.0\n", self.map, 0, 1, 0).n, 0)

    def test_too_many_streams(self):
        """Test that asking for more rows than the file has fails"""
        with self.assertRaises(ScenarioError):
            load_scen(SCEN, self.map, 13, 2, 0)

    def test_out_of_bounds(self):
        """Test that coordinates outside the map are reported at their line"""
        text = scen_text((0, "m.map", 8, 8, 0, 0, 1, 1, 2), (0, "m.map", 8, 8, 9, 0, 1, 1, 2))
        with self.assertRaises(ScenarioError) as ctx:
            parse_scen(text, self.map, 2, 1, 0)
        self.assertEqual(ctx.exception.line, 3)

    def test_impassable_endpoint(self):
        """Test that an endpoint on an obstacle is rejected"""
        m = map_from_rows([".@", ".."])
        text = scen_text((0, "m.map", 2, 2, 0, 0, 1, 0, 1))
        with self.assertRaises(ScenarioError):
            parse_scen(text, m, 1, 1, 0)

    def test_bad_cycle(self):
        with self.assertRaises(ValueError):
            load_scen(SCEN, self.map, 1, 0, 0)


class TestModel(unittest.TestCase):
    """Tests for streams, instances, paths and solutions"""

    def test_stream_validation(self):
        """Test cycle and start time checks on AgentStream"""
        with self.assertRaises(ValueError):
            AgentStream(id=0, start=Vertex(0, 0), goal=Vertex(0, 0), t_start=0, cycle=0)
        with self.assertRaises(ValueError):
            AgentStream(id=0, start=Vertex(0, 0), goal=Vertex(0, 0), t_start=3, cycle=3)
        s = AgentStream(id=0, start=Vertex(0, 0), goal=Vertex(0, 0), t_start=1, cycle=3)
        self.assertEqual([s.spawn_time(k) for k in range(3)], [1, 4, 7])

    def test_instance_validation(self):
        """Test stream ids, passable endpoints and cycle consistency"""
        m = map_from_rows([".@"])
        with self.assertRaises(ValueError):
            uniform_instance(m, [((0, 0), (0, 1), 0)], 1)
        bad_ids = (AgentStream(id=1, start=Vertex(0, 0), goal=Vertex(0, 0), t_start=0, cycle=1),)
        with self.assertRaises(ValueError):
            Instance(map=m, streams=bad_ids, cycle_time=1)
        mixed = (AgentStream(id=0, start=Vertex(0, 0), goal=Vertex(0, 0), t_start=0, cycle=2),)
        with self.assertRaises(ValueError):
            Instance(map=m, streams=mixed, cycle_time=1)
        with self.assertRaises(ValueError):
            Instance(map=m, streams=mixed, cycle_time=2, mode=CycleMode.NONUNIFORM)

    def test_nonuniform(self):
        inst = nonuniform_instance(open_map(2, 2), [((0, 0), (1, 1), 0, 2), ((1, 0), (0, 1), 2, 3)])
        self.assertFalse(inst.is_uniform)
        self.assertEqual(inst.cycle_of(1), 3)
        self.assertEqual(inst.max_cycle, 3)

    def test_soc(self):
        """Test sum of costs over stream paths"""
        p = StreamPath((Vertex(0, 0), Vertex(0, 1), Vertex(0, 2)))
        q = StreamPath((Vertex(1, 1),))
        self.assertEqual(p.cost, 2)
        self.assertEqual(soc(Solution((p, q))), 2)
        self.assertEqual(soc(Solution(())), 0)
        with self.assertRaises(ValueError):
            StreamPath(())

    def test_replace_path(self):
        p = StreamPath((Vertex(0, 0),))
        q = StreamPath((Vertex(0, 0), Vertex(0, 1)))
        sol = Solution((p, p))
        replaced = sol.replace_path(1, q)
        self.assertEqual(replaced.paths, (p, q))
        self.assertEqual(sol.paths, (p, p))


class TestActions(unittest.TestCase):
    """Tests for action strings"""

    def setUp(self):
        self.map = open_map(3, 3)

    def test_encode(self):
        p = StreamPath((Vertex(0, 0), Vertex(0, 1), Vertex(0, 1)))
        self.assertEqual(actions_of(p), "RW")

    def test_decode(self):
        """Test that 'RRU' from (1,0) ends at (0,2)"""
        p = path_of(Vertex(1, 0), "RRU", self.map)
        self.assertEqual(p.vertices, (Vertex(1, 0), Vertex(1, 1), Vertex(1, 2), Vertex(0, 2)))

    def test_off_map(self):
        """Test that leaving the map raises PathError at the offending step"""
        with self.assertRaises(PathError) as ctx:
            path_of(Vertex(0, 0), "U", self.map)
        self.assertEqual(ctx.exception.step, 0)
        with self.assertRaises(PathError) as ctx:
            path_of(Vertex(0, 0), "RRR", self.map)
        self.assertEqual(ctx.exception.step, 2)

    def test_obstacle_and_unknown_action(self):
        m = map_from_rows([".@"])
        with self.assertRaises(PathError):
            path_of(Vertex(0, 0), "R", m)
        with self.assertRaises(PathError):
            path_of(Vertex(0, 0), "X", m)

    def test_round_trip(self):
        actions = "DDRWURL"
        self.assertEqual(actions_of(path_of(Vertex(0, 0), actions, self.map)), actions)

    def test_path_errors(self):
        """Test structural checks against the stream's endpoints"""
        inst = uniform_instance(self.map, [((0, 0), (0, 2), 0)], 1)
        good = path_of(Vertex(0, 0), "RR", self.map)
        self.assertEqual(path_errors(inst, 0, good), [])
        short = path_of(Vertex(0, 0), "R", self.map)
        self.assertEqual(len(path_errors(inst, 0, short)), 1)
        jump = StreamPath((Vertex(0, 0), Vertex(0, 2)))
        self.assertEqual(len(path_errors(inst, 0, jump)), 1)


class TestDocuments(unittest.TestCase):
    """Tests for the instance and solution JSON documents"""

    def test_load_bundled(self):
        """Test loading the bundled three-stream instance and its solution"""
        inst = load_instance(data_path("three_streams_instance.json"))
        self.assertEqual(inst.n, 3)
        self.assertEqual(inst.cycle_time, 2)
        self.assertEqual(inst.streams[2].t_start, 1)
        sol = load_solution(data_path("three_streams_solution.json"), inst)
        self.assertEqual(sol.soc, 21)
        self.assertEqual(sol.paths[1].end, Vertex(2, 3))

    def test_round_trip(self):
        """Test save then load of instance and solution"""
        m = open_map(3, 3)
        inst = uniform_instance(m, [((0, 0), (2, 2), 0), ((2, 0), (0, 2), 1)], 2)
        sol = Solution((path_of(Vertex(0, 0), "DDRR", m), path_of(Vertex(2, 0), "UURR", m)))
        with tempfile.TemporaryDirectory() as tmp:
            map_path = os.path.join(tmp, "grid.map")
            with open(map_path, "w") as f:
                f.write(m.to_text())
            inst_path = os.path.join(tmp, "instance.json")
            save_instance(inst_path, inst, "grid.map")
            loaded = load_instance(inst_path)
            self.assertEqual(loaded.streams, inst.streams)
            self.assertEqual(loaded.cycle_time, 2)

            sol_path = os.path.join(tmp, "solution.json")
            save_solution(sol_path, inst, sol)
            with open(sol_path) as f:
                self.assertEqual(json.load(f)["soc"], 8)
            self.assertEqual(load_solution(sol_path, loaded).paths, sol.paths)

    def test_nonuniform_round_trip(self):
        m = open_map(2, 2)
        inst = nonuniform_instance(m, [((0, 0), (1, 1), 1, 2), ((1, 0), (0, 1), 0, 3)])
        with tempfile.TemporaryDirectory() as tmp:
            with open(os.path.join(tmp, "g.map"), "w") as f:
                f.write(m.to_text())
            path = os.path.join(tmp, "i.json")
            save_instance(path, inst, "g.map")
            loaded = load_instance(path)
            self.assertFalse(loaded.is_uniform)
            self.assertEqual([s.cycle for s in loaded.streams], [2, 3])

    def test_bad_documents(self):
        """Test that malformed documents raise InstanceDocumentError"""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.json")
            with open(path, "w") as f:
                json.dump({"map": "x.map", "mode": "uniform", "streams": []}, f)
            with self.assertRaises(InstanceDocumentError):
                load_instance(path)
            with open(path, "w") as f:
                json.dump({"map": "x.map", "mode": "nonuniform",
                           "streams": [{"id": 0, "start": [0, 0], "goal": [0, 0], "t_start": 0}]}, f)
            with self.assertRaises(InstanceDocumentError):
                load_instance(path)

    def test_solution_timing_must_match(self):
        """Test that a solution written for other start times or another cycle is rejected"""
        inst = load_instance(data_path("three_streams_instance.json"))
        with open(data_path("three_streams_solution.json")) as f:
            good = json.load(f)
        shifted = json.loads(json.dumps(good))
        shifted["streams"][2]["t_start"] = 0
        recycled = json.loads(json.dumps(good))
        recycled["cycle_time"] = 3
        with tempfile.TemporaryDirectory() as tmp:
            for name, doc in (("shifted.json", shifted), ("recycled.json", recycled)):
                path = os.path.join(tmp, name)
                with open(path, "w") as f:
                    json.dump(doc, f)
                with self.assertRaises(InstanceDocumentError):
                    load_solution(path, inst)


if __name__ == "__main__":
    unittest.main()
