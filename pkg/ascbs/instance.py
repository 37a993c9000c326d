"""
Instance model for streaming multi-agent pathfinding.
Agent streams, instances, stream paths and solutions, plus the benchmark scenario parser and
the JSON instance/solution documents.
"""

import os
import json
import random
from enum import Enum
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ValidationError, model_validator

from ascbs.grid import GridMap, Vertex, load_map


# Action letters and their (row, col) deltas; U = row-1, D = row+1, L = col-1, R = col+1
ACTIONS = {
    "U": (-1, 0),
    "D": (1, 0),
    "L": (0, -1),
    "R": (0, 1),
    "W": (0, 0),
}
_DELTA_TO_ACTION = {delta: action for action, delta in ACTIONS.items()}


class CycleMode(Enum):
    """Whether all streams share one cycle time or each has its own"""
    UNIFORM = "uniform"
    NONUNIFORM = "nonuniform"


class ScenarioError(ValueError):
    """Raised when a scenario file cannot be turned into an instance"""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class PathError(ValueError):
    """Raised when an action string drives a stream off the map or into an obstacle"""

    def __init__(self, step: int, message: str):
        self.step = step
        super().__init__(f"step {step}: {message}")


class InstanceDocumentError(ValueError):
    """Raised when an instance or solution JSON document is malformed"""
    pass


@dataclass(frozen=True)
class AgentStream:
    """A periodic family of agents sharing start, goal and path"""
    id: int
    start: Vertex
    goal: Vertex
    t_start: int
    cycle: int

    def __post_init__(self):
        if self.cycle < 1:
            raise ValueError(f"Stream {self.id}: cycle must be positive, got {self.cycle}")
        if not 0 <= self.t_start < self.cycle:
            raise ValueError(
                f"Stream {self.id}: t_start must lie in [0, {self.cycle - 1}], got {self.t_start}"
            )

    def spawn_time(self, k: int) -> int:
        """Absolute time at which the k-th agent of this stream departs."""
        return k * self.cycle + self.t_start


@dataclass(frozen=True)
class Instance:
    """An S-MAPF instance: a map, a cycle time and an ordered list of agent streams"""
    map: GridMap
    streams: Tuple[AgentStream, ...]
    cycle_time: Optional[int] = None
    mode: CycleMode = CycleMode.UNIFORM
    map_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "streams", tuple(self.streams))
        for index, stream in enumerate(self.streams):
            if stream.id != index:
                raise ValueError(f"Stream ids must be 0..n-1 in order, found id {stream.id} at {index}")
            for label, v in (("start", stream.start), ("goal", stream.goal)):
                if not self.map.is_passable(v.row, v.col):
                    raise ValueError(f"Stream {stream.id}: {label} {v} is not a passable cell")
        if self.mode == CycleMode.UNIFORM:
            if self.cycle_time is None or self.cycle_time < 1:
                raise ValueError("Uniform instances need a positive cycle_time")
            for stream in self.streams:
                if stream.cycle != self.cycle_time:
                    raise ValueError(
                        f"Stream {stream.id}: cycle {stream.cycle} differs from cycle_time {self.cycle_time}"
                    )
        elif self.cycle_time is not None:
            raise ValueError("Non-uniform instances carry per-stream cycles, not a cycle_time")

    @property
    def n(self) -> int:
        return len(self.streams)

    @property
    def is_uniform(self) -> bool:
        return self.mode == CycleMode.UNIFORM

    def cycle_of(self, stream: int) -> int:
        return self.streams[stream].cycle

    @property
    def max_cycle(self) -> int:
        return max((s.cycle for s in self.streams), default=1)


@dataclass(frozen=True)
class StreamPath:
    """One period's route of a stream: p^0 .. p^(l-1)"""
    vertices: Tuple[Vertex, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if not self.vertices:
            raise ValueError("A stream path needs at least one vertex")

    def __len__(self) -> int:
        return len(self.vertices)

    def __getitem__(self, q: int) -> Vertex:
        return self.vertices[q]

    @property
    def cost(self) -> int:
        return len(self.vertices) - 1

    @property
    def start(self) -> Vertex:
        return self.vertices[0]

    @property
    def end(self) -> Vertex:
        return self.vertices[-1]


@dataclass(frozen=True)
class Solution:
    """One path per stream, in stream order"""
    paths: Tuple[StreamPath, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))

    @property
    def soc(self) -> int:
        return soc(self)

    def replace_path(self, stream: int, path: StreamPath) -> "Solution":
        paths = list(self.paths)
        paths[stream] = path
        return Solution(tuple(paths))


def soc(s: Solution) -> int:
    """Sum of costs: the total number of moves and waits over all stream paths."""
    return sum(p.cost for p in s.paths)


def actions_of(p: StreamPath) -> str:
    """Encode a path as an action string over U, D, L, R, W."""
    letters = []
    for a, b in zip(p.vertices, p.vertices[1:]):
        delta = (b.row - a.row, b.col - a.col)
        if delta not in _DELTA_TO_ACTION:
            raise ValueError(f"Vertices {a} and {b} are not adjacent")
        letters.append(_DELTA_TO_ACTION[delta])
    return "".join(letters)


def path_of(start: Vertex, actions: str, m: GridMap) -> StreamPath:
    """
    Decode an action string into the vertex sequence it drives from `start`.

    Raises:
        PathError: with the index of the first action that leaves the map, hits an obstacle,
            or is not one of U, D, L, R, W
    """
    if not m.is_passable(start.row, start.col):
        raise PathError(0, f"start {start} is not a passable cell")
    vertices = [Vertex(start.row, start.col)]
    for step, action in enumerate(actions):
        if action not in ACTIONS:
            raise PathError(step, f"unknown action '{action}'")
        d_row, d_col = ACTIONS[action]
        here = vertices[-1]
        row, col = here.row + d_row, here.col + d_col
        if not m.in_bounds(row, col):
            raise PathError(step, f"action '{action}' from {here} leaves the map")
        if not m.passable[row, col]:
            raise PathError(step, f"action '{action}' from {here} enters an obstacle")
        vertices.append(Vertex(row, col))
    return StreamPath(tuple(vertices))


def path_errors(inst: Instance, stream: int, p: StreamPath) -> List[str]:
    """Structural problems of a stream path (wrong endpoints, non-adjacent moves, obstacles)."""
    s = inst.streams[stream]
    problems = []
    if p.start != s.start:
        problems.append(f"stream {stream}: path starts at {p.start}, expected {s.start}")
    if p.end != s.goal:
        problems.append(f"stream {stream}: path ends at {p.end}, expected {s.goal}")
    for q, v in enumerate(p.vertices):
        if not inst.map.is_passable(v.row, v.col):
            problems.append(f"stream {stream}: step {q} at {v} is not passable")
    for q, (a, b) in enumerate(zip(p.vertices, p.vertices[1:])):
        if abs(a.row - b.row) + abs(a.col - b.col) > 1:
            problems.append(f"stream {stream}: step {q} jumps from {a} to {b}")
    return problems


def parse_scen(text: str, m: GridMap, n: int, c: int, seed: int) -> Instance:
    """
    Build a uniform instance from the first `n` rows of a benchmark scenario file.

    Row fields are tab separated: bucket, map, width, height, start col, start row,
    goal col, goal row, optimal distance. Each stream's t_start is drawn from [0, c-1]
    by a generator seeded with `seed`, in file order.

    Example row "0\\tempty-8-8.map\\t8\\t8\\t1\\t2\\t5\\t6\\t8" gives start (2,1) and goal (6,5).
    """
    if c < 1:
        raise ValueError(f"Cycle time must be positive, got {c}")
    if n < 0:
        raise ValueError(f"Stream count must be non-negative, got {n}")
    lines = text.split("\n")
    version = lines[0].strip().split() if lines else []
    if len(version) != 2 or version[0] != "version" or version[1] not in ("1", "1.0"):
        raise ScenarioError(1, f"expected 'version 1', got '{lines[0].strip() if lines else ''}'")

    rows: List[Tuple[int, List[str]]] = []
    for index, line in enumerate(lines[1:], start=2):
        if line.strip():
            rows.append((index, line.rstrip("\r").split("\t")))
    if n > len(rows):
        raise ScenarioError(len(lines), f"requested {n} streams but the scenario has {len(rows)} rows")

    rng = random.Random(seed)
    streams = []
    for stream_id, (line_no, fields) in enumerate(rows[:n]):
        if len(fields) < 8:
            raise ScenarioError(line_no, f"expected at least 8 tab-separated fields, got {len(fields)}")
        try:
            start_col, start_row, goal_col, goal_row = (int(x) for x in fields[4:8])
        except ValueError:
            raise ScenarioError(line_no, "start and goal coordinates must be integers")
        for label, row, col in (("start", start_row, start_col), ("goal", goal_row, goal_col)):
            if not m.in_bounds(row, col):
                raise ScenarioError(line_no, f"{label} ({row},{col}) is outside the map")
            if not m.passable[row, col]:
                raise ScenarioError(line_no, f"{label} ({row},{col}) is not passable")
        streams.append(AgentStream(
            id=stream_id,
            start=Vertex(start_row, start_col),
            goal=Vertex(goal_row, goal_col),
            t_start=rng.randrange(c),
            cycle=c,
        ))
    map_name = rows[0][1][1] if rows and len(rows[0][1]) > 1 else m.name
    return Instance(map=m, streams=tuple(streams), cycle_time=c, mode=CycleMode.UNIFORM, map_name=map_name)


def load_scen(path: str, m: GridMap, n: int, c: int, seed: int) -> Instance:
    with open(path) as f:
        return parse_scen(f.read(), m, n, c, seed)


# JSON documents

class StreamDocument(BaseModel):
    id: int
    start: Tuple[int, int]
    goal: Tuple[int, int]
    t_start: int
    cycle: Optional[int] = None


class InstanceDocument(BaseModel):
    map: str
    mode: Literal["uniform", "nonuniform"] = "uniform"
    cycle_time: Optional[int] = None
    streams: List[StreamDocument]

    @model_validator(mode="after")
    def check_cycles(self) -> "InstanceDocument":
        if self.mode == "uniform" and self.cycle_time is None:
            raise ValueError("uniform instances need 'cycle_time'")
        if self.mode == "nonuniform":
            missing = [s.id for s in self.streams if s.cycle is None]
            if missing:
                raise ValueError(f"nonuniform streams need 'cycle': missing for ids {missing}")
        return self


class SolutionStreamDocument(BaseModel):
    id: int
    t_start: int
    start: Tuple[int, int]
    actions: str


class SolutionDocument(BaseModel):
    cycle_time: Optional[int] = None
    soc: int
    streams: List[SolutionStreamDocument]


def _read_json(path: str) -> str:
    with open(path) as f:
        return f.read()


def instance_from_document(doc: InstanceDocument, m: GridMap) -> Instance:
    mode = CycleMode(doc.mode)
    streams = []
    try:
        for s in doc.streams:
            cycle = doc.cycle_time if mode == CycleMode.UNIFORM else s.cycle
            streams.append(AgentStream(
                id=s.id,
                start=Vertex(*s.start),
                goal=Vertex(*s.goal),
                t_start=s.t_start,
                cycle=cycle,
            ))
        cycle_time = doc.cycle_time if mode == CycleMode.UNIFORM else None
        return Instance(map=m, streams=tuple(streams), cycle_time=cycle_time, mode=mode, map_name=m.name)
    except ValueError as e:
        raise InstanceDocumentError(str(e))


def load_instance(path: str) -> Instance:
    """Load an instance JSON document; its map path is resolved relative to the document."""
    try:
        doc = InstanceDocument.model_validate_json(_read_json(path))
    except ValidationError as e:
        raise InstanceDocumentError(f"{path}: {e}")
    map_path = doc.map
    if not os.path.isabs(map_path):
        map_path = os.path.join(os.path.dirname(os.path.abspath(path)), map_path)
    return instance_from_document(doc, load_map(map_path))


def instance_document(inst: Instance, map_path: str) -> InstanceDocument:
    return InstanceDocument(
        map=map_path,
        mode=inst.mode.value,
        cycle_time=inst.cycle_time,
        streams=[
            StreamDocument(
                id=s.id,
                start=(s.start.row, s.start.col),
                goal=(s.goal.row, s.goal.col),
                t_start=s.t_start,
                cycle=None if inst.is_uniform else s.cycle,
            )
            for s in inst.streams
        ],
    )


def save_instance(path: str, inst: Instance, map_path: str) -> None:
    doc = instance_document(inst, map_path)
    with open(path, "w") as f:
        f.write(doc.model_dump_json(indent=2, exclude_none=True))
        f.write("\n")


def solution_from_document(doc: SolutionDocument, inst: Instance) -> Solution:
    """Decode a solution document against an instance; action errors raise PathError."""
    if len(doc.streams) != inst.n:
        raise InstanceDocumentError(f"solution has {len(doc.streams)} streams, instance has {inst.n}")
    by_id = {s.id: s for s in doc.streams}
    if sorted(by_id) != list(range(inst.n)):
        raise InstanceDocumentError(f"solution stream ids {sorted(by_id)} do not match 0..{inst.n - 1}")
    if doc.cycle_time is not None and doc.cycle_time != inst.cycle_time:
        raise InstanceDocumentError(f"solution cycle_time {doc.cycle_time} does not match instance {inst.cycle_time}")
    paths = []
    for stream in inst.streams:
        entry = by_id[stream.id]
        if entry.t_start != stream.t_start:
            raise InstanceDocumentError(
                f"stream {stream.id}: solution t_start {entry.t_start} does not match instance {stream.t_start}"
            )
        try:
            paths.append(path_of(Vertex(*entry.start), entry.actions, inst.map))
        except PathError as e:
            raise PathError(e.step, f"stream {stream.id}: {e}")
    return Solution(tuple(paths))


def load_solution(path: str, inst: Instance) -> Solution:
    try:
        doc = SolutionDocument.model_validate_json(_read_json(path))
    except ValidationError as e:
        raise InstanceDocumentError(f"{path}: {e}")
    return solution_from_document(doc, inst)


def solution_document(inst: Instance, sol: Solution) -> SolutionDocument:
    return SolutionDocument(
        cycle_time=inst.cycle_time,
        soc=sol.soc,
        streams=[
            SolutionStreamDocument(
                id=s.id,
                t_start=s.t_start,
                start=(s.start.row, s.start.col),
                actions=actions_of(p),
            )
            for s, p in zip(inst.streams, sol.paths)
        ],
    )


def save_solution(path: str, inst: Instance, sol: Solution) -> None:
    """Write a solution JSON document"""
    doc = solution_document(inst, sol)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc.model_dump(), f, indent=2)
        f.write("\n")


def make_instance(m: GridMap, tasks: Sequence[Tuple[Vertex, Vertex, int]], cycle_time: int) -> Instance:
    """Build a uniform instance from (start, goal, t_start) triples."""
    streams = tuple(
        AgentStream(id=i, start=start, goal=goal, t_start=t_start, cycle=cycle_time)
        for i, (start, goal, t_start) in enumerate(tasks)
    )
    return Instance(map=m, streams=streams, cycle_time=cycle_time, mode=CycleMode.UNIFORM, map_name=m.name)
