"""
Brute-force stream simulator.
Spawns concrete agents from every stream up to a horizon, moves them step by step and reports
every vertex and edge collision. Used to validate solutions independently of the congruence
test in ascbs.conflicts.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ascbs.grid import Vertex
from ascbs.instance import Instance, Solution, path_errors


# Non-uniform horizons use the lcm of the cycles, capped here
LCM_CAP = 10000


@dataclass(frozen=True)
class SimAgent:
    """The k-th agent of a stream, active from spawn_time until it reaches the goal"""
    stream: int
    k: int
    spawn_time: int
    length: int

    def step_at(self, t: int) -> Optional[int]:
        """Path step the agent is on at time t, or None when it is not on the map."""
        q = t - self.spawn_time
        if 0 <= q < self.length:
            return q
        return None

    @property
    def label(self) -> Tuple[int, int]:
        return (self.stream, self.k)


@dataclass(frozen=True)
class CollisionEvent:
    """Two agents on one vertex at time t, or swapping an edge between t and t+1"""
    t: int
    kind: str
    a: Tuple[int, int]
    b: Tuple[int, int]
    location: str

    def sort_key(self):
        return (self.t, 0 if self.kind == "v" else 1, self.a, self.b)

    def __str__(self) -> str:
        return f"t={self.t} kind={self.kind} a=({self.a[0]},{self.a[1]}) b=({self.b[0]},{self.b[1]}) at={self.location}"


@dataclass
class CollisionReport:
    events: List[CollisionEvent] = field(default_factory=list)
    structural_errors: List[str] = field(default_factory=list)
    horizon: int = 0
    horizon_capped: bool = False

    @property
    def ok(self) -> bool:
        return not self.events and not self.structural_errors


def spawn_agents(inst: Instance, sol: Solution, horizon: int) -> List[SimAgent]:
    """All agents spawned at or before `horizon`, ordered by (stream, k)."""
    agents = []
    for stream, path in zip(inst.streams, sol.paths):
        k = 0
        while stream.spawn_time(k) <= horizon:
            agents.append(SimAgent(stream.id, k, stream.spawn_time(k), len(path)))
            k += 1
    return agents


def simulate(inst: Instance, sol: Solution, horizon: int) -> CollisionReport:
    """
    Run every agent spawned up to `horizon` and collect collisions at times 0..horizon.

    Returns:
        A report whose events are ordered by (t, vertex before edge, first agent, second agent)
    """
    if horizon < 0:
        raise ValueError(f"Horizon must be non-negative, got {horizon}")
    agents = spawn_agents(inst, sol, horizon)
    paths = sol.paths
    events = []

    for t in range(horizon + 1):
        at_vertex: Dict[Vertex, List[SimAgent]] = {}
        moving: Dict[Tuple[Vertex, Vertex], List[SimAgent]] = {}
        for agent in agents:
            q = agent.step_at(t)
            if q is None:
                continue
            path = paths[agent.stream]
            at_vertex.setdefault(path[q], []).append(agent)
            if t < horizon and q + 1 < agent.length and path[q] != path[q + 1]:
                moving.setdefault((path[q], path[q + 1]), []).append(agent)

        for v, here in at_vertex.items():
            for x in range(len(here)):
                for y in range(x + 1, len(here)):
                    events.append(CollisionEvent(t, "v", here[x].label, here[y].label, str(v)))

        for (a, b), forward in moving.items():
            for backward in moving.get((b, a), ()):
                for agent in forward:
                    if agent.label < backward.label:
                        events.append(CollisionEvent(t, "e", agent.label, backward.label, f"{a}->{b}"))

    events.sort(key=CollisionEvent.sort_key)
    return CollisionReport(events=events, horizon=horizon)


def default_horizon(inst: Instance, sol: Solution) -> Tuple[int, bool]:
    """max t_start + 4 * (longest path + period); the period is the lcm of cycles, capped."""
    longest = max((len(p) for p in sol.paths), default=0)
    latest = max((s.t_start for s in inst.streams), default=0)
    capped = False
    if inst.is_uniform:
        period = inst.cycle_time
    else:
        period = 1
        for s in inst.streams:
            period = math.lcm(period, s.cycle)
        if period > LCM_CAP:
            period, capped = LCM_CAP, True
    return latest + 4 * (longest + period), capped


def validate(inst: Instance, sol: Solution, horizon: Optional[int] = None) -> Tuple[bool, CollisionReport]:
    """
    Check a solution's structure, then simulate it.

    Returns:
        (True, report) when every path is well formed and no collision occurs
    """
    errors = []
    if len(sol.paths) != inst.n:
        errors.append(f"solution has {len(sol.paths)} paths for {inst.n} streams")
    else:
        for stream in range(inst.n):
            errors.extend(path_errors(inst, stream, sol.paths[stream]))
    if errors:
        return False, CollisionReport(structural_errors=errors)

    capped = False
    if horizon is None:
        horizon, capped = default_horizon(inst, sol)
    report = simulate(inst, sol, horizon)
    report.horizon_capped = capped
    return report.ok, report
