"""
Unrolled CBS baseline.
Streams are unrolled into concrete timed agents up to a time horizon and solved with vanilla
conflict-based search, where each agent appears at its start time and disappears at its goal.
"""

import time
import heapq
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from ascbs.grid import GridMap, Vertex
from ascbs.instance import Instance, StreamPath
from ascbs.constraints import ConstraintSet, EdgeConstraint, VertexConstraint
from ascbs.search.low_level import SearchStats, SearchTimeout, SingleAgentProblem, astar_search
from ascbs.search.high_level import Outcome, SolveReport
from ascbs.utils.logging import get_logger


@dataclass(frozen=True)
class UnrolledAgent:
    """The k-th agent of a stream as an independent timed agent"""
    stream: int
    k: int
    start: Vertex
    goal: Vertex
    start_time: int


@dataclass(frozen=True)
class TimedConflict:
    t: int
    kind: str
    a: int
    b: int
    v: Vertex
    v_to: Optional[Vertex] = None


@dataclass
class CBSResult:
    outcome: Outcome
    paths: List[StreamPath] = field(default_factory=list)
    soc: Optional[int] = None
    runtime: float = 0.0
    ct_expanded: int = 0


@dataclass
class ComparisonRecord:
    """Unrolled CBS against an ASCBS solution at one horizon"""
    horizon: int
    n_agents: int
    cbs_outcome: str
    cbs_soc: Optional[int]
    ascbs_unrolled_soc: int
    relative_error: Optional[float]
    cbs_runtime: float
    ascbs_runtime: float

    def as_row(self) -> Dict[str, Any]:
        return {
            "horizon": self.horizon,
            "n_agents": self.n_agents,
            "cbs_outcome": self.cbs_outcome,
            "cbs_soc": self.cbs_soc,
            "ascbs_unrolled_soc": self.ascbs_unrolled_soc,
            "relative_error": self.relative_error,
            "cbs_runtime_ms": round(self.cbs_runtime * 1000, 3),
            "ascbs_runtime_ms": round(self.ascbs_runtime * 1000, 3),
        }


def unroll(inst: Instance, horizon: int) -> List[UnrolledAgent]:
    """Agents of every stream whose start time is at most `horizon`, ordered by (stream, k)."""
    if not inst.is_uniform:
        raise ValueError("Unrolling needs a uniform cycle time")
    agents = []
    for s in inst.streams:
        k = 0
        while s.spawn_time(k) <= horizon:
            agents.append(UnrolledAgent(s.id, k, s.start, s.goal, s.spawn_time(k)))
            k += 1
    return agents


def timed_conflicts(agents: List[UnrolledAgent], paths: List[StreamPath]) -> List[TimedConflict]:
    """Vertex and swap conflicts among timed agents, ordered by (t, vertex first, a, b)."""
    occupancy: Dict[Tuple[int, Vertex], List[int]] = {}
    moves: Dict[Tuple[int, Vertex, Vertex], List[int]] = {}
    for index, (agent, path) in enumerate(zip(agents, paths)):
        for q, v in enumerate(path.vertices):
            occupancy.setdefault((agent.start_time + q, v), []).append(index)
        for q in range(len(path) - 1):
            a, b = path[q], path[q + 1]
            if a != b:
                moves.setdefault((agent.start_time + q, a, b), []).append(index)

    found = []
    for (t, v), here in occupancy.items():
        for x in range(len(here)):
            for y in range(x + 1, len(here)):
                found.append(TimedConflict(t, "v", here[x], here[y], v))
    for (t, a, b), forward in moves.items():
        for other in moves.get((t, b, a), ()):
            for index in forward:
                if index < other:
                    found.append(TimedConflict(t, "e", index, other, a, b))
    found.sort(key=lambda c: (c.t, 0 if c.kind == "v" else 1, c.a, c.b))
    return found


@dataclass
class _Node:
    cons: ConstraintSet
    paths: List[StreamPath]
    cost: int
    conflicts: List[TimedConflict]


def cbs_solve(agents: List[UnrolledAgent], m: GridMap, timeout: float) -> CBSResult:
    """
    Vanilla CBS over timed agents; constraints are kept in each agent's relative steps.

    Returns:
        A CBSResult with the minimum sum of costs, or a timeout/unsolvable outcome
    """
    logger = get_logger()
    started = time.perf_counter()
    deadline = started + timeout
    stats = SearchStats()
    expanded = 0

    def plan(index: int, cons: ConstraintSet) -> Optional[StreamPath]:
        agent = agents[index]
        problem = SingleAgentProblem(grid=m, start=agent.start, goal=agent.goal, key=index,
                                     cs=cons, t_offset=agent.start_time, cycle=1)
        return astar_search(problem, None, deadline, stats)

    def finish(outcome: Outcome, node: Optional[_Node] = None) -> CBSResult:
        result = CBSResult(
            outcome=outcome,
            paths=list(node.paths) if node is not None else [],
            soc=node.cost if node is not None else None,
            runtime=time.perf_counter() - started,
            ct_expanded=expanded,
        )
        logger.info(f"CBS over {len(agents)} agents: {outcome.value}, soc={result.soc}, expanded={expanded}")
        return result

    try:
        root_paths = []
        for index in range(len(agents)):
            path = plan(index, ConstraintSet())
            if path is None:
                return finish(Outcome.UNSOLVABLE)
            root_paths.append(path)
        root = _Node(ConstraintSet(), root_paths, sum(p.cost for p in root_paths),
                     timed_conflicts(agents, root_paths))
        seq = 0
        open_list = [(root.cost, len(root.conflicts), seq, root)]

        while open_list:
            if time.perf_counter() > deadline:
                return finish(Outcome.TIMEOUT)
            _, _, _, node = heapq.heappop(open_list)
            if not node.conflicts:
                return finish(Outcome.SOLVED, node)
            expanded += 1

            conf = node.conflicts[0]
            sides = [(conf.a, conf.v, conf.v_to), (conf.b, conf.v_to, conf.v)]
            for index, here, there in sides:
                q = conf.t - agents[index].start_time
                if conf.kind == "v":
                    con = VertexConstraint(index, conf.v, q)
                else:
                    con = EdgeConstraint(index, here, there, q)
                cons = node.cons.extend((con,))
                path = plan(index, cons)
                if path is None:
                    continue
                paths = list(node.paths)
                paths[index] = path
                child = _Node(cons, paths, sum(p.cost for p in paths), timed_conflicts(agents, paths))
                seq += 1
                heapq.heappush(open_list, (child.cost, len(child.conflicts), seq, child))

        return finish(Outcome.UNSOLVABLE)
    except SearchTimeout:
        return finish(Outcome.TIMEOUT)


def compare(inst: Instance, ascbs_report: SolveReport, horizon: int, timeout: float) -> ComparisonRecord:
    """
    Solve the unrolled instance with CBS and set it against the ASCBS solution.

    The ASCBS cost of the unrolled agents is the sum of their streams' path costs.
    relative_error = (ascbs_unrolled_soc - cbs_soc) / cbs_soc, and 0 when both are 0.
    """
    if not ascbs_report.solved:
        raise ValueError("compare needs a solved ASCBS report")
    agents = unroll(inst, horizon)
    cbs = cbs_solve(agents, inst.map, timeout)
    paths = ascbs_report.solution.paths
    ascbs_soc = sum(paths[agent.stream].cost for agent in agents)

    relative_error = None
    if cbs.outcome == Outcome.SOLVED:
        assert cbs.soc <= ascbs_soc, "CBS found a costlier optimum than a feasible ASCBS unrolling"
        relative_error = 0.0 if cbs.soc == 0 else (ascbs_soc - cbs.soc) / cbs.soc

    return ComparisonRecord(
        horizon=horizon,
        n_agents=len(agents),
        cbs_outcome=cbs.outcome.value,
        cbs_soc=cbs.soc,
        ascbs_unrolled_soc=ascbs_soc,
        relative_error=relative_error,
        cbs_runtime=cbs.runtime,
        ascbs_runtime=ascbs_report.elapsed,
    )
