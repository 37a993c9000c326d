"""
Single-stream planners for the constraint tree.

Both planners search space-time from (start, 0). Steps are moves U, D, L, R or a wait W.
A* folds states past the constraint set's finite horizon by the period of the blocked
predicate, which keeps the state space finite. IDA* keeps the whole partial path so it can
prune steps that would collide with another agent of the same stream.
"""

import math
import time
import heapq
from collections import Counter, defaultdict, deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ascbs.grid import GridMap, Vertex, distance_field, UNREACHABLE
from ascbs.instance import Instance, Solution, StreamPath
from ascbs.constraints import ConstraintSet


# Deadline is polled once per this many expansions
_DEADLINE_POLL = 256

# Folded state spaces above this size are not tabulated for IDA*
_FOLDED_STATE_LIMIT = 200_000


class SearchTimeout(Exception):
    """Raised when a planner passes its wall-clock deadline"""
    pass


@dataclass
class SearchStats:
    """Counters shared by the planners of one solve"""
    expansions: int = 0


@dataclass(frozen=True)
class SingleAgentProblem:
    """
    One planning query.

    `key` is the stream id the constraint set is indexed by; `t_offset` and `cycle` place
    step q at absolute residue (t_offset + q) mod cycle for conflict-avoidance counting.
    """
    grid: GridMap
    start: Vertex
    goal: Vertex
    key: int
    cs: ConstraintSet
    t_offset: int = 0
    cycle: int = 1


class ConflictAvoidanceTable:
    """
    Occupancy of other streams' current paths, keyed by (vertex, cycle, residue) and
    (directed edge, cycle, residue) with residue = (t_start + q) mod cycle.
    """

    def __init__(self):
        self._vertex: Counter = Counter()
        self._edge: Counter = Counter()
        self._cycles = set()

    def __bool__(self) -> bool:
        return bool(self._vertex) or bool(self._edge)

    def add_path(self, path: StreamPath, t_start: int, cycle: int) -> None:
        self._cycles.add(cycle)
        vertices = path.vertices
        for q, v in enumerate(vertices):
            self._vertex[(v, cycle, (t_start + q) % cycle)] += 1
        for q in range(len(vertices) - 1):
            a, b = vertices[q], vertices[q + 1]
            if a != b:
                self._edge[(a, b, cycle, (t_start + q) % cycle)] += 1

    def vertex_count(self, v: Vertex, offset: int, cycle: int) -> int:
        """Entries that can meet an agent at v whose absolute step is offset (mod cycle)."""
        total = 0
        for other in self._cycles:
            g = math.gcd(cycle, other)
            for residue in range(offset % g, other, g):
                total += self._vertex.get((v, other, residue), 0)
        return total

    def edge_count(self, a: Vertex, b: Vertex, offset: int, cycle: int) -> int:
        """Entries traversing b -> a that can swap with an agent moving a -> b at offset."""
        total = 0
        for other in self._cycles:
            g = math.gcd(cycle, other)
            for residue in range(offset % g, other, g):
                total += self._edge.get((b, a, other, residue), 0)
        return total

    def step_conflicts(self, v: Vertex, nv: Vertex, t: int, t_offset: int, cycle: int) -> int:
        """Conflicts picked up by stepping v -> nv leaving step t."""
        if not self:
            return 0
        count = self.vertex_count(nv, t_offset + t + 1, cycle)
        if v != nv:
            count += self.edge_count(v, nv, t_offset + t, cycle)
        return count


def build_cat(inst: Instance, sol: Solution, exclude: int) -> ConflictAvoidanceTable:
    """A conflict avoidance table over every stream's path except `exclude`."""
    cat = ConflictAvoidanceTable()
    for stream, path in zip(inst.streams, sol.paths):
        if stream.id != exclude and path is not None:
            cat.add_path(path, stream.t_start, stream.cycle)
    return cat


def problem_for(inst: Instance, stream: int, cs: ConstraintSet) -> SingleAgentProblem:
    s = inst.streams[stream]
    return SingleAgentProblem(
        grid=inst.map, start=s.start, goal=s.goal, key=stream, cs=cs,
        t_offset=s.t_start, cycle=s.cycle,
    )


def _successors(grid: GridMap, v: Vertex) -> List[Vertex]:
    return grid.neighbors(v) + [v]


def _check_deadline(deadline: Optional[float]) -> None:
    if deadline is not None and time.perf_counter() > deadline:
        raise SearchTimeout()


def astar_search(problem: SingleAgentProblem,
                 cat: Optional[ConflictAvoidanceTable] = None,
                 deadline: Optional[float] = None,
                 stats: Optional[SearchStats] = None) -> Optional[StreamPath]:
    """
    Space-time A* with conflict-avoidance tie-breaking.

    Returns:
        A minimum-length path honoring every constraint and mandate, with the fewest
        conflict-avoidance hits among minimum-length paths; None if no path exists
    """
    grid, cs, key = problem.grid, problem.cs, problem.key
    h = distance_field(grid, problem.goal)
    if h[problem.start.row, problem.start.col] == UNREACHABLE:
        return None
    if cs.blocked_vertex(key, problem.start, 0):
        return None

    t_fin = cs.stream_horizon(key)
    period = cs.period(key, problem.cycle)
    last_mandate = cs.last_mandate_step(key)
    cat = cat if cat is not None else ConflictAvoidanceTable()

    def fold(t: int) -> int:
        if t <= t_fin:
            return t
        return t_fin + 1 + (t - t_fin - 1) % period

    # node: (vertex, t, parent index)
    nodes: List[Tuple[Vertex, int, int]] = [(problem.start, 0, -1)]
    open_list = [(int(h[problem.start.row, problem.start.col]), 0, 0)]
    closed = set()
    expanded = 0

    while open_list:
        _, conflicts, index = heapq.heappop(open_list)
        v, t, _ = nodes[index]
        state = (v, fold(t))
        if state in closed:
            continue
        closed.add(state)

        if v == problem.goal and t >= last_mandate:
            vertices = []
            while index >= 0:
                vertices.append(nodes[index][0])
                index = nodes[index][2]
            if stats is not None:
                stats.expansions += expanded
            return StreamPath(tuple(reversed(vertices)))

        expanded += 1
        if expanded % _DEADLINE_POLL == 0:
            _check_deadline(deadline)

        nt = t + 1
        for nv in _successors(grid, v):
            h_next = h[nv.row, nv.col]
            if h_next == UNREACHABLE or (nv, fold(nt)) in closed:
                continue
            if cs.blocked_vertex(key, nv, nt) or cs.blocked_edge(key, v, nv, t):
                continue
            extra = cat.step_conflicts(v, nv, t, problem.t_offset, problem.cycle)
            nodes.append((nv, nt, index))
            heapq.heappush(open_list, (nt + int(h_next), conflicts + extra, len(nodes) - 1))

    if stats is not None:
        stats.expansions += expanded
    return None


def folded_distances(problem: SingleAgentProblem) -> Optional[Dict[Tuple[Vertex, int], int]]:
    """
    Exact remaining steps from every folded state (v, fold(t)) to a goal state, honoring
    constraints and mandates but not self-conflicts.

    Returns:
        Map from folded state to distance, without the states that cannot reach the goal;
        None when the folded space holds more than _FOLDED_STATE_LIMIT states
    """
    grid, cs, key = problem.grid, problem.cs, problem.key
    t_fin = cs.stream_horizon(key)
    layers = t_fin + 1 + cs.period(key, problem.cycle)
    if grid.num_vertices * layers > _FOLDED_STATE_LIMIT:
        return None
    last_mandate = cs.last_mandate_step(key)

    moves = {v: _successors(grid, v) for v in grid.vertices()}
    preds: Dict[Tuple[Vertex, int], List[Tuple[Vertex, int]]] = defaultdict(list)
    for s in range(layers):
        ns = s + 1 if s + 1 < layers else t_fin + 1
        for v, successors in moves.items():
            if cs.blocked_vertex(key, v, s):
                continue
            for nv in successors:
                if cs.blocked_vertex(key, nv, s + 1) or cs.blocked_edge(key, v, nv, s):
                    continue
                preds[(nv, ns)].append((v, s))

    dist: Dict[Tuple[Vertex, int], int] = {}
    queue = deque()
    for s in range(max(last_mandate, 0), layers):
        if not cs.blocked_vertex(key, problem.goal, s):
            dist[(problem.goal, s)] = 0
            queue.append((problem.goal, s))
    while queue:
        state = queue.popleft()
        for prev in preds.get(state, ()):
            if prev not in dist:
                dist[prev] = dist[state] + 1
                queue.append(prev)
    return dist


def idastar_search(problem: SingleAgentProblem,
                   cat: Optional[ConflictAvoidanceTable] = None,
                   deadline: Optional[float] = None,
                   stats: Optional[SearchStats] = None) -> Optional[StreamPath]:
    """
    Iterative-deepening A* returning a minimum-length constrained path that never places
    two agents of the same stream on one vertex or edge at once.

    A self-conflict-free path visits each (vertex, step mod cycle) class at most once, so
    no such path is longer than |V| * cycle steps; the bound never grows past that.
    The heuristic is the exact folded distance, so dead-end branches are cut immediately
    and the first bound is the A* optimum.
    """
    grid, cs, key, cycle = problem.grid, problem.cs, problem.key, problem.cycle
    h = distance_field(grid, problem.goal)
    if h[problem.start.row, problem.start.col] == UNREACHABLE:
        return None
    if cs.blocked_vertex(key, problem.start, 0):
        return None

    cap = grid.num_vertices * cycle - 1
    last_mandate = cs.last_mandate_step(key)
    if last_mandate > cap:
        return None

    t_fin = cs.stream_horizon(key)
    period = cs.period(key, cycle)

    def fold(t: int) -> int:
        if t <= t_fin:
            return t
        return t_fin + 1 + (t - t_fin - 1) % period

    exact = folded_distances(problem)
    if exact is not None:
        def remaining(v: Vertex, t: int) -> Optional[int]:
            return exact.get((v, fold(t)))

        if remaining(problem.start, 0) is None:
            return None
        bound = remaining(problem.start, 0)
    else:
        # too large to tabulate, fall back to grid distances behind a folded A* check
        relaxed = astar_search(problem, deadline=deadline, stats=stats)
        if relaxed is None:
            return None
        bound = relaxed.cost

        def remaining(v: Vertex, t: int) -> Optional[int]:
            return int(h[v.row, v.col]) if h[v.row, v.col] != UNREACHABLE else None
    _check_deadline(deadline)

    cat = cat if cat is not None else ConflictAvoidanceTable()
    counter = {"expanded": 0}
    moves = {v: _successors(grid, v) for v in grid.vertices()}

    def goal_reachable(nv: Vertex, r: int, occupied: set) -> bool:
        """Whether a goal class is reachable from (nv, r) through unoccupied (vertex, residue) classes."""
        seen = {(nv, r)}
        frontier = [(nv, r)]
        while frontier:
            u, ru = frontier.pop()
            if u == problem.goal:
                return True
            nr = (ru + 1) % cycle
            for w in moves[u]:
                state = (w, nr)
                if state not in seen and state not in occupied:
                    seen.add(state)
                    frontier.append(state)
        return False

    def children(path: List[Vertex], occupied: set, swaps: set, bound: int, exceeded: List[int]):
        v, t = path[-1], len(path) - 1
        if t + 1 > cap:
            return []
        ranked = []
        for order, nv in enumerate(_successors(grid, v)):
            h_next = remaining(nv, t + 1)
            if h_next is None:
                continue
            f = t + 1 + h_next
            if f > bound:
                exceeded[0] = min(exceeded[0], f)
                continue
            if cs.blocked_vertex(key, nv, t + 1) or cs.blocked_edge(key, v, nv, t):
                continue
            if (nv, (t + 1) % cycle) in occupied:
                continue
            if v != nv and (nv, v, t % cycle) in swaps:
                continue
            if not goal_reachable(nv, (t + 1) % cycle, occupied):
                continue
            extra = cat.step_conflicts(v, nv, t, problem.t_offset, cycle)
            ranked.append((extra, order, nv))
        ranked.sort()
        return [nv for _, _, nv in ranked]

    def search(bound: int, exceeded: List[int]) -> Optional[List[Vertex]]:
        path = [problem.start]
        occupied = {(problem.start, 0)}
        swaps = set()
        if problem.start == problem.goal and last_mandate <= 0:
            return path
        stack = [iter(children(path, occupied, swaps, bound, exceeded))]
        while stack:
            nv = next(stack[-1], None)
            if nv is None:
                stack.pop()
                if len(path) > 1:
                    v = path.pop()
                    t = len(path)
                    occupied.discard((v, t % cycle))
                    prev = path[-1]
                    if prev != v:
                        swaps.discard((prev, v, (t - 1) % cycle))
                continue

            counter["expanded"] += 1
            if counter["expanded"] % _DEADLINE_POLL == 0:
                _check_deadline(deadline)

            v, t = path[-1], len(path) - 1
            path.append(nv)
            occupied.add((nv, (t + 1) % cycle))
            if v != nv:
                swaps.add((v, nv, t % cycle))
            if nv == problem.goal and t + 1 >= last_mandate:
                return path
            stack.append(iter(children(path, occupied, swaps, bound, exceeded)))
        return None

    try:
        while bound <= cap:
            exceeded = [math.inf]
            found = search(bound, exceeded)
            if found is not None:
                return StreamPath(tuple(found))
            if exceeded[0] == math.inf:
                return None
            bound = exceeded[0]
        return None
    finally:
        if stats is not None:
            stats.expansions += counter["expanded"]


def astar(inst: Instance, stream: int, cs: ConstraintSet,
          cat: Optional[ConflictAvoidanceTable] = None,
          deadline: Optional[float] = None,
          stats: Optional[SearchStats] = None) -> Optional[StreamPath]:
    """Plan one stream of an instance with space-time A*."""
    return astar_search(problem_for(inst, stream, cs), cat, deadline, stats)


def idastar(inst: Instance, stream: int, cs: ConstraintSet,
            cat: Optional[ConflictAvoidanceTable] = None,
            deadline: Optional[float] = None,
            stats: Optional[SearchStats] = None) -> Optional[StreamPath]:
    """Plan one stream of an instance with self-conflict-pruning IDA*."""
    return idastar_search(problem_for(inst, stream, cs), cat, deadline, stats)
