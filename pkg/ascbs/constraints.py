"""
Constraint store for the constraint tree.
Cyclic, plain and positive constraints on stream paths, with step-level blocked/mandated queries.
"""

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

from ascbs.grid import Vertex
from ascbs.instance import StreamPath


class InconsistentConstraintsError(RuntimeError):
    """Raised when a constraint set mandates two different things for one stream at one step"""
    pass


@dataclass(frozen=True)
class CyclicVertexConstraint:
    """Stream may not occupy v at any step q = q_r (mod cycle), except q == q_e"""
    stream: int
    v: Vertex
    q_r: int
    cycle: int
    q_e: Optional[int] = None

    def __post_init__(self):
        if self.cycle < 1:
            raise ValueError(f"Cyclic constraint cycle must be positive, got {self.cycle}")
        object.__setattr__(self, "q_r", self.q_r % self.cycle)

    def matches(self, q: int) -> bool:
        return q % self.cycle == self.q_r and q != self.q_e


@dataclass(frozen=True)
class CyclicEdgeConstraint:
    """Stream may not traverse v_from -> v_to leaving any step q = q_r (mod cycle), except q == q_e"""
    stream: int
    v_from: Vertex
    v_to: Vertex
    q_r: int
    cycle: int
    q_e: Optional[int] = None

    def __post_init__(self):
        if self.cycle < 1:
            raise ValueError(f"Cyclic constraint cycle must be positive, got {self.cycle}")
        object.__setattr__(self, "q_r", self.q_r % self.cycle)

    def matches(self, q: int) -> bool:
        return q % self.cycle == self.q_r and q != self.q_e


@dataclass(frozen=True)
class VertexConstraint:
    stream: int
    v: Vertex
    q: int


@dataclass(frozen=True)
class EdgeConstraint:
    stream: int
    v_from: Vertex
    v_to: Vertex
    q: int


@dataclass(frozen=True)
class PositiveVertexConstraint:
    """Stream must be at v at step q"""
    stream: int
    v: Vertex
    q: int


@dataclass(frozen=True)
class PositiveEdgeConstraint:
    """Stream must traverse v_from -> v_to leaving step q"""
    stream: int
    v_from: Vertex
    v_to: Vertex
    q: int


Constraint = Union[
    CyclicVertexConstraint,
    CyclicEdgeConstraint,
    VertexConstraint,
    EdgeConstraint,
    PositiveVertexConstraint,
    PositiveEdgeConstraint,
]

Mandate = Union[Vertex, Tuple[Vertex, Vertex]]


class _StreamIndex:
    """Per-stream lookup tables built from the member constraints"""

    def __init__(self, constraints: Iterable[Constraint]):
        self.plain_vertex: Set[Tuple[Vertex, int]] = set()
        self.plain_edge: Set[Tuple[Vertex, Vertex, int]] = set()
        self.cyclic_vertex: Dict[Vertex, List[CyclicVertexConstraint]] = {}
        self.cyclic_edge: Dict[Tuple[Vertex, Vertex], List[CyclicEdgeConstraint]] = {}
        self.positive_vertex: Dict[int, Set[Vertex]] = {}
        self.positive_edge: Dict[int, Set[Tuple[Vertex, Vertex]]] = {}
        self.horizon = -1
        self.period = 1

        for con in constraints:
            if isinstance(con, CyclicVertexConstraint):
                self.cyclic_vertex.setdefault(con.v, []).append(con)
                self.period = math.lcm(self.period, con.cycle)
                if con.q_e is not None:
                    self.horizon = max(self.horizon, con.q_e)
            elif isinstance(con, CyclicEdgeConstraint):
                self.cyclic_edge.setdefault((con.v_from, con.v_to), []).append(con)
                self.period = math.lcm(self.period, con.cycle)
                if con.q_e is not None:
                    self.horizon = max(self.horizon, con.q_e)
            elif isinstance(con, VertexConstraint):
                self.plain_vertex.add((con.v, con.q))
                self.horizon = max(self.horizon, con.q)
            elif isinstance(con, EdgeConstraint):
                self.plain_edge.add((con.v_from, con.v_to, con.q))
                self.horizon = max(self.horizon, con.q)
            elif isinstance(con, PositiveVertexConstraint):
                self.positive_vertex.setdefault(con.q, set()).add(con.v)
                self.horizon = max(self.horizon, con.q)
            elif isinstance(con, PositiveEdgeConstraint):
                self.positive_edge.setdefault(con.q, set()).add((con.v_from, con.v_to))
                self.horizon = max(self.horizon, con.q + 1)
            else:
                raise TypeError(f"Unknown constraint type: {type(con).__name__}")

        self.last_mandate = max(
            [q for q in self.positive_vertex] + [q + 1 for q in self.positive_edge],
            default=-1,
        )

    def required_edge(self, q: int) -> Optional[Tuple[Vertex, Vertex]]:
        edges = self.positive_edge.get(q)
        if not edges:
            return None
        if len(edges) > 1:
            raise InconsistentConstraintsError(f"Several positive edges mandated at step {q}: {sorted(edges)}")
        return next(iter(edges))

    def required_vertex(self, q: int) -> Optional[Vertex]:
        """The vertex implied at step q by positive vertex and edge mandates."""
        implied: Set[Vertex] = set(self.positive_vertex.get(q, ()))
        leaving = self.required_edge(q)
        if leaving is not None:
            implied.add(leaving[0])
        if q > 0:
            arriving = self.required_edge(q - 1)
            if arriving is not None:
                implied.add(arriving[1])
        if not implied:
            return None
        if len(implied) > 1:
            raise InconsistentConstraintsError(f"Several vertices mandated at step {q}: {sorted(implied)}")
        return next(iter(implied))


class ConstraintSet:
    """
    An immutable set of constraints. Extending returns a new set, so a set attached to a
    constraint-tree node is never modified by its children.
    """

    def __init__(self, constraints: Iterable[Constraint] = ()):
        self._constraints: FrozenSet[Constraint] = frozenset(constraints)
        self._by_stream: Dict[int, List[Constraint]] = {}
        for con in self._constraints:
            self._by_stream.setdefault(con.stream, []).append(con)
        self._index: Dict[int, _StreamIndex] = {}
        self.finite_horizon = max((self._stream_index(s).horizon for s in self._by_stream), default=-1)

    def _stream_index(self, stream: int) -> _StreamIndex:
        index = self._index.get(stream)
        if index is None:
            index = _StreamIndex(self._by_stream.get(stream, ()))
            self._index[stream] = index
        return index

    def __len__(self) -> int:
        return len(self._constraints)

    def __iter__(self):
        return iter(self._constraints)

    def __contains__(self, con: Constraint) -> bool:
        return con in self._constraints

    def extend(self, constraints: Iterable[Constraint]) -> "ConstraintSet":
        """A new set holding these constraints plus the given ones; duplicates collapse."""
        return ConstraintSet(self._constraints.union(constraints))

    def for_stream(self, stream: int) -> Tuple[Constraint, ...]:
        return tuple(self._by_stream.get(stream, ()))

    def fingerprint(self, stream: int) -> FrozenSet[Constraint]:
        """A hashable key identifying everything that constrains one stream."""
        return frozenset(self._by_stream.get(stream, ()))

    def stream_horizon(self, stream: int) -> int:
        """Largest finite step referenced by the stream's constraints, or -1."""
        return self._stream_index(stream).horizon

    def last_mandate_step(self, stream: int) -> int:
        """Largest step at which a positive constraint places the stream, or -1."""
        return self._stream_index(stream).last_mandate

    def period(self, stream: int, cycle: int = 1) -> int:
        """Period of the blocked predicate beyond the stream's finite horizon."""
        return math.lcm(cycle, self._stream_index(stream).period)

    def blocked_vertex(self, stream: int, v: Vertex, q: int) -> bool:
        index = self._stream_index(stream)
        if (v, q) in index.plain_vertex:
            return True
        for con in index.cyclic_vertex.get(v, ()):
            if con.matches(q):
                return True
        required = index.required_vertex(q)
        return required is not None and required != v

    def blocked_edge(self, stream: int, v_from: Vertex, v_to: Vertex, q: int) -> bool:
        """Whether moving (or waiting, when v_from == v_to) leaving step q is forbidden."""
        index = self._stream_index(stream)
        if (v_from, v_to, q) in index.plain_edge:
            return True
        for con in index.cyclic_edge.get((v_from, v_to), ()):
            if con.matches(q):
                return True
        required = index.required_edge(q)
        return required is not None and required != (v_from, v_to)

    def mandated_at(self, stream: int, q: int) -> Optional[Mandate]:
        """
        The positive constraint anchored at step q: a directed edge if one leaves q,
        otherwise the mandated vertex, otherwise None.

        Raises:
            InconsistentConstraintsError: if two mandates disagree at step q
        """
        index = self._stream_index(stream)
        edge = index.required_edge(q)
        vertices = index.positive_vertex.get(q, set())
        if len(vertices) > 1:
            raise InconsistentConstraintsError(
                f"Stream {stream}: several vertices mandated at step {q}: {sorted(vertices)}"
            )
        if edge is not None:
            if vertices and edge[0] not in vertices:
                raise InconsistentConstraintsError(
                    f"Stream {stream}: positive edge {edge} and vertex {sorted(vertices)} disagree at step {q}"
                )
            return edge
        return next(iter(vertices)) if vertices else None

    def check_consistency(self) -> None:
        """
        Verify that no stream has contradictory mandates or a mandate that its other
        constraints block.

        Raises:
            InconsistentConstraintsError: on the first contradiction found
        """
        for stream in sorted(self._by_stream):
            index = self._stream_index(stream)
            steps = set(index.positive_vertex)
            for q in index.positive_edge:
                steps.update((q, q + 1))
            for q in sorted(steps):
                self.mandated_at(stream, q)
                v = index.required_vertex(q)
                if v is not None and self.blocked_vertex(stream, v, q):
                    raise InconsistentConstraintsError(f"Stream {stream}: mandated {v} at step {q} is blocked")
            for q, edges in index.positive_edge.items():
                for a, b in edges:
                    if self.blocked_edge(stream, a, b, q):
                        raise InconsistentConstraintsError(
                            f"Stream {stream}: mandated edge {a}->{b} at step {q} is blocked"
                        )

    def violates(self, stream: int, path: StreamPath) -> bool:
        """Whether a path breaks any constraint of the stream, including mandates it ends before."""
        if self.last_mandate_step(stream) >= len(path):
            return True
        vertices = path.vertices
        for q, v in enumerate(vertices):
            if self.blocked_vertex(stream, v, q):
                return True
        for q in range(len(vertices) - 1):
            if self.blocked_edge(stream, vertices[q], vertices[q + 1], q):
                return True
        return False
