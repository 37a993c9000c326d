"""
Multi-value decision diagrams for conflict prioritization.
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Set, Tuple

from ascbs.grid import Vertex, distance_field, UNREACHABLE
from ascbs.instance import Instance
from ascbs.constraints import ConstraintSet
from ascbs.conflicts import Conflict, ConflictKind, ConflictPriority


@dataclass(frozen=True)
class MDD:
    """All constrained start-to-goal paths of one length, as one vertex set per step"""
    layers: Tuple[FrozenSet[Vertex], ...]
    edges: FrozenSet[Tuple[int, Vertex, Vertex]]

    def __len__(self) -> int:
        return len(self.layers)

    def width(self, q: int) -> int:
        if 0 <= q < len(self.layers):
            return len(self.layers[q])
        return 0

    def is_singleton(self, q: int, v: Vertex) -> bool:
        """Whether every path of this length is at v at step q."""
        return 0 <= q < len(self.layers) and self.layers[q] == frozenset((v,))


def build_mdd(inst: Instance, stream: int, cs: ConstraintSet, length: int) -> MDD:
    """
    Build the MDD of a stream's constrained paths with `length` vertices.

    Layers are the forward-reachable states from (start, 0) intersected with the states
    that can still reach (goal, length - 1).
    """
    s = inst.streams[stream]
    m = inst.map
    h = distance_field(m, s.goal)
    last = length - 1

    forward: List[Set[Vertex]] = [set() for _ in range(length)]
    if length >= 1 and not cs.blocked_vertex(stream, s.start, 0) and 0 <= h[s.start.row, s.start.col] <= last:
        forward[0].add(s.start)
    moves: List[List[Tuple[Vertex, Vertex]]] = [[] for _ in range(max(last, 0))]
    for q in range(last):
        for v in sorted(forward[q]):
            for nv in m.neighbors(v) + [v]:
                d = h[nv.row, nv.col]
                if d == UNREACHABLE or d > last - (q + 1):
                    continue
                if cs.blocked_vertex(stream, nv, q + 1) or cs.blocked_edge(stream, v, nv, q):
                    continue
                forward[q + 1].add(nv)
                moves[q].append((v, nv))

    layers: List[Set[Vertex]] = [set() for _ in range(length)]
    if length >= 1 and s.goal in forward[last]:
        layers[last].add(s.goal)
    edges = set()
    for q in range(last - 1, -1, -1):
        for v, nv in moves[q]:
            if nv in layers[q + 1]:
                layers[q].add(v)
                edges.add((q, v, nv))

    return MDD(layers=tuple(frozenset(layer) for layer in layers), edges=frozenset(edges))


def classify(conf: Conflict, mdd_i: MDD, mdd_j: MDD) -> ConflictPriority:
    """
    Count the sides of a conflict that every optimal path of that stream must take.
    Both sides forced is cardinal, one is semi-cardinal, none is non-cardinal.
    """
    if conf.kind == ConflictKind.VERTEX:
        forced_i = mdd_i.is_singleton(conf.q_i, conf.v)
        forced_j = mdd_j.is_singleton(conf.q_j, conf.v)
    else:
        forced_i = mdd_i.is_singleton(conf.q_i, conf.v) and mdd_i.is_singleton(conf.q_i + 1, conf.v_to)
        forced_j = mdd_j.is_singleton(conf.q_j, conf.v_to) and mdd_j.is_singleton(conf.q_j + 1, conf.v)
    return ConflictPriority(int(forced_i) + int(forced_j))


class MDDCache:
    """MDDs of one solve, keyed by (stream, constraint fingerprint, length)"""

    def __init__(self):
        self._cache: Dict[tuple, MDD] = {}
        self.hits = 0
        self.builds = 0

    def get(self, inst: Instance, stream: int, cs: ConstraintSet, length: int) -> MDD:
        key = (stream, cs.fingerprint(stream), length)
        mdd = self._cache.get(key)
        if mdd is None:
            mdd = build_mdd(inst, stream, cs, length)
            self._cache[key] = mdd
            self.builds += 1
        else:
            self.hits += 1
        return mdd
