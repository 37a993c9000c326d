"""
Cyclic conflict detection between stream paths.

Two agents spawned by streams i and j meet when t_i + q_i + k_i*c_i == t_j + q_j + k_j*c_j for
some non-negative k_i, k_j (with k_i != k_j when i == j). Such a pair exists exactly when
gcd(c_i, c_j) divides the offset difference, so detection needs no time horizon.
"""

import math
from enum import Enum, IntEnum
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from ascbs.grid import Vertex
from ascbs.instance import Instance, Solution, StreamPath


class ConflictKind(Enum):
    VERTEX = "vertex"
    EDGE = "edge"


class ConflictPriority(IntEnum):
    """Prioritize-conflicts classes; larger is resolved first"""
    NON_CARDINAL = 0
    SEMI_CARDINAL = 1
    CARDINAL = 2


@dataclass(frozen=True)
class Conflict:
    """
    A cyclic conflict between step q_i of stream i and step q_j of stream j.

    For an edge conflict, stream i traverses v -> v_to leaving step q_i while stream j
    traverses v_to -> v leaving step q_j.
    """
    kind: ConflictKind
    i: int
    j: int
    q_i: int
    q_j: int
    v: Vertex
    v_to: Optional[Vertex] = None
    priority: ConflictPriority = field(default=ConflictPriority.NON_CARDINAL, compare=False)

    @property
    def same_stream(self) -> bool:
        return self.i == self.j

    def sort_key(self) -> Tuple[int, int, int, int, int]:
        return (self.i, self.j, self.q_i, self.q_j, 0 if self.kind == ConflictKind.VERTEX else 1)

    def with_priority(self, priority: ConflictPriority) -> "Conflict":
        return replace(self, priority=priority)

    def __str__(self) -> str:
        where = str(self.v) if self.kind == ConflictKind.VERTEX else f"{self.v}->{self.v_to}"
        return f"{self.kind.value}<{self.i},{self.j},{self.q_i},{self.q_j},{where}>"


def timing_compatible(t_i: int, c_i: int, q_i: int,
                      t_j: int, c_j: int, q_j: int,
                      same_agent_excluded: bool = False) -> bool:
    """
    Whether agents of two streams can be at steps q_i and q_j at the same absolute time.

    Args:
        same_agent_excluded: True when both sides belong to the same stream, so the
            witness must use two different agents

    Returns:
        True iff gcd(c_i, c_j) divides (t_j + q_j) - (t_i + q_i); with uniform cycles this
        is the congruence (t_i + q_i) = (t_j + q_j) mod c
    """
    if same_agent_excluded and q_i == q_j:
        return False
    g = math.gcd(c_i, c_j)
    return ((t_j + q_j) - (t_i + q_i)) % g == 0


def pair_conflicts(inst: Instance, i: int, path_i: StreamPath, j: int, path_j: StreamPath) -> List[Conflict]:
    """
    All conflicts between the paths of streams i <= j, in canonical order.
    For i == j only step pairs with q_i < q_j are reported.
    """
    assert i <= j, "pair_conflicts expects i <= j"
    s_i, s_j = inst.streams[i], inst.streams[j]
    same = i == j
    g = math.gcd(s_i.cycle, s_j.cycle)

    vertex_index: Dict[Tuple[Vertex, int], List[int]] = {}
    edge_index: Dict[Tuple[Vertex, Vertex, int], List[int]] = {}
    for q, v in enumerate(path_j.vertices):
        vertex_index.setdefault((v, (s_j.t_start + q) % g), []).append(q)
    for q, (a, b) in enumerate(zip(path_j.vertices, path_j.vertices[1:])):
        if a != b:
            edge_index.setdefault((a, b, (s_j.t_start + q) % g), []).append(q)

    found = []
    for q_i, v in enumerate(path_i.vertices):
        residue = (s_i.t_start + q_i) % g
        for q_j in vertex_index.get((v, residue), ()):
            if same and q_j <= q_i:
                continue
            found.append(Conflict(ConflictKind.VERTEX, i, j, q_i, q_j, v))
    for q_i, (a, b) in enumerate(zip(path_i.vertices, path_i.vertices[1:])):
        if a == b:
            continue
        residue = (s_i.t_start + q_i) % g
        for q_j in edge_index.get((b, a, residue), ()):
            if same and q_j <= q_i:
                continue
            found.append(Conflict(ConflictKind.EDGE, i, j, q_i, q_j, a, b))

    found.sort(key=Conflict.sort_key)
    return found


def conflicts_by_pair(inst: Instance, sol: Solution) -> Dict[Tuple[int, int], List[Conflict]]:
    """Conflicts grouped by stream pair (i, j) with i <= j; pairs without conflicts are omitted."""
    table = {}
    for i in range(inst.n):
        for j in range(i, inst.n):
            found = pair_conflicts(inst, i, sol.paths[i], j, sol.paths[j])
            if found:
                table[(i, j)] = found
    return table


def find_conflicts(inst: Instance, sol: Solution) -> List[Conflict]:
    """Every cyclic vertex and edge conflict of a solution, ordered by (i, j, q_i, q_j), vertex first."""
    assert len(sol.paths) == inst.n, "one path per stream expected"
    table = conflicts_by_pair(inst, sol)
    return [conf for key in sorted(table) for conf in table[key]]


def conflict_witness(conf: Conflict, inst: Instance) -> Tuple[int, int]:
    """
    The lexicographically smallest non-negative (k_i, k_j) realizing a conflict.

    Raises:
        ValueError: if the conflict's timing admits no witness
    """
    s_i, s_j = inst.streams[conf.i], inst.streams[conf.j]
    a = s_i.t_start + conf.q_i
    b = s_j.t_start + conf.q_j
    # beyond this k_i every residue of a + k_i*c_i mod c_j has already been seen
    limit = b // s_i.cycle + s_j.cycle + 1
    for k_i in range(limit + 1):
        diff = a + k_i * s_i.cycle - b
        if diff < 0 or diff % s_j.cycle:
            continue
        k_j = diff // s_j.cycle
        if conf.same_stream and k_i == k_j:
            continue
        return k_i, k_j
    raise ValueError(f"No witness exists for {conf}")
