"""
Shared builders for the test suite.
"""

import os
from typing import List, Sequence, Tuple

from ascbs.grid import GridMap, Vertex, parse_map
from ascbs.instance import AgentStream, CycleMode, Instance, make_instance


DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")


def data_path(name: str) -> str:
    return os.path.join(DATA_DIR, name)


def map_text(rows: Sequence[str]) -> str:
    header = ["type octile", f"height {len(rows)}", f"width {len(rows[0])}", "map"]
    return "\n".join(header + list(rows)) + "\n"


def map_from_rows(rows: Sequence[str]) -> GridMap:
    return parse_map(map_text(rows))


def open_map(height: int, width: int) -> GridMap:
    return map_from_rows(["." * width] * height)


def uniform_instance(m: GridMap, tasks: Sequence[Tuple[Tuple[int, int], Tuple[int, int], int]],
                     cycle: int) -> Instance:
    """Tasks are ((start row, col), (goal row, col), t_start)."""
    return make_instance(m, [(Vertex(*s), Vertex(*g), t) for s, g, t in tasks], cycle)


def nonuniform_instance(m: GridMap, tasks: List[Tuple[Tuple[int, int], Tuple[int, int], int, int]]) -> Instance:
    """Tasks are ((start), (goal), t_start, cycle)."""
    streams = tuple(
        AgentStream(id=i, start=Vertex(*s), goal=Vertex(*g), t_start=t, cycle=c)
        for i, (s, g, t, c) in enumerate(tasks)
    )
    return Instance(map=m, streams=streams, cycle_time=None, mode=CycleMode.NONUNIFORM)
