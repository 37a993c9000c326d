"""
Grid graph for streaming multi-agent pathfinding.
Parses benchmark maps into a 4-connected grid and provides adjacency and exact distance fields.

Map cells: '.' and 'G' are passable; '@', 'O', 'T', 'S' and 'W' are impassable.
Swamp ('S') and water ('W') are passable under some benchmark movement rules; they are
treated as obstacles here so that parsing never depends on a movement model.
"""

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, List, NamedTuple, Tuple

import numpy as np


PASSABLE_CELLS = frozenset(".G")
IMPASSABLE_CELLS = frozenset("@OTSW")

UNREACHABLE = -1

# Orthogonal moves in action order: up, down, left, right
MOVES: Tuple[Tuple[int, int], ...] = ((-1, 0), (1, 0), (0, -1), (0, 1))


class MapFormatError(ValueError):
    """Raised when a map file does not follow the benchmark format"""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class Vertex(NamedTuple):
    """A grid cell, addressed by row and column"""
    row: int
    col: int

    def __str__(self) -> str:
        return f"({self.row},{self.col})"


@dataclass(frozen=True, eq=False)
class GridMap:
    """An immutable 4-connected grid; `passable` is a boolean array of shape (height, width)"""
    width: int
    height: int
    passable: np.ndarray
    name: str = ""

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"Grid dimensions must be positive, got {self.height}x{self.width}")
        if self.passable.shape != (self.height, self.width):
            raise ValueError(
                f"Passability array has shape {self.passable.shape}, expected {(self.height, self.width)}"
            )
        self.passable.setflags(write=False)

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    def is_passable(self, row: int, col: int) -> bool:
        return self.in_bounds(row, col) and bool(self.passable[row, col])

    def vertex(self, row: int, col: int) -> Vertex:
        """Return the vertex at (row, col), refusing cells that are off the map or blocked."""
        if not self.in_bounds(row, col):
            raise ValueError(f"Cell ({row},{col}) is outside the {self.height}x{self.width} map")
        if not self.passable[row, col]:
            raise ValueError(f"Cell ({row},{col}) is not passable")
        return Vertex(row, col)

    def vertex_id(self, v: Vertex) -> int:
        return v.row * self.width + v.col

    def vertices(self) -> Iterator[Vertex]:
        """All passable vertices in row-major order."""
        for row, col in zip(*np.nonzero(self.passable)):
            yield Vertex(int(row), int(col))

    @property
    def num_vertices(self) -> int:
        return int(self.passable.sum())

    def neighbors(self, v: Vertex) -> List[Vertex]:
        """The passable orthogonal neighbours of v, in action order (U, D, L, R)."""
        result = []
        for d_row, d_col in MOVES:
            row, col = v.row + d_row, v.col + d_col
            if self.is_passable(row, col):
                result.append(Vertex(row, col))
        return result

    def to_text(self) -> str:
        rows = ["".join("." if cell else "@" for cell in line) for line in self.passable]
        header = ["type octile", f"height {self.height}", f"width {self.width}", "map"]
        return "\n".join(header + rows) + "\n"


def _header_value(lines: List[str], index: int, key: str) -> int:
    if index >= len(lines):
        raise MapFormatError(index + 1, f"missing '{key}' header")
    parts = lines[index].split()
    if len(parts) != 2 or parts[0] != key:
        raise MapFormatError(index + 1, f"expected '{key} <n>', got '{lines[index]}'")
    try:
        value = int(parts[1])
    except ValueError:
        raise MapFormatError(index + 1, f"'{key}' must be an integer, got '{parts[1]}'")
    if value < 1:
        raise MapFormatError(index + 1, f"'{key}' must be positive, got {value}")
    return value


def parse_map(text: str, name: str = "") -> GridMap:
    """
    Parse a benchmark map file.

    Args:
        text: Map file content (type line, height, width, 'map', then the grid rows)
        name: Optional map name kept on the GridMap

    Returns:
        The parsed GridMap
    """
    lines = [line.rstrip("\r") for line in text.split("\n")]
    if not lines or lines[0].strip() != "type octile":
        raise MapFormatError(1, "expected 'type octile'")
    height = _header_value(lines, 1, "height")
    width = _header_value(lines, 2, "width")
    if len(lines) < 4 or lines[3].strip() != "map":
        raise MapFormatError(4, "expected 'map'")

    passable = np.zeros((height, width), dtype=bool)
    for row in range(height):
        line_no = 5 + row
        if line_no - 1 >= len(lines) or (lines[line_no - 1] == "" and line_no - 1 == len(lines) - 1):
            raise MapFormatError(line_no, f"map row {row + 1} of {height} is missing")
        line = lines[line_no - 1]
        if len(line) != width:
            raise MapFormatError(line_no, f"map row {row + 1} has {len(line)} cells, expected {width}")
        for col, cell in enumerate(line):
            if cell in PASSABLE_CELLS:
                passable[row, col] = True
            elif cell not in IMPASSABLE_CELLS:
                raise MapFormatError(line_no, f"unknown cell character '{cell}' at column {col}")

    for extra in range(4 + height, len(lines)):
        if lines[extra].strip():
            raise MapFormatError(extra + 1, f"unexpected content after {height} map rows")

    return GridMap(width=width, height=height, passable=passable, name=name)


def load_map(path: str) -> GridMap:
    """Read and parse a map file from disk."""
    with open(path) as f:
        text = f.read()
    name = path.replace("\\", "/").rsplit("/", 1)[-1]
    if name.endswith(".map"):
        name = name[:-4]
    return parse_map(text, name=name)


def neighbors(m: GridMap, v: Vertex) -> List[Vertex]:
    return m.neighbors(v)


@lru_cache(maxsize=1024)
def distance_field(m: GridMap, goal: Vertex) -> np.ndarray:
    """
    Exact unweighted distances from every cell to `goal` by breadth-first traversal.

    Returns:
        Read-only int array of shape (height, width); UNREACHABLE (-1) marks cells
        that are blocked or disconnected from the goal.
    """
    dist = np.full((m.height, m.width), UNREACHABLE, dtype=np.int64)
    dist[goal.row, goal.col] = 0
    queue = deque([goal])
    while queue:
        v = queue.popleft()
        d = dist[v.row, v.col] + 1
        for u in m.neighbors(v):
            if dist[u.row, u.col] == UNREACHABLE:
                dist[u.row, u.col] = d
                queue.append(u)
    dist.setflags(write=False)
    return dist
