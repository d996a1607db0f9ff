"""Grid environment: 4-connected grid graph plus MovingAI ``.map``/``.scen`` I/O.

Coordinates are ``(x, y)`` with ``x`` the column and ``y`` the row, origin at
the top-left corner, matching the field order of ``.scen`` files.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, TypeAlias

import numpy as np

Vertex: TypeAlias = tuple[int, int]

PASSABLE_CHARS = frozenset(".G")
OBSTACLE_CHARS = frozenset("@OTW")

_MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1))


class ParseError(ValueError):
    """Malformed map or scenario text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class GridMap:
    """Immutable passability grid; ``passable[y, x]`` is True for free cells."""

    passable: np.ndarray
    name: str = ""
    _dist_cache: dict = field(default_factory=dict, repr=False, compare=False)
    _adjacency: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        grid = np.array(self.passable, dtype=bool)
        if grid.ndim != 2 or grid.shape[0] < 1 or grid.shape[1] < 1:
            raise ValueError("grid must be a non-empty 2-D array")
        grid.setflags(write=False)
        object.__setattr__(self, "passable", grid)

    @property
    def width(self) -> int:
        return self.passable.shape[1]

    @property
    def height(self) -> int:
        return self.passable.shape[0]

    def in_bounds(self, v: Vertex) -> bool:
        return 0 <= v[0] < self.width and 0 <= v[1] < self.height

    def is_passable(self, v: Vertex) -> bool:
        return self.in_bounds(v) and bool(self.passable[v[1], v[0]])

    def cells(self) -> list[Vertex]:
        """All passable cells in row-major order."""
        ys, xs = np.nonzero(self.passable)
        return [(int(x), int(y)) for y, x in zip(ys, xs)]

    @property
    def num_passable(self) -> int:
        return int(self.passable.sum())

    def distances_from(self, source: Vertex) -> dict[Vertex, int]:
        """Breadth-first grid distances from ``source`` (cached per source).

        The graph is undirected, so this doubles as distance-to-``source``.
        """
        cached = self._dist_cache.get(source)
        if cached is None:
            cached = bfs_distances(self, source)
            self._dist_cache[source] = cached
        return cached

    @classmethod
    def from_strings(cls, rows: Iterable[str], name: str = "") -> "GridMap":
        rows = list(rows)
        return cls(np.array([[c in PASSABLE_CHARS for c in row] for row in rows]), name=name)

    @classmethod
    def open(cls, width: int, height: int) -> "GridMap":
        return cls(np.ones((height, width), dtype=bool))


def neighbors(grid: GridMap, v: Vertex) -> set[Vertex]:
    """Passable in-bounds cells one cardinal step from ``v`` (no wait action)."""
    x, y = v
    out = set()
    for dx, dy in _MOVES:
        u = (x + dx, y + dy)
        if grid.is_passable(u):
            out.add(u)
    return out


def neighbor_list(grid: GridMap, v: Vertex) -> tuple[Vertex, ...]:
    """Same cells as :func:`neighbors`, in a fixed order."""
    adj = grid._adjacency
    out = adj.get(v)
    if out is None:
        x, y = v
        out = tuple(u for u in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)) if grid.is_passable(u))
        adj[v] = out
    return out


def manhattan(a: Vertex, b: Vertex) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def bfs_distances(grid: GridMap, source: Vertex) -> dict[Vertex, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        d = dist[v] + 1
        for u in neighbor_list(grid, v):
            if u not in dist:
                dist[u] = d
                queue.append(u)
    return dist


def largest_component(grid: GridMap) -> set[Vertex]:
    """Cells of the largest 4-connected passable component."""
    seen: set[Vertex] = set()
    best: set[Vertex] = set()
    for v in grid.cells():
        if v in seen:
            continue
        comp = set(bfs_distances(grid, v))
        seen |= comp
        if len(comp) > len(best):
            best = comp
    return best


# --------------------------------------------------------------------------
# MovingAI formats


def _lines(text: str) -> list[str]:
    return text.replace("\r\n", "\n").replace("\r", "\n").split("\n")


def parse_map(text: str, name: str = "") -> GridMap:
    lines = _lines(text)
    header = []
    for i, expected in enumerate(("type", "height", "width", "map")):
        if i >= len(lines):
            raise ParseError(f"missing '{expected}' header", i + 1)
        parts = lines[i].split()
        if not parts or parts[0] != expected:
            raise ParseError(f"expected '{expected}' header, got {lines[i]!r}", i + 1)
        if expected in ("height", "width"):
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) < 1:
                raise ParseError(f"bad {expected} value in {lines[i]!r}", i + 1)
            header.append(int(parts[1]))
        elif expected == "type" and len(parts) != 2:
            raise ParseError(f"bad type line {lines[i]!r}", i + 1)
        elif expected == "map" and len(parts) != 1:
            raise ParseError(f"bad map line {lines[i]!r}", i + 1)
    height, width = header
    body = lines[4:]
    while body and body[-1] == "":
        body.pop()
    if len(body) != height:
        raise ParseError(f"expected {height} map rows, found {len(body)}", 4 + len(body))
    grid = np.zeros((height, width), dtype=bool)
    for r, row in enumerate(body):
        lineno = 5 + r
        if len(row) != width:
            raise ParseError(f"expected {width} cells, found {len(row)}", lineno)
        for c, ch in enumerate(row):
            if ch in PASSABLE_CHARS:
                grid[r, c] = True
            elif ch not in OBSTACLE_CHARS:
                raise ParseError(f"unknown cell character {ch!r}", lineno)
    return GridMap(grid, name=name)


def serialize_map(grid: GridMap, map_type: str = "octile") -> str:
    rows = ["".join("." if p else "@" for p in row) for row in grid.passable]
    return "\n".join([f"type {map_type}", f"height {grid.height}", f"width {grid.width}", "map", *rows]) + "\n"


@dataclass(frozen=True)
class ScenarioEntry:
    start: Vertex
    goal: Vertex
    reference_length: float = 0.0
    bucket: int = 0
    map_name: str = ""


def parse_scenario(text: str, grid: GridMap) -> list[ScenarioEntry]:
    lines = _lines(text)
    if not lines or not lines[0].split() or lines[0].split()[0] != "version":
        raise ParseError("expected 'version' header", 1)
    entries = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 9:
            raise ParseError(f"expected 9 fields, found {len(fields)}", i)
        bucket, map_name, w, h, sx, sy, gx, gy, length = fields
        try:
            bucket_i, w_i, h_i = int(bucket), int(w), int(h)
            sx_i, sy_i, gx_i, gy_i = int(sx), int(sy), int(gx), int(gy)
            length_f = float(length)
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", i) from None
        if (w_i, h_i) != (grid.width, grid.height):
            raise ParseError(
                f"dimension mismatch: scenario says {w_i}x{h_i}, map is {grid.width}x{grid.height}", i
            )
        start, goal = (sx_i, sy_i), (gx_i, gy_i)
        if not grid.is_passable(start):
            raise ParseError("start on obstacle" if grid.in_bounds(start) else "start out of bounds", i)
        if not grid.is_passable(goal):
            raise ParseError("goal on obstacle" if grid.in_bounds(goal) else "goal out of bounds", i)
        entries.append(ScenarioEntry(start, goal, length_f, bucket_i, map_name))
    return entries


def serialize_scenario(entries: Iterable[ScenarioEntry], grid: GridMap, map_name: str = "map") -> str:
    out = ["version 1"]
    for e in entries:
        out.append(
            f"{e.bucket}\t{e.map_name or map_name}\t{grid.width}\t{grid.height}\t"
            f"{e.start[0]}\t{e.start[1]}\t{e.goal[0]}\t{e.goal[1]}\t{e.reference_length:.8f}"
        )
    return "\n".join(out) + "\n"


def load_map(path) -> GridMap:
    from pathlib import Path

    p = Path(path)
    return parse_map(p.read_text(encoding="utf-8"), name=p.stem)


def load_scenario(path, grid: GridMap) -> list[ScenarioEntry]:
    from pathlib import Path

    return parse_scenario(Path(path).read_text(encoding="utf-8"), grid)
