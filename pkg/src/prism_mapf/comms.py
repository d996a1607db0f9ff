"""Who can talk to whom: range predicates and multi-hop local networks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .env import GridMap, Vertex

PROTOCOLS = ("proximity", "line_of_sight", "full")
MIN_DIAMETER = 4


@dataclass(frozen=True)
class CommsConfig:
    protocol: str = "full"
    range_fraction: float | None = None
    min_diameter: int = MIN_DIAMETER

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.range_fraction is not None and not 0 < self.range_fraction <= 1:
            raise ValueError("range fraction must lie in (0, 1]")

    def diameter(self, grid: GridMap) -> float:
        """Proximity diameter in cells; ``range_fraction=None`` means the minimum."""
        if self.range_fraction is None:
            return float(self.min_diameter)
        return float(max(self.min_diameter, round(self.range_fraction * max(grid.width, grid.height))))


def supercover(p: Vertex, q: Vertex) -> list[Vertex]:
    """Every cell whose closed square the segment between cell centres touches.

    Where the segment passes exactly through a cell corner, all cells sharing
    that corner are included.
    """
    x0, y0 = p
    x1, y1 = q
    dx, dy = x1 - x0, y1 - y0
    nx, ny = abs(dx), abs(dy)
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    x, y = x0, y0
    cells = [(x, y)]
    ix = iy = 0
    while ix < nx or iy < ny:
        # compare the parameters of the next vertical and horizontal boundary crossings
        decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx
        if decision == 0:
            cells.append((x + sx, y))
            cells.append((x, y + sy))
            x += sx
            y += sy
            ix += 1
            iy += 1
        elif decision < 0:
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        cells.append((x, y))
    return cells


def line_of_sight(grid: GridMap, p: Vertex, q: Vertex) -> bool:
    return all(grid.is_passable(c) for c in supercover(p, q))


def in_range(config: CommsConfig, grid: GridMap, p: Vertex, q: Vertex) -> bool:
    if config.protocol == "full":
        return True
    dist = math.hypot(p[0] - q[0], p[1] - q[1])
    if config.protocol == "proximity":
        return dist <= config.diameter(grid)
    return dist <= config.min_diameter or line_of_sight(grid, p, q)


@dataclass
class NetworkPartition:
    """Connected components of the communication graph; a network's id is its lowest member id."""

    membership: dict[int, int] = field(default_factory=dict)
    networks: dict[int, frozenset[int]] = field(default_factory=dict)

    def members(self, agent_id: int) -> frozenset[int]:
        return self.networks[self.membership[agent_id]]


def compute_networks(agents: Iterable[tuple[int, Vertex]], config: CommsConfig, grid: GridMap) -> NetworkPartition:
    agents = sorted(agents)
    ids = [a for a, _ in agents]
    parent = {a: a for a in ids}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if config.protocol == "full":
        for a in ids[1:]:
            parent[find(a)] = find(ids[0])
    else:
        for i, (a, pa) in enumerate(agents):
            for b, pb in agents[i + 1:]:
                if find(a) != find(b) and in_range(config, grid, pa, pb):
                    ra, rb = find(a), find(b)
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, set[int]] = {}
    for a in ids:
        groups.setdefault(find(a), set()).add(a)
    partition = NetworkPartition()
    for members in groups.values():
        nid = min(members)
        partition.networks[nid] = frozenset(members)
        for a in members:
            partition.membership[a] = nid
    partition.networks = dict(sorted(partition.networks.items()))
    return partition

