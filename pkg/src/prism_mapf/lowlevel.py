"""Constrained single-agent space-time A*.

States are ``(vertex, time)``. Vertex constraints forbid occupying a cell at a
timestep, edge constraints forbid traversing ``u -> v`` departing at a
timestep, and static obstacles forbid a cell at every timestep. Once the time
passes the last finite constraint the problem is stationary, so states beyond
that point are merged per vertex; this makes infeasibility detection exact.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable

from .env import GridMap, Vertex, neighbor_list

INFINITE = float("inf")


@dataclass(frozen=True)
class Constraint:
    """A forbidden vertex-or-edge occupancy for one agent.

    ``to`` is None for vertex constraints; for edge constraints ``vertex`` is
    the departure cell, ``to`` the arrival cell and ``time`` the departure
    timestep. ``source`` is the agent whose presence caused the constraint.
    A ``permanent`` vertex constraint holds at every timestep ``>= time``; it
    is produced against agents that rest on a cell from then on. A ``final``
    constraint does not forbid occupancy: it only says a path ending on
    ``vertex`` must arrive there for good after ``time``.
    """

    vertex: Vertex
    time: int
    source: int = -1
    to: Vertex | None = None
    permanent: bool = False
    final: bool = False

    @property
    def kind(self) -> str:
        if self.final:
            return "final"
        return "vertex" if self.to is None else "edge"

    @classmethod
    def edge(cls, frm: Vertex, to: Vertex, time: int, source: int = -1) -> "Constraint":
        return cls(frm, time, source, to)

    def sort_key(self):
        return (self.time, self.to is not None, self.vertex, self.to or (-1, -1), self.source, self.permanent, self.final)


@dataclass(frozen=True)
class Path:
    """Positions indexed by absolute time: ``positions[k]`` is occupied at ``start_time + k``."""

    start_time: int
    positions: tuple[Vertex, ...]

    def __post_init__(self):
        if not self.positions:
            raise ValueError("a path needs at least one position")
        object.__setattr__(self, "positions", tuple(self.positions))

    @property
    def end_time(self) -> int:
        return self.start_time + len(self.positions) - 1

    @property
    def cost(self) -> int:
        return len(self.positions) - 1

    @property
    def goal(self) -> Vertex:
        return self.positions[-1]

    def at(self, t: int) -> Vertex:
        """Position at time ``t``; the agent rests on its last cell after the path ends."""
        k = t - self.start_time
        if k <= 0:
            return self.positions[0]
        if k >= len(self.positions):
            return self.positions[-1]
        return self.positions[k]

    def since(self, t: int) -> "Path":
        """The remainder of the path from time ``t`` on."""
        if t <= self.start_time:
            return self
        k = t - self.start_time
        if k >= len(self.positions):
            return Path(t, (self.positions[-1],))
        return Path(t, self.positions[k:])

    @classmethod
    def stay(cls, v: Vertex, t: int) -> "Path":
        return cls(t, (v,))


@dataclass(frozen=True)
class PlanRecord:
    """The search inputs that reproduce a path exactly (see :meth:`replay`)."""

    origin: Vertex
    origin_time: int
    goal: Vertex
    constraints: frozenset[Constraint] = frozenset()
    obstacles: frozenset[Vertex] = frozenset()

    def replay(self, grid: GridMap) -> Path | None:
        if self.origin == self.goal and not self.constraints:
            return Path.stay(self.origin, self.origin_time)
        return plan_path(grid, self.origin, self.goal, self.origin_time, self.constraints, self.obstacles)

    @classmethod
    def hold(cls, v: Vertex, t: int) -> "PlanRecord":
        return cls(v, t, v)


class _Table:
    """Constraint lookups for one search."""

    def __init__(self, constraints: Iterable[Constraint], start_time: int):
        self.vertex: set[tuple[Vertex, int]] = set()
        self.edge: set[tuple[Vertex, Vertex, int]] = set()
        self.permanent: dict[Vertex, int] = {}
        self.final: dict[Vertex, int] = {}
        self.last_time = start_time
        for c in constraints:
            if c.final:
                self.final[c.vertex] = max(self.final.get(c.vertex, -1), c.time)
                self.last_time = max(self.last_time, c.time)
            elif c.to is None:
                if c.permanent:
                    prev = self.permanent.get(c.vertex)
                    self.permanent[c.vertex] = c.time if prev is None else min(prev, c.time)
                    self.last_time = max(self.last_time, c.time)
                elif c.time > start_time:
                    self.vertex.add((c.vertex, c.time))
                    self.last_time = max(self.last_time, c.time)
            elif c.time >= start_time:
                self.edge.add((c.vertex, c.to, c.time))
                self.last_time = max(self.last_time, c.time + 1)

    def last_vertex_time(self, v: Vertex) -> int:
        latest = max((t for (u, t) in self.vertex if u == v), default=-1)
        return max(latest, self.final.get(v, -1))


def plan_path(
    grid: GridMap,
    start: Vertex,
    goal: Vertex,
    start_time: int = 0,
    constraints: Iterable[Constraint] = (),
    obstacles: Iterable[Vertex] = (),
    horizon: int | None = None,
    rest_at_goal: bool = True,
) -> Path | None:
    """Shortest constraint-respecting path from ``start`` at ``start_time`` to ``goal``.

    With ``rest_at_goal`` the agent is assumed to stay on ``goal`` forever after
    arriving, so arrival is pushed past the last vertex constraint on the goal.
    Returns None when no such path exists (or none ends by ``horizon``).
    """
    obstacles = frozenset(obstacles)
    if start in obstacles or goal in obstacles:
        raise ValueError("start and goal must not be static obstacles")
    if not grid.is_passable(start) or not grid.is_passable(goal):
        raise ValueError("start and goal must be passable cells")
    h = grid.distances_from(goal)
    if start not in h:
        return None
    table = _Table(constraints, start_time)
    vcon, econ, perm = table.vertex, table.edge, table.permanent
    if rest_at_goal:
        if goal in perm:
            return None
        earliest_arrival = table.last_vertex_time(goal) + 1
    else:
        earliest_arrival = -1
    t_cap = table.last_time + 1

    def blocked(v: Vertex, t: int) -> bool:
        if v in obstacles or (v, t) in vcon:
            return True
        p = perm.get(v)
        return p is not None and p <= t

    start_state = (start, start_time)
    parent: dict[tuple[Vertex, int], tuple[Vertex, int] | None] = {start_state: None}
    closed: set[tuple[Vertex, int]] = set()
    open_heap = [(h[start], 0, start[1], start[0], start_time)]
    while open_heap:
        f, neg_g, y, x, t = heapq.heappop(open_heap)
        v = (x, y)
        key = (v, t if t < t_cap else t_cap)
        if key in closed:
            continue
        closed.add(key)
        if v == goal and t >= earliest_arrival:
            out = []
            state: tuple[Vertex, int] | None = (v, t)
            while state is not None:
                out.append(state[0])
                state = parent[state]
            out.reverse()
            return Path(start_time, tuple(out))
        nt = t + 1
        if horizon is not None and nt > horizon:
            continue
        g = nt - start_time
        nkey_t = nt if nt < t_cap else t_cap
        for u in [v, *neighbor_list(grid, v)]:
            if (u, nkey_t) in closed or blocked(u, nt):
                continue
            if u != v and (v, u, t) in econ:
                continue
            hu = h.get(u)
            if hu is None:
                continue
            state = (u, nt)
            if state not in parent:
                parent[state] = (v, t)
            heapq.heappush(open_heap, (g + hu, -g, u[1], u[0], nt))
    return None


def violations(path: Path, constraints: Iterable[Constraint], obstacles: Iterable[Vertex] = ()) -> list[Constraint | Vertex]:
    """Constraints (or obstacle cells) that ``path`` breaks, resting on its goal afterwards."""
    bad: list = []
    obstacles = set(obstacles)
    bad.extend(sorted({v for v in path.positions if v in obstacles}))
    for c in constraints:
        if c.final:
            if path.goal == c.vertex and path.end_time <= c.time:
                bad.append(c)
        elif c.to is None:
            if c.permanent:
                first = max(c.time, path.start_time + 1)
                if path.goal == c.vertex or any(path.at(t) == c.vertex for t in range(first, path.end_time + 1)):
                    bad.append(c)
            elif c.time > path.start_time and path.at(c.time) == c.vertex:
                bad.append(c)
        elif path.start_time <= c.time < path.end_time:
            if path.at(c.time) == c.vertex and path.at(c.time + 1) == c.to:
                bad.append(c)
    return bad
