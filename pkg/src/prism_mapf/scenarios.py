"""Seeded maps, task sets and the hand-built regression scenarios."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .env import GridMap, ScenarioEntry, Vertex, largest_component, neighbors


@dataclass
class Scenario:
    name: str
    grid: GridMap
    starts: list[Vertex]
    tasks: list[tuple[Vertex, Vertex]]
    seed: int | None = None
    notes: dict = field(default_factory=dict)


def random_grid(width: int = 32, height: int = 32, obstacle_ratio: float = 0.2, seed: int = 0) -> GridMap:
    """Uniform random obstacles; cells outside the largest open component become obstacles."""
    rng = np.random.default_rng(seed)
    blocked = rng.random((height, width)) < obstacle_ratio
    grid = GridMap(~blocked, name=f"random-{width}-{height}-{round(obstacle_ratio * 100)}")
    keep = largest_component(grid)
    passable = np.zeros((height, width), dtype=bool)
    for x, y in keep:
        passable[y, x] = True
    return GridMap(passable, name=grid.name)


def maze(width: int = 32, height: int = 32, corridor: int = 2, seed: int = 0) -> GridMap:
    """Perfect maze (a spanning tree of rooms) with corridors ``corridor`` cells wide and 1-cell walls."""
    rng = np.random.default_rng(seed)
    pitch = corridor + 1
    nx, ny = (width + 1) // pitch, (height + 1) // pitch
    passable = np.zeros((height, width), dtype=bool)

    def carve(x0: int, y0: int, w: int, h: int) -> None:
        passable[y0:min(y0 + h, height), x0:min(x0 + w, width)] = True

    for cy in range(ny):
        for cx in range(nx):
            carve(cx * pitch, cy * pitch, corridor, corridor)
    seen = np.zeros((ny, nx), dtype=bool)
    stack = [(int(rng.integers(nx)), int(rng.integers(ny)))]
    seen[stack[0][1], stack[0][0]] = True
    while stack:
        cx, cy = stack[-1]
        options = [
            (cx + dx, cy + dy)
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
            if 0 <= cx + dx < nx and 0 <= cy + dy < ny and not seen[cy + dy, cx + dx]
        ]
        if not options:
            stack.pop()
            continue
        nxt = options[int(rng.integers(len(options)))]
        seen[nxt[1], nxt[0]] = True
        # open the wall between the two rooms
        x0, y0 = min(cx, nxt[0]) * pitch, min(cy, nxt[1]) * pitch
        if nxt[0] != cx:
            carve(x0 + corridor, y0, 1, corridor)
        else:
            carve(x0, y0 + corridor, corridor, 1)
        stack.append(nxt)
    return GridMap(passable, name=f"maze-{width}-{height}-{corridor}")


def sample_instance(
    grid: GridMap, n_agents: int, n_tasks: int, seed: int, agents_on_task_starts: bool = False, name: str = ""
) -> Scenario:
    """Distinct task endpoints, with agent starts on further distinct cells (or on the first task starts)."""
    rng = np.random.default_rng(seed)
    cells = sorted(largest_component(grid))
    needed = 2 * n_tasks + (0 if agents_on_task_starts else n_agents)
    if agents_on_task_starts and n_agents > n_tasks:
        raise ValueError("need at least one task per agent when agents start on task starts")
    if needed > len(cells):
        raise ValueError(f"map has {len(cells)} free cells, instance needs {needed}")
    picks = [cells[int(k)] for k in rng.choice(len(cells), size=needed, replace=False)]
    tasks = [(picks[2 * k], picks[2 * k + 1]) for k in range(n_tasks)]
    if agents_on_task_starts:
        starts = [tasks[k][0] for k in range(n_agents)]
    else:
        starts = picks[2 * n_tasks:]
    return Scenario(name or f"{grid.name}-seed{seed}", grid, starts, tasks, seed)


def from_scenario_entries(grid: GridMap, entries: list[ScenarioEntry], n_agents: int, n_tasks: int) -> Scenario:
    """Tasks in file order (skipping reused endpoints); agents sit on the first ``n_agents`` task starts."""
    tasks: list[tuple[Vertex, Vertex]] = []
    used: set[Vertex] = set()
    for e in entries:
        if len(tasks) == n_tasks:
            break
        if e.start in used or e.goal in used or e.start == e.goal:
            continue
        used |= {e.start, e.goal}
        tasks.append((e.start, e.goal))
    if len(tasks) < max(n_tasks, n_agents):
        raise ValueError(f"scenario yields only {len(tasks)} usable tasks")
    return Scenario(grid.name or "scen", grid, [t[0] for t in tasks[:n_agents]], tasks)


def dead_end_rooms(grid: GridMap, corridor: int = 2) -> list[tuple[list[Vertex], list[Vertex]]]:
    """Maze rooms with a single doorway, as ``(room cells, doorway cells)``."""
    pitch = corridor + 1
    out = []
    for y0 in range(0, grid.height, pitch):
        for x0 in range(0, grid.width, pitch):
            room = [(x0 + dx, y0 + dy) for dy in range(corridor) for dx in range(corridor)]
            if not all(grid.is_passable(v) for v in room):
                continue
            doors = sorted({u for v in room for u in neighbors(grid, v)} - set(room))
            sides = {(u[0] < x0, u[0] >= x0 + corridor, u[1] < y0, u[1] >= y0 + corridor) for u in doors}
            if len(sides) == 1:
                out.append((room, doors))
    return out


def dead_end_instance(seed: int, size: int = 32, corridor: int = 2, extra_tasks: int = 1) -> Scenario:
    """A maze whose dead-end room is narrowed to a one-cell-wide spur of three cells.

    Two agents park in the spur, and the spur's far end is a task goal. A
    priority planner that treats parked agents as fixed obstacles cannot
    deliver that task; a joint planner can move the parked agents aside.
    """
    rng = np.random.default_rng(seed)
    grid = maze(size, size, corridor=corridor, seed=seed)
    rooms = dead_end_rooms(grid, corridor)
    room, doors = rooms[int(rng.integers(len(rooms)))]
    mouth = doors[int(rng.integers(len(doors)))]
    inner = next(v for v in room if abs(v[0] - mouth[0]) + abs(v[1] - mouth[1]) == 1)
    end = (2 * inner[0] - mouth[0], 2 * inner[1] - mouth[1])
    spur = [mouth, inner, end]
    passable = grid.passable.copy()
    for x, y in set(room) | set(doors):
        passable[y, x] = (x, y) in spur
    grid = GridMap(passable, name=grid.name)
    free = [v for v in sorted(largest_component(grid)) if v not in spur]
    picks = [free[int(k)] for k in rng.choice(len(free), size=2 + 2 * extra_tasks, replace=False)]
    tasks = [(picks[1], end)] + [(picks[2 + 2 * k], picks[3 + 2 * k]) for k in range(extra_tasks)]
    starts = [picks[0], inner, mouth]
    return Scenario(f"dead-end-{seed}", grid, starts, tasks, seed, {"spur": spur})


def two_network_scenario() -> Scenario:
    """Two agents split around a wall block, lose contact, and later funnel into one exit corridor,
    while a second pair works on the far side."""
    rows = [
        "...............",
        ".#############.",
        ".#############.",
        ".#############.",
        ".#############.",
        ".#############.",
        ".#############.",
        "...............",
        "#######.#######",
        "#######.#######",
        "#######.#######",
        "#######.#######",
    ]
    grid = GridMap.from_strings(rows, name="two-networks")
    starts = [(6, 0), (8, 0)]
    tasks = [((5, 0), (7, 11)), ((9, 0), (7, 10))]
    return Scenario("two-networks", grid, starts, tasks)


def resting_agents_scenario(n_agents: int = 4) -> Scenario:
    """One moving agent passes two resting agents in turn; a fourth rests out of range."""
    grid = GridMap.open(30, 5)
    starts = [(0, 2), (3, 0), (12, 4)]
    if n_agents >= 4:
        starts.append((29, 4))
    tasks = [((1, 2), (20, 2))]
    return Scenario(f"resting-agents-{n_agents}", grid, starts, tasks)


def corridor_swap_scenario() -> Scenario:
    """Head-on swap along a corridor with one side pocket."""
    rows = [
        "#####.#####",
        "...........",
        "###########",
    ]
    grid = GridMap.from_strings(rows, name="corridor-swap")
    return Scenario("corridor-swap", grid, [(1, 1), (10, 1)], [((2, 1), (9, 1)), ((8, 1), (0, 1))])


def bottleneck_scenario() -> Scenario:
    """Three agents squeeze through a one-cell doorway between two rooms, two one way and one the other."""
    rows = [
        "....#....",
        "....#....",
        ".........",
        "....#....",
        "....#....",
    ]
    grid = GridMap.from_strings(rows, name="bottleneck")
    starts = [(0, 1), (0, 3), (8, 2)]
    tasks = [((1, 1), (7, 1)), ((1, 3), (7, 3)), ((7, 2), (1, 2))]
    return Scenario("bottleneck", grid, starts, tasks)


REGRESSION_SCENARIOS = {
    "two-networks": two_network_scenario,
    "resting-agents": resting_agents_scenario,
    "corridor-swap": corridor_swap_scenario,
    "bottleneck": bottleneck_scenario,
}
