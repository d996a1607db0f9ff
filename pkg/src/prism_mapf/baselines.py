"""Reference solvers: one-shot centralized CBS and Token Passing with Task Swaps."""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .cbs import DEFAULT_NODE_LIMIT, CBSStats, PlanningAgent, modified_cbs
from .engine import STALLED, SUCCESS, TIMEOUT, SimulationResult, TraceRow
from .env import GridMap, Vertex, manhattan, neighbor_list
from .lowlevel import Constraint, Path, plan_path
from .tasking import ConfigurationError

ILL_FORMED = "ill_formed"


@dataclass
class CBSSolution:
    paths: dict[int, Path]
    planning_time: float
    stats: CBSStats

    @property
    def sum_of_costs(self) -> int:
        return sum(p.cost for p in self.paths.values())


def centralized_cbs(
    grid: GridMap,
    starts: Mapping[int, Vertex],
    goals: Mapping[int, Vertex],
    node_limit: int = DEFAULT_NODE_LIMIT,
    deadline: float | None = None,
) -> CBSSolution | None:
    """Optimal sum-of-costs paths for a one-shot instance, or None on failure."""
    if set(starts) != set(goals):
        raise ValueError("starts and goals must name the same agents")
    if len(set(starts.values())) != len(starts) or len(set(goals.values())) != len(goals):
        raise ConfigurationError("starts and goals must be distinct")
    agents = [PlanningAgent(i, starts[i], goals[i]) for i in sorted(starts)]
    stats = CBSStats()
    t0 = time.perf_counter()
    plans = modified_cbs(agents, grid, 0, None, node_limit=node_limit, deadline=deadline, stats=stats)
    elapsed = time.perf_counter() - t0
    if plans is None:
        return None
    return CBSSolution({i: p.path for i, p in plans.items()}, elapsed, stats)


def reservation_constraints(paths: Iterable[tuple[int, Path]], clock: int) -> frozenset[Constraint]:
    """Turn reserved trajectories into constraints, including permanent rest at their last cell."""
    out = set()
    for owner, path in paths:
        end = max(path.end_time, clock)
        for t in range(clock, end):
            u, v = path.at(t), path.at(t + 1)
            if t > clock:
                out.add(Constraint(u, t, owner))
            if u != v:
                out.add(Constraint.edge(v, u, t, owner))
        out.add(Constraint(path.at(end), end if end > clock else clock + 1, owner, permanent=True))
    return frozenset(out)


@dataclass
class TptsToken:
    """Shared state only the current holder may change."""

    assignment: dict[int, int | None]
    reserved: dict[int, Path]
    plan_cost: int = 0
    queue: list[int] = field(default_factory=list)


@dataclass
class _TptsAgent:
    id: int
    position: Vertex
    task: int | None = None
    started: bool = False
    idle_since: int = 0


def _two_leg_path(grid, pos, start, goal, clock, constraints) -> Path | None:
    leg1 = plan_path(grid, pos, start, clock, constraints, rest_at_goal=False)
    if leg1 is None:
        return None
    leg2 = plan_path(grid, start, goal, leg1.end_time, constraints)
    if leg2 is None:
        return None
    return Path(clock, leg1.positions + leg2.positions[1:])


def _reachable(grid: GridMap, source: Vertex, walls: set[Vertex]) -> set[Vertex]:
    seen = {source}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in neighbor_list(grid, v):
            if u not in seen and u not in walls:
                seen.add(u)
                queue.append(u)
    return seen


def _last_move(traj: Sequence[Vertex]) -> int:
    t = len(traj) - 1
    while t > 0 and traj[t - 1] == traj[t]:
        t -= 1
    return t


def tpts_run(
    grid: GridMap,
    starts: Sequence[Vertex],
    tasks: Sequence[tuple[Vertex, Vertex]],
    max_ticks: int = 10_000,
    time_limit: float | None = None,
) -> SimulationResult:
    """Simulate token passing with task swaps; parked agents stay on their last cell.

    The run ends ``ill_formed`` once no agent moves and a full token round
    hands out nothing while tasks remain.
    """
    starts = list(starts)
    if len(set(starts)) != len(starts):
        raise ConfigurationError("agents must start on distinct cells")
    endpoints = [v for pair in tasks for v in pair]
    if len(set(endpoints)) != len(endpoints):
        raise ConfigurationError("task starts and goals must all be distinct")
    started_at = time.perf_counter()
    agents = {i: _TptsAgent(i, v) for i, v in enumerate(starts)}
    token = TptsToken({i: None for i in agents}, {i: Path.stay(v, 0) for i, v in enumerate(starts)})
    state = {m: "open" for m in range(len(tasks))}  # open -> taken -> started -> done
    owner: dict[int, int] = {}
    trajectories = {i: [v] for i, v in enumerate(starts)}
    trace: list[TraceRow] = []
    planning_time = 0.0
    clock = 0
    status = SUCCESS

    def others(i: int) -> list[tuple[int, Path]]:
        return [(j, p) for j, p in sorted(token.reserved.items()) if j != i]

    def endpoint_free(m: int, i: int) -> bool:
        ends = {p.goal for _, p in others(i)}
        s, g = tasks[m]
        return s not in ends and g not in ends

    def try_take(i: int) -> bool:
        """Holder ``i`` picks the nearest task it can plan for, stealing an unstarted one if closer."""
        a = agents[i]
        options = sorted(
            (m for m, st in state.items() if st in ("open", "taken") and endpoint_free(m, i)),
            key=lambda m: (manhattan(a.position, tasks[m][0]), m),
        )
        base = reservation_constraints(others(i), clock)
        # cells parked on for good from the next step: no path can use them
        walls = {c.vertex for c in base if c.permanent and c.time <= clock + 1} - {a.position}
        reach = _reachable(grid, a.position, walls)
        for m in options:
            if tasks[m][0] not in reach or tasks[m][1] not in _reachable(grid, tasks[m][0], walls):
                continue
            victim = owner.get(m) if state[m] == "taken" else None
            if victim == i:
                continue
            if victim is not None:
                if manhattan(agents[victim].position, tasks[m][0]) <= manhattan(a.position, tasks[m][0]):
                    continue
                saved = dict(token.reserved)
                token.reserved[victim] = Path.stay(agents[victim].position, clock)
            cstr = base if victim is None else reservation_constraints(others(i), clock)
            path = _two_leg_path(grid, a.position, tasks[m][0], tasks[m][1], clock, cstr)
            if path is None:
                if victim is not None:
                    token.reserved = saved
                continue
            old = a.task
            token.reserved[i] = path
            if victim is not None:
                agents[victim].task = None
                token.assignment[victim] = None
                if not _replan_victim(victim):
                    token.reserved = saved
                    agents[victim].task = m
                    token.assignment[victim] = m
                    continue
            if old is not None and state[old] == "taken" and owner.get(old) == i:
                state[old] = "open"
            a.task = m
            token.assignment[i] = m
            state[m] = "started" if a.position == tasks[m][0] else "taken"
            owner[m] = i
            token.plan_cost = sum(p.cost for p in token.reserved.values())
            return True
        return False

    def _replan_victim(j: int) -> bool:
        if try_take(j):
            return True
        cstr = reservation_constraints(others(j), clock)
        park = plan_path(grid, agents[j].position, agents[j].position, clock, cstr)
        if park is None:
            return False
        token.reserved[j] = park
        return True

    while True:
        if all(st == "done" for st in state.values()) and all(
            a.task is None and token.reserved[i].end_time <= clock for i, a in agents.items()
        ):
            break
        if clock >= max_ticks or (time_limit is not None and time.perf_counter() - started_at > time_limit):
            status = TIMEOUT
            break
        # token round: idle agents in request order
        t0 = time.perf_counter()
        token.queue = sorted(
            (i for i, a in agents.items() if a.task is None and token.reserved[i].end_time <= clock),
            key=lambda i: (agents[i].idle_since, i),
        )
        assigned = False
        for i in list(token.queue):
            if agents[i].task is None:
                assigned |= try_take(i)
        planning_time += time.perf_counter() - t0
        moving = any(token.reserved[i].end_time > clock for i in agents)
        if not assigned and not moving:
            status = ILL_FORMED
            break
        clock += 1
        for i in sorted(agents):
            a = agents[i]
            a.position = token.reserved[i].at(clock)
            trajectories[i].append(a.position)
            if a.task is not None:
                s, g = tasks[a.task]
                if a.position == s and state[a.task] == "taken":
                    state[a.task] = "started"
                if a.position == g and state[a.task] == "started" and token.reserved[i].end_time <= clock:
                    state[a.task] = "done"
                    a.task = None
                    token.assignment[i] = None
                    a.idle_since = clock
            trace.append(TraceRow(clock, i, a.position[0], a.position[1], 0, 0, 0))
    done = sum(1 for st in state.values() if st == "done")
    soc = sum(
        _last_move(trajectories[i]) if a.task is None and token.reserved[i].end_time <= clock else clock
        for i, a in agents.items()
    )
    return SimulationResult(
        status, soc, planning_time, clock, trajectories, trace,
        tasks_done=done, tasks_total=len(tasks), solver="tpts",
    )


__all__ = ["centralized_cbs", "tpts_run", "reservation_constraints", "CBSSolution", "TptsToken", "ILL_FORMED", "STALLED"]
