"""Mission/transition tasks and the nearest-start allocator with task swaps."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .env import Vertex, manhattan

MISSION = "mission"
TRANSITION = "transition"

UNASSIGNED, ASSIGNED, STARTED, DONE = "unassigned", "assigned", "started", "done"


class ConfigurationError(ValueError):
    """The task set or agent placement violates the problem's preconditions."""


@dataclass
class Task:
    id: int
    start: Vertex
    goal: Vertex
    kind: str = MISSION
    state: str = UNASSIGNED
    assignee: int | None = None
    mission_id: int | None = None  # for transitions: the mission they lead to

    def snapshot(self) -> "Task":
        return Task(self.id, self.start, self.goal, self.kind, self.state, self.assignee, self.mission_id)


def transition_to(mission: Task, position: Vertex, agent_id: int) -> Task:
    return Task(mission.id, position, mission.start, TRANSITION, ASSIGNED, agent_id, mission.id)


@dataclass
class AllocationState:
    missions: dict[int, Task]
    assignment: dict[int, int | None] = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Vertex, Vertex]], agent_ids: Iterable[int]) -> "AllocationState":
        missions = {i: Task(i, s, g) for i, (s, g) in enumerate(pairs)}
        endpoints = [v for t in missions.values() for v in (t.start, t.goal)]
        if len(set(endpoints)) != len(endpoints):
            raise ConfigurationError("task starts and goals must all be distinct")
        return cls(missions, {a: None for a in agent_ids})

    def ids_in(self, state: str) -> set[int]:
        return {i for i, t in self.missions.items() if t.state == state}

    @property
    def unstarted(self) -> set[int]:
        return {i for i, t in self.missions.items() if t.state in (UNASSIGNED, ASSIGNED)}

    @property
    def started(self) -> set[int]:
        return self.ids_in(STARTED)

    @property
    def done(self) -> set[int]:
        return self.ids_in(DONE)

    def pool(self) -> list[int]:
        return sorted(self.ids_in(UNASSIGNED))

    def all_done(self) -> bool:
        return all(t.state == DONE for t in self.missions.values())

    def assign(self, agent: int, mission_id: int | None) -> None:
        old = self.assignment.get(agent)
        if old is not None and self.missions[old].state == ASSIGNED:
            self.missions[old].state = UNASSIGNED
            self.missions[old].assignee = None
        self.assignment[agent] = mission_id
        if mission_id is not None:
            task = self.missions[mission_id]
            if task.state not in (UNASSIGNED, ASSIGNED):
                raise ValueError(f"task {mission_id} is already {task.state}")
            if task.assignee is not None and task.assignee != agent:
                self.assignment[task.assignee] = None
            task.state = ASSIGNED
            task.assignee = agent

    def mark_started(self, mission_id: int) -> None:
        self.missions[mission_id].state = STARTED

    def mark_done(self, mission_id: int) -> None:
        task = self.missions[mission_id]
        task.state = DONE
        self.assignment[task.assignee] = None


def _nearest(pool: list[int], missions: Mapping[int, Task], position: Vertex) -> int:
    return min(pool, key=lambda i: (manhattan(position, missions[i].start), i))


def allocate_tasks(
    state: AllocationState,
    requesters: Iterable[int],
    positions: Mapping[int, Vertex],
    swappable: Iterable[int] | None = None,
) -> set[int]:
    """Give requesters their nearest unassigned task, then swap unstarted tasks while that helps.

    ``positions`` maps every agent to its current cell. ``swappable`` limits
    which agents may take over or give up unstarted tasks (default: all
    agents in ``positions`` without a started task). Returns the agents whose
    mission assignment changed.
    """
    before = dict(state.assignment)
    missions = state.missions
    for agent in sorted(requesters):
        pool = state.pool()
        if state.assignment.get(agent) is None and pool:
            state.assign(agent, _nearest(pool, missions, positions[agent]))

    def estimate(agent: int, mission_id: int | None) -> int:
        return 0 if mission_id is None else manhattan(positions[agent], missions[mission_id].start)

    if swappable is None:
        swappable = positions
    candidates = sorted(
        a for a in swappable
        if state.assignment.get(a) is None or missions[state.assignment[a]].state == ASSIGNED
    )
    for _ in range(len(positions)):
        best = None
        for a in candidates:
            u = state.assignment.get(a)
            if u is None:
                continue
            for b in candidates:
                if b == a:
                    continue
                w = state.assignment.get(b)
                gain = estimate(a, u) + estimate(b, w) - estimate(b, u) - estimate(a, w)
                if gain > 0 and (best is None or gain > best[0]):
                    best = (gain, a, b)
        if best is None:
            break
        _, a, b = best
        u, w = state.assignment[a], state.assignment.get(b)
        state.assignment[a] = None
        missions[u].assignee = None
        missions[u].state = UNASSIGNED
        if w is not None:
            state.assignment[b] = None
            missions[w].assignee = None
            missions[w].state = UNASSIGNED
        state.assign(b, u)
        if w is not None:
            state.assign(a, w)
        elif state.pool():
            state.assign(a, _nearest(state.pool(), missions, positions[a]))
    return {a for a in set(before) | set(state.assignment) if before.get(a) != state.assignment.get(a)}


def on_task_complete(state: AllocationState, task: Task) -> Task | None:
    """Advance after ``task`` reached its goal: a transition yields its mission, a mission yields None."""
    if task.kind == TRANSITION:
        mission = state.missions[task.mission_id]
        state.mark_started(mission.id)
        return mission
    state.mark_done(task.id)
    return None
