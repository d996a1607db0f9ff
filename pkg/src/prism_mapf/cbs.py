"""Conflict-based search over a local network, with info packets as virtual agents.

Virtual agents replay the path their packet describes and are never
constrained: a conflict with one spawns a single child that constrains the
network agent only. Conflicts between two virtual agents are ignored.
"""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .env import GridMap, Vertex
from .lowlevel import Constraint, Path, PlanRecord, plan_path

DEFAULT_NODE_LIMIT = 50_000


@dataclass(frozen=True)
class Conflict:
    """Vertex conflict, or edge conflict where ``a`` moves ``vertex -> to`` and ``b`` moves back."""

    kind: str
    a: int
    b: int
    vertex: Vertex
    time: int
    to: Vertex | None = None

    @property
    def agents(self) -> tuple[int, int]:
        return (self.a, self.b)


@dataclass
class PlanningAgent:
    """One network agent as seen by the planner.

    ``path`` is the agent's current plan (the root of the conflict tree); when
    None an unconstrained-by-history plan is computed from ``constraints``.
    """

    id: int
    start: Vertex
    goal: Vertex
    path: Path | None = None
    constraints: frozenset[Constraint] = frozenset()
    obstacles: frozenset[Vertex] = frozenset()


@dataclass(frozen=True)
class AgentPlan:
    path: Path
    constraints: frozenset[Constraint]
    replanned: bool


@dataclass
class CBSStats:
    expanded: int = 0
    generated: int = 0
    low_level_calls: int = 0
    failure: str | None = None


@dataclass
class _Node:
    constraints: dict[int, frozenset[Constraint]]
    plans: dict[int, Path]
    cost: int
    replanned: frozenset[int] = field(default_factory=frozenset)
    # constraints each current path was planned with; differs from ``constraints`` after a bypass
    record: dict[int, frozenset[Constraint]] = field(default_factory=dict)
    conflicts: int = 0


def _conflict_scan(plans: Mapping[int, Path], virtual: frozenset[int], first_only: bool):
    ids = sorted(plans)
    if len(ids) < 2:
        return None if first_only else 0
    paths = [plans[i] for i in ids]
    t0 = max(p.start_time for p in paths)
    span = max(p.end_time for p in paths) - t0 + 1
    tracks = []
    for p in paths:
        seq = list(p.positions[t0 - p.start_time:])
        seq.extend([p.positions[-1]] * (span - len(seq)))
        tracks.append(seq)
    n = len(ids)
    count = 0
    for k in range(span):
        column = [tr[k] for tr in tracks]
        if len(set(column)) < n:
            best = None
            for x in range(n):
                for y in range(x + 1, n):
                    if column[x] != column[y] or (ids[x] in virtual and ids[y] in virtual):
                        continue
                    if not first_only:
                        count += 1
                    elif best is None or (ids[x], ids[y]) < best:
                        best = (ids[x], ids[y])
                        where = column[x]
            if best is not None:
                return Conflict("vertex", best[0], best[1], where, t0 + k)
        if k == span - 1:
            break
        nxt = [tr[k + 1] for tr in tracks]
        moved = {(column[x], nxt[x]): x for x in range(n) if column[x] != nxt[x]}
        best = None
        for (u, w), x in moved.items():
            y = moved.get((w, u))
            if y is None or x >= y or (ids[x] in virtual and ids[y] in virtual):
                continue
            if not first_only:
                count += 1
            elif best is None or (ids[x], ids[y]) < best[0]:
                best = ((ids[x], ids[y]), u, w)
        if best is not None:
            (a, b), u, w = best
            return Conflict("edge", a, b, u, t0 + k, w)
    return None if first_only else count


def _resting(path: Path, conflict: Conflict) -> bool:
    return conflict.time >= path.end_time and path.goal == conflict.vertex


def detect_first_conflict(plans: Mapping[int, Path], virtual: Iterable[int] = ()) -> Conflict | None:
    """Earliest conflict among ``plans``; agents rest on their last cell after their path ends.

    Ties at one timestep: vertex conflicts before edge conflicts, then the
    lexicographically smallest participant pair. Pairs of two ``virtual``
    agents are never reported.
    """
    return _conflict_scan(plans, frozenset(virtual), True)


def count_conflicts(plans: Mapping[int, Path], virtual: Iterable[int] = ()) -> int:
    return _conflict_scan(plans, frozenset(virtual), False)


def expand_packet_path(packet, grid: GridMap) -> Path:
    """Rebuild the path a packet's subject was following."""
    path = packet.plan.replay(grid)
    if path is None:
        raise RuntimeError(f"packet for agent {packet.subject_id} does not replay to a path")
    return path


def default_horizon(grid: GridMap, n_agents: int, constraints: Iterable[Constraint] = ()) -> int:
    last = max((c.time for c in constraints), default=0)
    return grid.num_passable * max(1, n_agents) + last + 1


def modified_cbs(
    agents: Iterable[PlanningAgent],
    grid: GridMap,
    clock: int = 0,
    packets: Mapping[int, object] | None = None,
    *,
    node_limit: int = DEFAULT_NODE_LIMIT,
    deadline: float | None = None,
    stats: CBSStats | None = None,
    greedy: bool = False,
    target_reasoning: bool = True,
    bypass: bool = True,
) -> dict[int, AgentPlan] | None:
    """Plan conflict-free paths for ``agents`` from time ``clock``.

    With ``greedy`` the open list is ordered by conflict count before cost,
    which gives up optimality but escapes corridor conflicts much faster.
    With ``target_reasoning`` a vertex conflict on a cell where one agent
    already rests for good splits into "the other never enters it again" and
    "the resting agent settles there only later"; this keeps optimality and
    removes long chains of one-step displacements.
    With ``bypass`` a child path of unchanged cost that lowers the conflict
    count replaces the parent's path instead of branching (also optimal).

    ``packets`` maps a subject agent id to its info packet; each one becomes a
    virtual agent with a fixed path. Returns a plan per network agent, or None
    when the conflict tree is exhausted, the node budget is spent, or the
    wall-clock ``deadline`` (a ``time.perf_counter`` value) passes.
    """
    stats = stats if stats is not None else CBSStats()
    agents = sorted(agents, key=lambda a: a.id)
    by_id = {a.id: a for a in agents}
    packets = dict(packets or {})
    if set(packets) & set(by_id):
        raise ValueError("packet subjects must not be network agents")

    virtual: dict[int, Path] = {sid: expand_packet_path(p, grid).since(clock) for sid, p in sorted(packets.items())}
    virtual_ids = frozenset(virtual)
    all_constraints = [c for a in agents for c in a.constraints]
    all_constraints += [c for p in packets.values() for c in p.plan.constraints]
    horizon = default_horizon(grid, len(agents) + len(virtual), all_constraints)

    def low_level(agent: PlanningAgent, constraints: frozenset[Constraint]) -> Path | None:
        stats.low_level_calls += 1
        obstacles = agent.obstacles - {agent.start, agent.goal}
        return plan_path(grid, agent.start, agent.goal, clock, constraints, obstacles, horizon)

    root_plans: dict[int, Path] = {}
    root_replanned = set()
    for a in agents:
        if a.path is not None:
            path = a.path.since(clock)
            if path.at(clock) != a.start:
                raise ValueError(f"agent {a.id}: current path is not at {a.start} at time {clock}")
        else:
            path = low_level(a, a.constraints)
            if path is None:
                stats.failure = "root infeasible"
                return None
            root_replanned.add(a.id)
        root_plans[a.id] = path

    def all_plans(node: _Node) -> dict[int, Path]:
        return {**node.plans, **virtual}

    root = _Node(
        {a.id: frozenset(a.constraints) for a in agents},
        root_plans,
        sum(p.cost for p in root_plans.values()),
        frozenset(root_replanned),
    )
    seq = itertools.count()

    def key(node: _Node) -> tuple:
        node.conflicts = n = count_conflicts(all_plans(node), virtual_ids)
        return (n, node.cost, next(seq)) if greedy else (node.cost, n, next(seq))

    def branch_constraint(conflict: Conflict, me: int, other: int, plans: dict[int, Path]) -> Constraint:
        if conflict.kind == "vertex":
            if other in virtual and _resting(plans[other], conflict) and not target_reasoning:
                return Constraint(conflict.vertex, max(virtual[other].end_time, clock + 1), other, permanent=True)
            if target_reasoning and _resting(plans[other], conflict):
                # the other agent sits here for good from this time on
                start = max(virtual[other].end_time, clock + 1) if other in virtual else conflict.time
                return Constraint(conflict.vertex, start, other, permanent=True)
            if target_reasoning and _resting(plans[me], conflict):
                # or this agent has to arrive for good only afterwards
                return Constraint(conflict.vertex, conflict.time, other, final=True)
            return Constraint(conflict.vertex, conflict.time, other)
        if me == conflict.a:
            return Constraint.edge(conflict.vertex, conflict.to, conflict.time, other)
        return Constraint.edge(conflict.to, conflict.vertex, conflict.time, other)

    def expand(node: _Node) -> list[_Node] | None:
        """Children of ``node``, or None when it is conflict-free; bypasses edit ``node`` in place."""
        while True:
            plans = all_plans(node)
            conflict = detect_first_conflict(plans, virtual_ids)
            if conflict is None:
                return None
            children = []
            bypassed = False
            for me, other in ((conflict.a, conflict.b), (conflict.b, conflict.a)):
                if me in virtual:
                    continue
                constraints = node.constraints[me] | {branch_constraint(conflict, me, other, plans)}
                path = low_level(by_id[me], constraints)
                if path is None:
                    continue
                child_plans = dict(node.plans)
                child_plans[me] = path
                if bypass and path.cost == node.plans[me].cost:
                    n = count_conflicts({**child_plans, **virtual}, virtual_ids)
                    if n < node.conflicts:
                        # same cost, fewer conflicts: keep the path without the extra branch constraint
                        node.plans = child_plans
                        node.record = {**node.record, me: constraints}
                        node.replanned = node.replanned | {me}
                        node.conflicts = n
                        bypassed = True
                        break
                children.append(_Node(
                    {**node.constraints, me: constraints},
                    child_plans,
                    node.cost - node.plans[me].cost + path.cost,
                    node.replanned | {me},
                    {**node.record, me: constraints},
                ))
            if not bypassed:
                return children

    open_list = [(*key(root), root)]
    stats.generated += 1
    while open_list:
        if stats.expanded >= node_limit:
            stats.failure = "node limit"
            return None
        if deadline is not None and time.perf_counter() > deadline:
            stats.failure = "deadline"
            return None
        _, _, _, node = heapq.heappop(open_list)
        stats.expanded += 1
        children = expand(node)
        if children is None:
            return {
                i: AgentPlan(node.plans[i], node.record.get(i, node.constraints[i]), i in node.replanned)
                for i in sorted(node.plans)
            }
        for child in children:
            stats.generated += 1
            heapq.heappush(open_list, (*key(child), child))
    stats.failure = "conflict tree exhausted"
    return None


def plan_record(agent: PlanningAgent, plan: AgentPlan, clock: int) -> PlanRecord:
    """Inputs that reproduce ``plan.path`` for an agent replanned at ``clock``."""
    return PlanRecord(agent.start, clock, agent.goal, plan.constraints, agent.obstacles - {agent.start, agent.goal})
