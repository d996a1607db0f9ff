"""The online planning loop: step, update networks and packets, replan marked networks."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .cbs import DEFAULT_NODE_LIMIT, CBSStats, PlanningAgent, modified_cbs
from .comms import CommsConfig, NetworkPartition, compute_networks
from .env import GridMap, Vertex
from .lowlevel import Path, PlanRecord, plan_path
from .packets import (
    AgentView,
    InfoPacket,
    create_packets_on_separation,
    flush_expired,
    synchronize,
    verify_alternative_path,
)
from .tasking import (
    MISSION,
    AllocationState,
    ConfigurationError,
    Task,
    allocate_tasks,
    on_task_complete,
    transition_to,
)

SUCCESS, TIMEOUT, STALLED = "success", "timeout", "stalled"


@dataclass
class AgentState:
    id: int
    position: Vertex
    home: Vertex
    path: Path
    plan: PlanRecord
    task: Task | None = None
    constraints: frozenset = frozenset()
    packets: dict[int, InfoPacket] = field(default_factory=dict)
    task_changed: bool = False
    needs_plan: bool = False
    resting: bool = True
    rest_since: int = 0

    @property
    def objective(self) -> Vertex:
        return self.task.goal if self.task is not None else self.home

    def at_rest(self, clock: int) -> bool:
        return self.task is None and self.position == self.home and self.path.end_time <= clock

    def infinite_packets(self) -> list[InfoPacket]:
        return [p for p in self.packets.values() if p.infinite]

    def view(self, clock: int) -> AgentView:
        return AgentView(self.id, self.position, self.at_rest(clock), self.constraints, self.plan, self.task)


@dataclass
class EngineOptions:
    node_limit: int = 10_000
    # when optimal search runs out of nodes, retry ordering by conflict count
    greedy_fallback: bool = True
    greedy_node_limit: int = DEFAULT_NODE_LIMIT
    stall_limit: int | None = None  # consecutive ticks with a failed plan; default 4 * |V|
    deadline: float | None = None  # time.perf_counter() value


@dataclass
class TraceRow:
    tick: int
    agent: int
    x: int
    y: int
    network: int
    bounded: int
    infinite: int


@dataclass
class WorldState:
    grid: GridMap
    comms: CommsConfig
    agents: dict[int, AgentState]
    tasks: AllocationState
    clock: int = 0
    partition: NetworkPartition = field(default_factory=NetworkPartition)
    previous: NetworkPartition = field(default_factory=NetworkPartition)
    options: EngineOptions = field(default_factory=EngineOptions)
    planning_time: float = 0.0
    allocation_time: float = 0.0
    cbs_calls: int = 0
    cbs_failures: int = 0
    stalled_ticks: int = 0
    trajectories: dict[int, list[Vertex]] = field(default_factory=dict)
    trace: list[TraceRow] = field(default_factory=list)
    events: list[tuple] = field(default_factory=list)

    def positions(self) -> dict[int, Vertex]:
        return {i: a.position for i, a in sorted(self.agents.items())}

    def finished(self) -> bool:
        return self.tasks.all_done() and all(a.at_rest(self.clock) for a in self.agents.values())

    def packet_invariant_errors(self) -> list[str]:
        errors = []
        cap = max(0, len(self.agents) - 2)
        for a in self.agents.values():
            for p in a.packets.values():
                if p.subject_id == a.id:
                    errors.append(f"agent {a.id} holds a packet about itself")
                if not p.infinite and p.t_flush <= self.clock:
                    errors.append(f"agent {a.id} holds expired packet on {p.subject_id}")
            inf = a.infinite_packets()
            if inf and a.at_rest(self.clock):
                errors.append(f"resting agent {a.id} holds infinite packets")
            if len(inf) > cap:
                errors.append(f"agent {a.id} holds {len(inf)} infinite packets (cap {cap})")
        return errors


def _assign_task(world: WorldState, agent: AgentState, mission_id: int | None) -> None:
    if mission_id is None:
        agent.task = None
    else:
        mission = world.tasks.missions[mission_id]
        if agent.position == mission.start:
            world.tasks.mark_started(mission_id)
            agent.task = mission
        else:
            agent.task = transition_to(mission, agent.position, agent.id)
    _task_changed(agent)


def _task_changed(agent: AgentState) -> None:
    agent.task_changed = True
    agent.packets = {}
    agent.constraints = frozenset()


def initialize_plans(
    grid: GridMap,
    starts: Sequence[Vertex],
    tasks: Iterable[tuple[Vertex, Vertex]],
    comms: CommsConfig | None = None,
    options: EngineOptions | None = None,
) -> WorldState:
    """Allocate tasks, give every agent a constraint-free path, and plan each network once at t=0."""
    starts = list(starts)
    if len(set(starts)) != len(starts):
        raise ConfigurationError("agents must start on distinct cells")
    for v in starts:
        if not grid.is_passable(v):
            raise ConfigurationError(f"agent start {v} is not passable")
    allocation = AllocationState.from_pairs(tasks, range(len(starts)))
    goals = {t.goal for t in allocation.missions.values()}
    for t in allocation.missions.values():
        if not grid.is_passable(t.start) or not grid.is_passable(t.goal):
            raise ConfigurationError(f"task {t.id} has an endpoint on an obstacle")
    if goals & set(starts):
        raise ConfigurationError("agents may not start on a task goal")
    # any agent may be handed any task, so everything has to share one component
    reach = grid.distances_from(starts[0]) if starts else {}
    for v in [*starts, *(u for t in allocation.missions.values() for u in (t.start, t.goal))]:
        if v not in reach:
            raise ConfigurationError(f"{v} is not connected to the other agents and tasks")
    agents = {
        i: AgentState(i, v, v, Path.stay(v, 0), PlanRecord.hold(v, 0))
        for i, v in enumerate(starts)
    }
    world = WorldState(grid, comms or CommsConfig(), agents, allocation, options=options or EngineOptions())
    if world.options.stall_limit is None:
        world.options.stall_limit = 4 * grid.num_passable
    t0 = time.perf_counter()
    allocate_tasks(allocation, sorted(agents), world.positions())
    world.allocation_time += time.perf_counter() - t0
    t0 = time.perf_counter()
    for i, agent in agents.items():
        _assign_task(world, agent, allocation.assignment[i])
        agent.resting = agent.at_rest(0)
        path = plan_path(grid, agent.position, agent.objective, 0)
        if path is None:
            raise ConfigurationError(f"agent {i} cannot reach {agent.objective}")
        agent.path = path
        agent.plan = PlanRecord(agent.position, 0, agent.objective)
    world.planning_time += time.perf_counter() - t0
    world.trajectories = {i: [a.position] for i, a in agents.items()}
    world.partition = compute_networks(world.positions().items(), world.comms, grid)
    world.previous = world.partition
    _plan_phase(world, set(world.partition.networks))
    for agent in agents.values():
        agent.task_changed = False
    return world


def _root_path(world: WorldState, agent: AgentState, obstacles: frozenset[Vertex]) -> None:
    """Make sure the agent's current path starts now and heads for its objective."""
    clock = world.clock
    goal = agent.objective
    if agent.path.goal == goal and agent.path.at(clock) == agent.position and not agent.needs_plan:
        return
    path = plan_path(world.grid, agent.position, goal, clock, agent.constraints, obstacles)
    if path is None:
        agent.path = Path.stay(agent.position, clock)
        agent.plan = PlanRecord.hold(agent.position, clock)
    else:
        agent.path = path
        agent.plan = PlanRecord(agent.position, clock, goal, agent.constraints, obstacles)


def _obstacles(world: WorldState, agent: AgentState) -> frozenset[Vertex]:
    cells = frozenset(p.position for p in agent.infinite_packets()) - {agent.position, agent.objective}
    if cells and plan_path(world.grid, agent.position, agent.objective, 0, (), cells, rest_at_goal=False) is None:
        # stale resting-agent snapshots wall the agent in; forget them
        agent.packets = {s: p for s, p in agent.packets.items() if not p.infinite}
        world.events.append((world.clock, "drop_infinite", agent.id))
        return frozenset()
    return cells


def _plan_phase(world: WorldState, marked: set[int]) -> bool:
    """Replan each marked network; returns False if any network failed."""
    started = time.perf_counter()
    try:
        return _plan_networks(world, marked)
    finally:
        world.planning_time += time.perf_counter() - started


def _plan_networks(world: WorldState, marked: set[int]) -> bool:
    ok = True
    clock = world.clock
    for nid in sorted(marked):
        members = sorted(world.partition.networks[nid])
        held = [(a, p) for a in members for p in world.agents[a].packets.values()]
        virtual = synchronize(members, held)
        planning = []
        for a in members:
            agent = world.agents[a]
            # past constraints no longer bind; a permanent one lasts only while its source is still simulated
            agent.constraints = frozenset(
                c for c in agent.constraints
                if (c.permanent and c.source in virtual) or (not c.permanent and c.time >= clock)
            )
            obstacles = _obstacles(world, agent)
            _root_path(world, agent, obstacles)
            planning.append(
                PlanningAgent(a, agent.position, agent.objective, agent.path, agent.constraints, obstacles)
            )
        stats = CBSStats()
        result = modified_cbs(
            planning,
            world.grid,
            clock,
            virtual,
            node_limit=world.options.node_limit,
            deadline=world.options.deadline,
            stats=stats,
        )
        if result is None and stats.failure == "node limit" and world.options.greedy_fallback:
            world.events.append((clock, "greedy_fallback", nid))
            stats = CBSStats()
            result = modified_cbs(
                planning,
                world.grid,
                clock,
                virtual,
                node_limit=world.options.greedy_node_limit,
                deadline=world.options.deadline,
                stats=stats,
                greedy=True,
            )
        world.cbs_calls += 1
        if result is None:
            ok = False
            world.cbs_failures += 1
            world.events.append((clock, "cbs_failure", nid, stats.failure))
            for a in members:
                agent = world.agents[a]
                agent.path = Path.stay(agent.position, clock)
                agent.plan = PlanRecord.hold(agent.position, clock)
                agent.needs_plan = True
            continue
        for pa in planning:
            agent = world.agents[pa.id]
            plan = result[pa.id]
            agent.path = plan.path
            agent.constraints = plan.constraints
            agent.needs_plan = False
            if plan.replanned:
                agent.plan = PlanRecord(pa.start, clock, pa.goal, plan.constraints, pa.obstacles - {pa.start, pa.goal})
    return ok


def tick(world: WorldState) -> WorldState:
    grid, agents = world.grid, world.agents
    order = sorted(agents)

    # step
    world.previous = world.partition
    world.clock += 1
    clock = world.clock
    for i in order:
        agent = agents[i]
        agent.position = agent.path.at(clock)
        world.trajectories[i].append(agent.position)
    requesters = []
    for i in order:
        agent = agents[i]
        task = agent.task
        if task is not None and agent.position == task.goal and agent.path.end_time <= clock:
            nxt = on_task_complete(world.tasks, task)
            if nxt is None:
                agent.home = agent.position
                requesters.append(i)
                world.events.append((clock, "mission_done", i, task.id))
            agent.task = nxt
            _task_changed(agent)
        else:
            agent.packets = flush_expired(agent.packets, clock)
    if requesters:
        t0 = time.perf_counter()
        swappable = [i for i in order if agents[i].task is None or agents[i].task.kind != MISSION]
        changed = allocate_tasks(world.tasks, requesters, world.positions(), swappable)
        world.allocation_time += time.perf_counter() - t0
        for i in sorted(changed | set(requesters)):
            if i in changed or agents[i].task is None:
                _assign_task(world, agents[i], world.tasks.assignment.get(i))

    # update
    world.partition = compute_networks(world.positions().items(), world.comms, grid)
    marked: set[int] = set()
    n_agents = len(agents)
    pairs = set()
    for i in order:
        members = world.partition.members(i)
        agent = agents[i]
        agent.packets = {s: p for s, p in agent.packets.items() if s not in members}
        before = world.previous.members(i)
        if before != members:
            marked.add(world.partition.membership[i])
            for j in before - members:
                pairs.add((min(i, j), max(i, j)))
    for i, j in sorted(pairs):
        for holder_id, packet in create_packets_on_separation(agents[i].view(clock), agents[j].view(clock), clock):
            holder = agents[holder_id]
            if packet.infinite:
                others = [p for p in holder.infinite_packets() if p.subject_id != packet.subject_id]
                if len(others) >= n_agents - 2:
                    continue
                if not verify_alternative_path(grid, holder.position, holder.objective, packet.position, others):
                    world.events.append((clock, "no_alternative", holder_id, packet.subject_id))
                    continue
            holder.packets[packet.subject_id] = packet
            world.events.append((clock, "packet", holder_id, packet.subject_id, packet.t_flush))
    for i in order:
        agent = agents[i]
        if agent.task_changed or agent.needs_plan or (
            agent.path.end_time <= clock and agent.position != agent.objective
        ):
            marked.add(world.partition.membership[i])

    # plan
    ok = _plan_phase(world, marked)
    world.stalled_ticks = 0 if ok else world.stalled_ticks + 1

    for i in order:
        agent = agents[i]
        agent.task_changed = False
        resting = agent.at_rest(clock)
        if resting and not agent.resting:
            agent.rest_since = clock
            agent.packets = {}
        agent.resting = resting
        bounded = sum(1 for p in agent.packets.values() if not p.infinite)
        world.trace.append(
            TraceRow(clock, i, agent.position[0], agent.position[1], world.partition.membership[i], bounded,
                     len(agent.packets) - bounded)
        )
    return world


@dataclass
class SimulationResult:
    status: str
    sum_of_costs: int
    planning_time: float
    ticks: int
    trajectories: dict[int, list[Vertex]]
    trace: list[TraceRow]
    cbs_calls: int = 0
    cbs_failures: int = 0
    allocation_time: float = 0.0
    tasks_done: int = 0
    tasks_total: int = 0
    seed: int | None = None
    solver: str = "prism"

    def record(self) -> dict:
        """Deterministic summary (no wall-clock fields)."""
        return {
            "solver": self.solver,
            "status": self.status,
            "sum_of_costs": self.sum_of_costs,
            "ticks": self.ticks,
            "tasks_done": self.tasks_done,
            "tasks_total": self.tasks_total,
            "cbs_calls": self.cbs_calls,
            "cbs_failures": self.cbs_failures,
            "seed": self.seed,
        }


def sum_of_costs(world: WorldState) -> int:
    total = 0
    for agent in world.agents.values():
        total += agent.rest_since if agent.at_rest(world.clock) else world.clock
    return total


def run(
    world: WorldState,
    max_ticks: int = 10_000,
    time_limit: float | None = None,
    on_tick: Callable[[WorldState], None] | None = None,
) -> SimulationResult:
    """Tick until every task is done and every agent rests, or a limit trips.

    ``on_tick`` sees the world after every tick (for checks and logging).
    """
    started = time.perf_counter()
    if time_limit is not None:
        world.options.deadline = started + time_limit
    status = SUCCESS
    while not world.finished():
        if world.clock >= max_ticks:
            status = TIMEOUT
            break
        if time_limit is not None and time.perf_counter() - started > time_limit:
            status = TIMEOUT
            break
        if world.stalled_ticks >= world.options.stall_limit:
            status = STALLED
            break
        tick(world)
        if on_tick is not None:
            on_tick(world)
    if status == SUCCESS and not world.finished():
        status = TIMEOUT
    return SimulationResult(
        status,
        sum_of_costs(world),
        world.planning_time,
        world.clock,
        world.trajectories,
        world.trace,
        world.cbs_calls,
        world.cbs_failures,
        world.allocation_time,
        len(world.tasks.done),
        len(world.tasks.missions),
    )


def replay_conflicts(trajectories: dict[int, Sequence[Vertex]]) -> list[tuple]:
    """Vertex and edge collisions in executed trajectories, as ``(kind, t, a, b)``."""
    ids = sorted(trajectories)
    if not ids:
        return []
    horizon = max(len(t) for t in trajectories.values())

    def at(i: int, t: int) -> Vertex:
        traj = trajectories[i]
        return traj[min(t, len(traj) - 1)]

    found = []
    for t in range(horizon):
        seen: dict[Vertex, int] = {}
        for i in ids:
            v = at(i, t)
            if v in seen:
                found.append(("vertex", t, seen[v], i))
            else:
                seen[v] = i
        if t + 1 < horizon:
            moves = {(at(i, t), at(i, t + 1)): i for i in ids if at(i, t) != at(i, t + 1)}
            for (u, w), i in moves.items():
                j = moves.get((w, u))
                if j is not None and i < j:
                    found.append(("edge", t, i, j))
    return found
