"""Info packets: snapshots of agents that left communication range.

A bounded packet lives until its flush time; an infinite packet records a
resting agent's cell and lives until its holder's task changes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .env import GridMap, Vertex
from .lowlevel import Constraint, PlanRecord, plan_path
from .tasking import Task

INFINITE = math.inf


@dataclass(frozen=True)
class InfoPacket:
    subject_id: int
    task: Task | None
    plan: PlanRecord
    position: Vertex
    t_receive: int
    t_flush: float

    @property
    def constraints(self) -> frozenset[Constraint]:
        return self.plan.constraints

    @property
    def infinite(self) -> bool:
        return self.t_flush == INFINITE


@dataclass(frozen=True)
class AgentView:
    """What packet creation needs to know about one agent."""

    id: int
    position: Vertex
    at_rest: bool
    constraints: frozenset[Constraint]
    plan: PlanRecord
    task: Task | None = None


def calculate_flush_time(cstr_i: Iterable[Constraint], cstr_j: Iterable[Constraint], id_i: int, id_j: int) -> int:
    """Latest time at which either agent was constrained because of the other (0 if never)."""
    times = [c.time for c in cstr_i if c.source == id_j]
    times += [c.time for c in cstr_j if c.source == id_i]
    return max(times, default=0)


def make_packet(subject: AgentView, t_current: int, t_flush: float) -> InfoPacket:
    task = subject.task.snapshot() if subject.task is not None else None
    return InfoPacket(subject.id, task, subject.plan, subject.position, t_current, t_flush)


def create_packets_on_separation(
    departed: AgentView, remaining: AgentView, t_current: int
) -> list[tuple[int, InfoPacket]]:
    """Packets to hand out when two former network mates lose contact, as ``(holder id, packet)``.

    This does not check the holder's alternative path; see
    :func:`verify_alternative_path`.
    """
    if departed.at_rest and remaining.at_rest:
        return []
    if departed.at_rest or remaining.at_rest:
        mover, rester = (remaining, departed) if departed.at_rest else (departed, remaining)
        return [(mover.id, make_packet(rester, t_current, INFINITE))]
    t_flush = calculate_flush_time(departed.constraints, remaining.constraints, departed.id, remaining.id)
    if t_flush > t_current:
        return [
            (departed.id, make_packet(remaining, t_current, t_flush)),
            (remaining.id, make_packet(departed, t_current, t_flush)),
        ]
    return []


def verify_alternative_path(
    grid: GridMap,
    position: Vertex,
    goal: Vertex,
    resting_position: Vertex,
    held: Iterable[InfoPacket] = (),
) -> bool:
    """Can the holder still reach ``goal`` with the resting agent (and its other infinite packets) as walls?"""
    blocked = {resting_position} | {p.position for p in held if p.infinite}
    if position in blocked or goal in blocked:
        return False
    return plan_path(grid, position, goal, 0, (), blocked, rest_at_goal=False) is not None


def flush_expired(packets: Mapping[int, InfoPacket], t_current: int) -> dict[int, InfoPacket]:
    return {s: p for s, p in packets.items() if p.infinite or p.t_flush > t_current}


def flush_on_task_change(packets: Mapping[int, InfoPacket]) -> dict[int, InfoPacket]:
    return {}


def synchronize(
    network_members: Iterable[int], held: Iterable[tuple[int, InfoPacket]]
) -> dict[int, InfoPacket]:
    """Merge the network's bounded packets: newest per subject, none about members.

    ``held`` yields ``(holder id, packet)``; equal receive times keep the
    packet from the lower holder id.
    """
    members = set(network_members)
    best: dict[int, tuple[int, int, InfoPacket]] = {}
    for holder, p in sorted(held, key=lambda hp: hp[0]):
        if p.subject_id in members or p.infinite:
            continue
        cur = best.get(p.subject_id)
        if cur is None or p.t_receive > cur[0]:
            best[p.subject_id] = (p.t_receive, holder, p)
    return {s: best[s][2] for s in sorted(best)}
