import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prism_mapf.cbs import (
    CBSStats,
    Conflict,
    PlanningAgent,
    count_conflicts,
    detect_first_conflict,
    modified_cbs,
    plan_record,
)
from prism_mapf.env import GridMap
from prism_mapf.lowlevel import Constraint, Path, PlanRecord, violations
from prism_mapf.packets import InfoPacket

from oracles import collisions, joint_optimal_soc, valid_moves
from strategies import seeded_instance


def agents_for(starts, goals):
    return [PlanningAgent(i, s, g) for i, (s, g) in enumerate(zip(starts, goals))]


def soc(plans):
    return sum(p.path.cost for p in plans.values())


def trajectories(plans, horizon):
    return {i: [p.path.at(t) for t in range(horizon + 1)] for i, p in plans.items()}


def test_first_conflict_is_earliest_vertex_then_lowest_pair():
    plans = {
        0: Path(0, ((0, 0), (1, 0))),
        1: Path(0, ((2, 0), (1, 0))),
        2: Path(0, ((1, 1), (1, 0))),
    }
    assert detect_first_conflict(plans) == Conflict("vertex", 0, 1, (1, 0), 1)
    assert count_conflicts(plans) == 3


def test_edge_conflict_and_resting_agents():
    swap = {0: Path(0, ((0, 0), (1, 0))), 1: Path(0, ((1, 0), (0, 0)))}
    assert detect_first_conflict(swap) == Conflict("edge", 0, 1, (0, 0), 0, (1, 0))
    # agent 0 finished early and rests where agent 1 passes later
    rest = {0: Path(0, ((0, 0),)), 1: Path(0, ((2, 0), (1, 0), (0, 0), (0, 1)))}
    assert detect_first_conflict(rest) == Conflict("vertex", 0, 1, (0, 0), 2)


def test_virtual_pairs_are_ignored():
    plans = {0: Path(0, ((0, 0),)), 1: Path(0, ((0, 0),))}
    assert detect_first_conflict(plans, virtual={0, 1}) is None


def test_corridor_swap_with_pocket_is_optimal():
    grid = GridMap.from_strings(["#.##", "...."])
    starts, goals = [(0, 1), (3, 1)], [(3, 1), (0, 1)]
    plans = modified_cbs(agents_for(starts, goals), grid)
    assert soc(plans) == joint_optimal_soc(grid, starts, goals) == 8
    assert collisions(trajectories(plans, 8)) == []


def test_root_keeps_conflict_free_current_paths():
    grid = GridMap.open(4, 4)
    # a detour that is conflict-free stays as it is
    detour = Path(0, ((0, 0), (0, 1), (1, 1), (1, 0)))
    agents = [PlanningAgent(0, (0, 0), (1, 0), detour), PlanningAgent(1, (3, 3), (3, 2))]
    plans = modified_cbs(agents, grid)
    assert plans[0].path == detour and not plans[0].replanned
    assert plans[1].replanned


def test_virtual_agent_is_avoided_but_never_constrained():
    grid = GridMap.from_strings([".....", "##.##"])
    # the packet's subject walks from (0,0) to (4,0) along the top row
    packet = InfoPacket(7, None, PlanRecord((0, 0), 0, (4, 0)), (0, 0), 0, 10)
    agents = [PlanningAgent(0, (2, 1), (2, 0))]
    plans = modified_cbs(agents, grid, 0, {7: packet})
    path = plans[0].path
    virtual = Path(0, ((0, 0), (1, 0), (2, 0), (3, 0), (4, 0)))
    assert collisions({0: [path.at(t) for t in range(6)], 7: [virtual.at(t) for t in range(6)]}) == []
    assert all(c.source == 7 for c in plans[0].constraints)
    with pytest.raises(ValueError):
        modified_cbs([PlanningAgent(7, (2, 1), (2, 0))], grid, 0, {7: packet})


def test_resting_virtual_agent_blocks_cell_for_good():
    grid = GridMap.from_strings(["...", "..."])
    packet = InfoPacket(5, None, PlanRecord.hold((1, 0), 0), (1, 0), 0, float("inf"))
    plans = modified_cbs([PlanningAgent(0, (0, 0), (2, 0))], grid, 0, {5: packet})
    assert (1, 0) not in plans[0].path.positions
    assert any(c.permanent and c.vertex == (1, 0) for c in plans[0].constraints)


def test_target_reasoning_final_branch():
    # agent 0 would rest on (1,0) before agent 1 must pass it
    grid = GridMap.from_strings(["....", "#.##"])
    starts, goals = [(1, 1), (0, 0)], [(1, 0), (3, 0)]
    plans = modified_cbs(agents_for(starts, goals), grid)
    assert soc(plans) == joint_optimal_soc(grid, starts, goals)
    assert any(c.final for c in plans[0].constraints)
    for i, p in plans.items():
        assert violations(p.path, p.constraints) == []


def test_infeasible_and_limits():
    grid = GridMap.from_strings(["..."])
    stats = CBSStats()
    assert modified_cbs(agents_for([(0, 0), (2, 0)], [(2, 0), (0, 0)]), grid, stats=stats) is None
    assert stats.failure in ("conflict tree exhausted", "node limit")
    stats = CBSStats()
    grid, starts, goals = seeded_instance(33)  # a two-agent corridor swap that takes many nodes
    agents = agents_for(starts, goals)
    assert modified_cbs(agents, grid, node_limit=5, stats=stats) is None and stats.failure == "node limit"
    stats = CBSStats()
    assert modified_cbs(agents, grid, deadline=time.perf_counter() - 1, stats=stats) is None
    assert stats.failure == "deadline"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.booleans())
def test_matches_joint_optimum_under_every_option(seed, bypass):
    inst = seeded_instance(seed, max_side=4, max_agents=3)
    if inst is None:
        return
    grid, starts, goals = inst
    expected = joint_optimal_soc(grid, starts, goals)
    for reasoning in (True, False):
        stats = CBSStats()
        plans = modified_cbs(agents_for(starts, goals), grid, node_limit=3000, target_reasoning=reasoning,
                             bypass=bypass, stats=stats)
        if plans is None:
            # a solvable instance may only fail by running out of budget
            assert expected is None or stats.failure == "node limit"
            continue
        assert soc(plans) == expected
        horizon = max(p.path.end_time for p in plans.values())
        traj = trajectories(plans, horizon)
        assert collisions(traj) == []
        assert all(valid_moves(grid, t) for t in traj.values())
        # packets rebuild paths from their records, so every record must replay exactly
        agents = {a.id: a for a in agents_for(starts, goals)}
        for i, p in plans.items():
            assert plan_record(agents[i], p, 0).replay(grid) == p.path


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_greedy_mode_is_conflict_free_and_not_better_than_optimal(seed):
    inst = seeded_instance(seed, max_side=5, max_agents=3)
    if inst is None:
        return
    grid, starts, goals = inst
    plans = modified_cbs(agents_for(starts, goals), grid, node_limit=3000, greedy=True)
    if plans is None:
        return
    horizon = max(p.path.end_time for p in plans.values())
    assert collisions(trajectories(plans, horizon)) == []
    expected = joint_optimal_soc(grid, starts, goals)
    assert expected is not None and soc(plans) >= expected


def test_constraint_kinds():
    assert Constraint((0, 0), 1).kind == "vertex"
    assert Constraint.edge((0, 0), (1, 0), 1).kind == "edge"
    assert Constraint((0, 0), 1, final=True).kind == "final"
