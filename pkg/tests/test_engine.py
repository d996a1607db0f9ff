import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prism_mapf.comms import CommsConfig
from prism_mapf.engine import SUCCESS, EngineOptions, initialize_plans, replay_conflicts, run, tick
from prism_mapf.env import GridMap
from prism_mapf.scenarios import REGRESSION_SCENARIOS, random_grid, sample_instance
from prism_mapf.tasking import ConfigurationError

from oracles import collisions, valid_moves

PROX = CommsConfig("proximity")


def run_checked(grid, starts, tasks, comms=PROX, max_ticks=2000):
    """Tick by hand, checking packet invariants after every tick."""
    world = initialize_plans(grid, starts, tasks, comms)
    assert world.packet_invariant_errors() == []
    while not world.finished() and world.clock < max_ticks:
        tick(world)
        assert world.packet_invariant_errors() == [], world.clock
    return world


def test_single_agent_walks_its_task():
    grid = GridMap.from_strings(["....."])
    res = run(initialize_plans(grid, [(0, 0)], [((1, 0), (4, 0))], PROX))
    assert res.status == SUCCESS
    assert res.sum_of_costs == 4 and res.ticks == 4
    assert res.trajectories[0] == [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]


def test_no_tasks_finishes_immediately():
    res = run(initialize_plans(GridMap.open(3, 3), [(0, 0), (2, 2)], [], PROX))
    assert res.status == SUCCESS and res.ticks == 0 and res.sum_of_costs == 0


def test_more_tasks_than_agents_chain_through_the_pool():
    grid = GridMap.open(6, 6)
    tasks = [((1, 0), (5, 0)), ((5, 5), (0, 5)), ((2, 2), (3, 3))]
    world = run_checked(grid, [(0, 0)], tasks)
    assert world.finished() and len(world.tasks.done) == 3
    assert world.agents[0].position == world.agents[0].home
    # after task 0 both remaining starts are 5 away; the lower id wins the tie
    assert [e[3] for e in world.events if e[1] == "mission_done"] == [0, 1, 2]


def test_configuration_errors():
    grid = GridMap.from_strings(["..#.."])
    with pytest.raises(ConfigurationError):
        initialize_plans(grid, [(0, 0), (0, 0)], [], PROX)
    with pytest.raises(ConfigurationError):
        initialize_plans(grid, [(2, 0)], [], PROX)
    with pytest.raises(ConfigurationError):
        initialize_plans(grid, [(0, 0)], [((1, 0), (2, 0))], PROX)
    with pytest.raises(ConfigurationError):
        initialize_plans(grid, [(1, 0)], [((0, 0), (1, 0))], PROX)
    with pytest.raises(ConfigurationError):
        initialize_plans(grid, [(0, 0)], [((1, 0), (4, 0))], PROX)  # goal in another component


@pytest.mark.parametrize("name", sorted(REGRESSION_SCENARIOS))
def test_regression_scenarios_are_safe_and_finish(name):
    sc = REGRESSION_SCENARIOS[name]()
    world = run_checked(sc.grid, sc.starts, sc.tasks)
    assert world.finished()
    assert collisions(world.trajectories) == [] == replay_conflicts(world.trajectories)
    assert all(valid_moves(sc.grid, t) for t in world.trajectories.values())


def test_two_networks_exchange_bounded_packets():
    sc = REGRESSION_SCENARIOS["two-networks"]()
    world = run_checked(sc.grid, sc.starts, sc.tasks)
    bounded = [e for e in world.events if e[1] == "packet" and e[4] != float("inf")]
    assert bounded, "the two agents never swapped packets"
    assert max(r.bounded for r in world.trace) >= 1


def test_resting_agents_trace_rises_then_drops():
    sc = REGRESSION_SCENARIOS["resting-agents"]()
    world = run_checked(sc.grid, sc.starts, sc.tasks)
    counts = [r.infinite for r in world.trace if r.agent == 0]
    peak = counts.index(max(counts))
    assert max(counts) == 2
    assert counts[-1] == 0 and all(c <= 2 for c in counts)
    assert counts[:peak] == sorted(counts[:peak])


def test_full_comms_one_network():
    grid = random_grid(12, 12, 0.2, seed=3)
    sc = sample_instance(grid, 4, 4, seed=3)
    world = run_checked(grid, sc.starts, sc.tasks, CommsConfig("full"))
    assert world.finished()
    assert {r.network for r in world.trace} == {0}
    assert all(r.bounded == r.infinite == 0 for r in world.trace)


def test_deadline_times_out():
    grid = random_grid(32, 32, 0.2, seed=0)
    sc = sample_instance(grid, 8, 16, seed=0)
    res = run(initialize_plans(grid, sc.starts, sc.tasks, PROX), time_limit=0.0)
    assert res.status == "timeout"
    res = run(initialize_plans(grid, sc.starts, sc.tasks, PROX), max_ticks=3)
    assert res.status == "timeout" and res.ticks == 3


def test_trace_has_one_row_per_agent_per_tick():
    sc = REGRESSION_SCENARIOS["bottleneck"]()
    res = run(initialize_plans(sc.grid, sc.starts, sc.tasks, PROX))
    assert len(res.trace) == res.ticks * len(sc.starts)
    assert [(r.tick, r.agent) for r in res.trace[:3]] == [(1, 0), (1, 1), (1, 2)]


def test_replay_conflicts_finds_collisions():
    traj = {0: [(0, 0), (1, 0)], 1: [(1, 0), (0, 0)], 2: [(5, 5), (1, 0)]}
    found = replay_conflicts(traj)
    assert ("edge", 0, 0, 1) in found
    assert any(f[0] == "vertex" and f[1] == 1 for f in found)


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["proximity", "line_of_sight"]), st.integers(2, 5))
def test_random_runs_are_safe(seed, protocol, n):
    grid = random_grid(12, 12, 0.2, seed=seed)
    sc = sample_instance(grid, n, n + 2, seed=seed)
    world = initialize_plans(grid, sc.starts, sc.tasks, CommsConfig(protocol), EngineOptions())
    res = run(world, max_ticks=1500, time_limit=20)
    assert collisions(res.trajectories) == []
    assert world.packet_invariant_errors() == []
    if res.status == SUCCESS:
        assert res.tasks_done == res.tasks_total
