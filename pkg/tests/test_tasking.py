import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prism_mapf.env import manhattan
from prism_mapf.tasking import (
    ASSIGNED,
    DONE,
    STARTED,
    TRANSITION,
    UNASSIGNED,
    AllocationState,
    ConfigurationError,
    allocate_tasks,
    on_task_complete,
    transition_to,
)


def test_distinct_endpoints_required():
    with pytest.raises(ConfigurationError):
        AllocationState.from_pairs([((0, 0), (1, 0)), ((1, 0), (2, 0))], [0])


def test_nearest_task_goes_to_requester():
    state = AllocationState.from_pairs([((9, 9), (8, 8)), ((1, 0), (2, 2))], [0])
    allocate_tasks(state, [0], {0: (0, 0)})
    assert state.assignment[0] == 1
    assert state.missions[1].state == ASSIGNED and state.missions[1].assignee == 0


def test_swap_hands_a_task_to_a_closer_agent():
    state = AllocationState.from_pairs([((0, 0), (0, 5)), ((9, 0), (9, 5))], [0, 1])
    positions = {0: (8, 0), 1: (1, 0)}
    state.assign(0, 0)
    state.assign(1, 1)
    changed = allocate_tasks(state, [], positions)
    assert state.assignment == {0: 1, 1: 0}
    assert changed == {0, 1}


def test_started_tasks_are_not_swapped():
    state = AllocationState.from_pairs([((0, 0), (0, 5)), ((9, 0), (9, 5))], [0, 1])
    state.assign(0, 0)
    state.mark_started(0)
    state.assign(1, 1)
    allocate_tasks(state, [], {0: (8, 0), 1: (1, 0)}, swappable=[1])
    assert state.assignment == {0: 0, 1: 1}


def test_transition_then_mission_then_done():
    state = AllocationState.from_pairs([((3, 0), (5, 0))], [0])
    state.assign(0, 0)
    trans = transition_to(state.missions[0], (0, 0), 0)
    assert trans.kind == TRANSITION and trans.start == (0, 0) and trans.goal == (3, 0)
    mission = on_task_complete(state, trans)
    assert mission.id == 0 and state.missions[0].state == STARTED
    assert on_task_complete(state, mission) is None
    assert state.missions[0].state == DONE and state.assignment[0] is None and state.all_done()


def test_reassigning_releases_the_old_task():
    state = AllocationState.from_pairs([((3, 0), (5, 0)), ((6, 0), (7, 0))], [0])
    state.assign(0, 0)
    state.assign(0, 1)
    assert state.missions[0].state == UNASSIGNED and state.pool() == [0]


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_allocation_is_consistent_and_swap_stable(data):
    n_agents = data.draw(st.integers(1, 4))
    n_tasks = data.draw(st.integers(0, 5))
    cells = data.draw(
        st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), min_size=2 * n_tasks, max_size=2 * n_tasks,
                 unique=True)
    )
    pairs = [(cells[2 * k], cells[2 * k + 1]) for k in range(n_tasks)]
    positions = {a: data.draw(st.tuples(st.integers(0, 9), st.integers(0, 9))) for a in range(n_agents)}
    state = AllocationState.from_pairs(pairs, range(n_agents))
    allocate_tasks(state, range(n_agents), positions)

    held = [m for m in state.assignment.values() if m is not None]
    assert len(held) == len(set(held)) == min(n_agents, n_tasks)
    for a, m in state.assignment.items():
        if m is not None:
            assert state.missions[m].assignee == a and state.missions[m].state == ASSIGNED

    def est(a, m):
        return 0 if m is None else manhattan(positions[a], state.missions[m].start)

    # exhaustive: no pair of agents can lower the estimate by trading tasks
    for a, b in itertools.permutations(range(n_agents), 2):
        u, w = state.assignment[a], state.assignment[b]
        assert est(a, u) + est(b, w) <= est(a, w) + est(b, u)
