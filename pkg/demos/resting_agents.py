"""Watch one agent collect infinite packets about two parked agents, then drop them.

Agent 0 drives down a 30x5 hall past agents 1 and 2, which sit still. Each time
it leaves one behind it keeps a permanent snapshot; when it delivers, the
snapshots are flushed.

    python3 demos/resting_agents.py
"""
from prism_mapf.comms import CommsConfig
from prism_mapf.engine import initialize_plans, run
from prism_mapf.scenarios import resting_agents_scenario

sc = resting_agents_scenario()
world = initialize_plans(sc.grid, sc.starts, sc.tasks, CommsConfig("proximity"))
result = run(world)

print(f"status={result.status} ticks={result.ticks} sum_of_costs={result.sum_of_costs}")
print("tick  pos      bounded infinite")
for row in result.trace:
    if row.agent == 0:
        print(f"{row.tick:4d}  ({row.x:2d},{row.y})   {row.bounded:7d} {row.infinite:8d}")
for event in world.events:
    if event[1] == "mission_done":
        print(f"agent {event[2]} finished task {event[3]} at tick {event[0]}")
