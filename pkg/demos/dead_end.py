"""A dead-end spur where token passing gets stuck but joint replanning does not.

Two agents park inside a one-cell-wide spur whose far end is a delivery goal.
Token passing treats them as walls; the network planner moves them aside.

    python3 demos/dead_end.py [seed]
"""
import sys

from prism_mapf.baselines import tpts_run
from prism_mapf.comms import CommsConfig
from prism_mapf.engine import initialize_plans, replay_conflicts, run
from prism_mapf.scenarios import dead_end_instance

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
sc = dead_end_instance(seed)
spur = sc.notes["spur"]
# draw the neighbourhood of the spur: S spur, A parked agent, G goal at its end
xs, ys = [v[0] for v in spur], [v[1] for v in spur]
for y in range(max(0, min(ys) - 3), min(sc.grid.height, max(ys) + 4)):
    row = ""
    for x in range(max(0, min(xs) - 3), min(sc.grid.width, max(xs) + 4)):
        v = (x, y)
        row += "A" if v in sc.starts[1:] else "G" if v == spur[-1] else "S" if v in spur else \
            "." if sc.grid.is_passable(v) else "@"
    print(row)

tpts = tpts_run(sc.grid, sc.starts, sc.tasks, time_limit=30)
print(f"token passing: {tpts.status} after {tpts.ticks} ticks, {tpts.tasks_done}/{tpts.tasks_total} tasks")

prism = run(initialize_plans(sc.grid, sc.starts, sc.tasks, CommsConfig("proximity")), time_limit=60)
print(f"network planner: {prism.status} after {prism.ticks} ticks, {prism.tasks_done}/{prism.tasks_total} tasks, "
      f"{len(replay_conflicts(prism.trajectories))} collisions")
