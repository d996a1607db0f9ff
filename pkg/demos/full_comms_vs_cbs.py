"""With everyone in range, the online planner reproduces the centralized optimum.

Draws a few one-task-per-agent instances and compares sum of costs.

    python3 demos/full_comms_vs_cbs.py
"""
from prism_mapf.baselines import centralized_cbs
from prism_mapf.comms import CommsConfig
from prism_mapf.engine import initialize_plans, run
from prism_mapf.scenarios import random_grid, sample_instance

for seed in range(5):
    grid = random_grid(16, 16, 0.2, seed=seed)
    sc = sample_instance(grid, 5, 5, seed=seed, agents_on_task_starts=True)
    goals = {i: goal for i, (_, goal) in enumerate(sc.tasks)}
    optimum = centralized_cbs(grid, dict(enumerate(sc.starts)), goals)
    online = run(initialize_plans(grid, sc.starts, sc.tasks, CommsConfig("full")))
    print(f"seed {seed}: centralized {optimum.sum_of_costs}  online {online.sum_of_costs}  ({online.status})")
