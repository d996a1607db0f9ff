"""Run configuration, single runs and batches, and JSON/CSV output."""
from __future__ import annotations

import csv
import io
import json
import math
import re
import statistics
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path as FsPath

from .baselines import centralized_cbs, tpts_run
from .comms import CommsConfig
from .engine import SUCCESS, TIMEOUT, EngineOptions, SimulationResult, initialize_plans, replay_conflicts, run
from .env import GridMap, load_map, load_scenario
from .scenarios import Scenario, from_scenario_entries, maze, random_grid, sample_instance

SOLVERS = ("prism", "cbs", "tpts")
UNSAFE = "unsafe"  # finished, but the replay found collisions
PROTOCOL_ALIASES = {"prox": "proximity", "proximity": "proximity", "los": "line_of_sight",
                    "line_of_sight": "line_of_sight", "full": "full"}
_GENERATED = re.compile(r"^(random|maze)-(\d+)-(\d+)-(\d+)$")


@dataclass(frozen=True)
class RunConfig:
    map: str = "random-32-32-20"
    scen: str | None = None
    solver: str = "prism"
    protocol: str | None = "proximity"
    range_fraction: float | None = None  # None is the minimum range
    agents: int = 4
    tasks: int = 8
    seed: int = 0
    time_limit: float = 120.0
    max_ticks: int = 10_000
    out: str | None = None

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.solver == "prism":
            if self.protocol is None:
                raise ValueError("prism needs a communication protocol")
            object.__setattr__(self, "protocol", PROTOCOL_ALIASES.get(self.protocol, self.protocol))
            CommsConfig(self.protocol, self.range_fraction)
        if self.agents < 1 or self.tasks < 0:
            raise ValueError("need at least one agent and a non-negative task count")

    def comms(self) -> CommsConfig:
        return CommsConfig(self.protocol or "full", self.range_fraction)


def load_grid(spec: str, seed: int) -> GridMap:
    """A MovingAI ``.map`` file, or a generated map named like ``random-32-32-20`` or ``maze-32-32-2``."""
    path = FsPath(spec)
    if path.exists():
        return load_map(path)
    m = _GENERATED.match(spec)
    if m is None:
        raise FileNotFoundError(f"no map file {spec!r} and not a generator name")
    kind, w, h, p = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4))
    if kind == "random":
        return random_grid(w, h, p / 100, seed)
    return maze(w, h, p, seed)


def build_scenario(config: RunConfig) -> Scenario:
    grid = load_grid(config.map, config.seed)
    if config.solver == "cbs" and config.tasks != config.agents:
        raise ValueError("the cbs solver is one-shot: it needs exactly one task per agent")
    if config.scen:
        entries = load_scenario(config.scen, grid)
        return from_scenario_entries(grid, entries, config.agents, config.tasks)
    return sample_instance(grid, config.agents, config.tasks, config.seed, agents_on_task_starts=config.solver == "cbs")


def _run_cbs(scenario: Scenario, config: RunConfig) -> SimulationResult:
    starts = dict(enumerate(scenario.starts))
    goals = {i: scenario.tasks[i][1] for i in starts}
    solution = centralized_cbs(scenario.grid, starts, goals, deadline=time.perf_counter() + config.time_limit)
    if solution is None:
        return SimulationResult(TIMEOUT, 0, config.time_limit, 0, {i: [v] for i, v in starts.items()}, [],
                                tasks_total=len(goals), solver="cbs")
    horizon = max(p.end_time for p in solution.paths.values())
    trajectories = {i: [p.at(t) for t in range(horizon + 1)] for i, p in solution.paths.items()}
    return SimulationResult(SUCCESS, solution.sum_of_costs, solution.planning_time, horizon, trajectories, [],
                            cbs_calls=1, tasks_done=len(goals), tasks_total=len(goals), solver="cbs")


def run_single(config: RunConfig) -> tuple[dict, SimulationResult]:
    """One run; returns the deterministic record and the full result."""
    scenario = build_scenario(config)
    started = time.perf_counter()
    if config.solver == "prism":
        world = initialize_plans(scenario.grid, scenario.starts, scenario.tasks, config.comms(), EngineOptions())
        result = run(world, config.max_ticks, config.time_limit)
    elif config.solver == "tpts":
        result = tpts_run(scenario.grid, scenario.starts, scenario.tasks, config.max_ticks, config.time_limit)
    else:
        result = _run_cbs(scenario, config)
    wall = time.perf_counter() - started
    result.seed = config.seed
    record = {
        "map": scenario.grid.name or config.map,
        "protocol": config.protocol if config.solver == "prism" else None,
        "range": config.range_fraction,
        "agents": len(scenario.starts),
        **result.record(),
        "conflicts": len(replay_conflicts(result.trajectories)),
    }
    if record["status"] == SUCCESS and record["conflicts"]:
        record["status"] = result.status = UNSAFE
    record["timing"] = {"planning_time": result.planning_time, "wall_time": wall,
                        "allocation_time": result.allocation_time}
    return record, result


def deterministic(record: dict) -> dict:
    return {k: v for k, v in record.items() if k != "timing"}


def emit_packet_trace(result: SimulationResult) -> str:
    """CSV of per-agent packet counts: one row per tick and agent."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tick", "agent", "bounded", "infinite"])
    for row in result.trace:
        writer.writerow([row.tick, row.agent, row.bounded, row.infinite])
    return buf.getvalue()


def emit_position_trace(result: SimulationResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tick", "agent", "x", "y", "network"])
    for row in result.trace:
        writer.writerow([row.tick, row.agent, row.x, row.y, row.network])
    return buf.getvalue()


def _mean_std(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    return statistics.fmean(values), (statistics.pstdev(values) if len(values) > 1 else 0.0)


def aggregate(rows: list[dict], time_limit: float) -> dict:
    """Success rate plus mean and std of runtime (failures count at the cap) and of cost (successes only)."""
    if not rows:
        return {"runs": 0, "success_rate": None, "runtime_mean": None, "runtime_std": None,
                "cost_mean": None, "cost_std": None}
    ok = [r for r in rows if r["status"] == SUCCESS]
    runtimes = [r["timing"]["planning_time"] if r["status"] == SUCCESS else time_limit for r in rows]
    rt_mean, rt_std = _mean_std(runtimes)
    cost_mean, cost_std = _mean_std([r["sum_of_costs"] for r in ok])
    return {"runs": len(rows), "success_rate": len(ok) / len(rows), "runtime_mean": rt_mean,
            "runtime_std": rt_std, "cost_mean": cost_mean, "cost_std": cost_std}


def write_run(out_dir: FsPath, record: dict, result: SimulationResult) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{record['solver']}-seed{record['seed']}"
    (out_dir / f"{stem}.json").write_text(json.dumps(deterministic(record), indent=2, sort_keys=True) + "\n")
    (out_dir / f"{stem}-packets.csv").write_text(emit_packet_trace(result))
    (out_dir / f"{stem}-trace.csv").write_text(emit_position_trace(result))


def run_batch(config: RunConfig, count: int) -> dict:
    """Run ``count`` scenarios with seeds ``config.seed .. config.seed + count - 1``.

    A scenario that raises is reported as an ``error`` row; the batch goes on.
    """
    rows = []
    timing = {}
    out_dir = FsPath(config.out) if config.out else None
    for k in range(count):
        cfg = replace(config, seed=config.seed + k)
        try:
            record, result = run_single(cfg)
        except (OSError, ValueError) as exc:
            record = {"solver": cfg.solver, "seed": cfg.seed, "status": "error", "error": str(exc),
                      "sum_of_costs": None, "timing": {"planning_time": math.nan}}
            result = None
        rows.append(record)
        timing[str(cfg.seed)] = record["timing"]
        if out_dir is not None and result is not None:
            write_run(out_dir, record, result)
    report = {"config": asdict(config), "rows": [deterministic(r) for r in rows],
              "aggregate": aggregate(rows, config.time_limit)}
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        summary = {k: v for k, v in report.items() if k != "aggregate"}
        # the output location is not part of the experiment
        summary["config"] = {k: v for k, v in summary["config"].items() if k != "out"}
        (out_dir / "results.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        (out_dir / "timing.json").write_text(
            json.dumps({"runs": timing, "aggregate": report["aggregate"]}, indent=2, sort_keys=True) + "\n"
        )
    return report
