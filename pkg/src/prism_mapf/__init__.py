"""Decentralized multi-task multi-agent pathfinding under limited communication."""
from .cbs import AgentPlan, Conflict, PlanningAgent, detect_first_conflict, modified_cbs
from .comms import CommsConfig, NetworkPartition, compute_networks, line_of_sight, supercover
from .engine import (
    AgentState,
    EngineOptions,
    SimulationResult,
    WorldState,
    initialize_plans,
    replay_conflicts,
    run,
    tick,
)
from .env import GridMap, ParseError, ScenarioEntry, load_map, load_scenario, parse_map, parse_scenario
from .lowlevel import Constraint, Path, PlanRecord, plan_path
from .packets import InfoPacket, calculate_flush_time, create_packets_on_separation, synchronize
from .tasking import AllocationState, ConfigurationError, Task, allocate_tasks

__all__ = [
    "AgentPlan", "AgentState", "AllocationState", "CommsConfig", "ConfigurationError", "Conflict",
    "Constraint", "EngineOptions", "GridMap", "InfoPacket", "NetworkPartition", "ParseError", "Path",
    "PlanRecord", "PlanningAgent", "ScenarioEntry", "SimulationResult", "Task", "WorldState",
    "allocate_tasks", "calculate_flush_time", "compute_networks", "create_packets_on_separation",
    "detect_first_conflict", "initialize_plans", "line_of_sight", "load_map", "load_scenario",
    "modified_cbs", "parse_map", "parse_scenario", "plan_path", "replay_conflicts", "run",
    "supercover", "synchronize", "tick",
]
