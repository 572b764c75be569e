"""Aerial-phase simulation of a jumping robot with an elastic passive joint."""
from .dynamics import jump_metrics, simulate, simulate_aerial, simulate_rigid
from .model import Scenario, dump_scenario, load_scenario, load_scenario_file
from .reference import default_reference_scenario

__all__ = [
    "Scenario",
    "default_reference_scenario",
    "dump_scenario",
    "jump_metrics",
    "load_scenario",
    "load_scenario_file",
    "simulate",
    "simulate_aerial",
    "simulate_rigid",
]
