"""Mark-0 agent-based macroeconomy with Covid-style shocks and policies."""

from mark0.params import EconomyParams
from mark0.scenario import PolicySpec, ScenarioSpec, ShockSchedule

__all__ = ["EconomyParams", "PolicySpec", "ScenarioSpec", "ShockSchedule"]
__version__ = "0.1.0"
