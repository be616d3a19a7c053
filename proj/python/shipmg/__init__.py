"""Optimal power management of a shipboard microgrid."""

from ._shipmg import ConfigError, Scenario, __version__, compare, optimize, simulate_load

__all__ = ["ConfigError", "Scenario", "__version__", "compare", "optimize", "simulate_load"]
