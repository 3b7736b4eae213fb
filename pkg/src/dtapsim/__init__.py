"""Discrete-event simulator for distributed task allocation with
gradient-ascent multi-agent learners (WPL and GIGA-WoLF), instrumented
with both the global performance metric (windowed average total service
time) and a per-agent policy-entropy diagnostic."""

from .config import RunConfig, make_config, PRESETS
from .learners import LearnerConfig, LearnerState, WPL, GIGA_WOLF
from .policy import entropy_bits, project, sample, uniform_policy
from .world import World, build_grid

__all__ = [
    "RunConfig",
    "make_config",
    "PRESETS",
    "LearnerConfig",
    "LearnerState",
    "WPL",
    "GIGA_WOLF",
    "entropy_bits",
    "project",
    "sample",
    "uniform_policy",
    "World",
    "build_grid",
]

__version__ = "0.1.0"
