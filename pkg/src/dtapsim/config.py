"""Run configuration: defaults, scenario presets, key=value files, overrides.

Precedence: built-in defaults < preset < config file < explicit flags.
Unknown keys are rejected. The resolved config is echoed verbatim into the
output directory so a run can be reproduced bit-identically from it.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .learners import ALGORITHMS, LearnerConfig


class ConfigError(ValueError):
    """Invalid, unknown, or inconsistent configuration input."""


@dataclass
class RunConfig:
    grid_rows: int = 10
    grid_cols: int = 10
    adjacent_delay: int = 2
    generator_rows: int = 4
    generator_cols: int = 4
    arrival_rate: float = 0.5  # tasks per time unit per generator agent
    service_rate: float = 0.1  # tasks per time unit per agent
    algorithm: str = "wpl"
    eta: float = 0.001
    alpha: float = 0.1
    epsilon_floor: float = 0.01
    duration: int = 200_000
    window: int = 1000
    seed: int = 1
    hop_cap: int = 0  # 0 = unlimited (debugging aid only)
    dump_policies: bool = False
    dump_every: int = 10  # policy dump cadence, in windows
    output_dir: str = ""


# The two reference scenarios: 100 agents in a 10x10 grid, adjacent delay 2,
# tasks entering the centered 4x4 sub-grid at 0.5 tasks/time unit per agent,
# service rate 0.1; horizons of 200k and 600k time units.
PRESETS: dict[str, dict] = {
    "paper-200k": {
        "grid_rows": 10,
        "grid_cols": 10,
        "adjacent_delay": 2,
        "generator_rows": 4,
        "generator_cols": 4,
        "arrival_rate": 0.5,
        "service_rate": 0.1,
        "duration": 200_000,
        "window": 1000,
    },
    "paper-600k": {
        "grid_rows": 10,
        "grid_cols": 10,
        "adjacent_delay": 2,
        "generator_rows": 4,
        "generator_cols": 4,
        "arrival_rate": 0.5,
        "service_rate": 0.1,
        "duration": 600_000,
        "window": 1000,
    },
}

_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value):
    if name not in _FIELDS:
        raise ConfigError(f"unknown config key: {name!r}")
    if value is None:
        return None
    ftype = _FIELDS[name].type
    if isinstance(value, str):
        text = value.strip()
        try:
            if ftype == "int":
                return int(text)
            if ftype == "float":
                return float(text)
            if ftype == "bool":
                if text.lower() in ("1", "true", "yes", "on"):
                    return True
                if text.lower() in ("0", "false", "no", "off"):
                    return False
                raise ValueError(text)
            return text
        except ValueError:
            raise ConfigError(f"bad value for {name}: {value!r}") from None
    return value


def max_action_set_size(rows: int, cols: int) -> int:
    vert = 2 if rows >= 3 else rows - 1
    horiz = 2 if cols >= 3 else cols - 1
    return 1 + vert + horiz


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.grid_rows < 1 or cfg.grid_cols < 1:
        raise ConfigError(f"grid must be at least 1x1, got {cfg.grid_rows}x{cfg.grid_cols}")
    if cfg.adjacent_delay < 1:
        raise ConfigError(f"adjacent_delay must be >= 1, got {cfg.adjacent_delay}")
    if not (1 <= cfg.generator_rows and 1 <= cfg.generator_cols):
        raise ConfigError(
            f"generator_region must be at least 1x1, got {cfg.generator_rows}x{cfg.generator_cols}"
        )
    if cfg.generator_rows > cfg.grid_rows or cfg.generator_cols > cfg.grid_cols:
        raise ConfigError(
            f"generator_region {cfg.generator_rows}x{cfg.generator_cols} does not fit "
            f"inside the {cfg.grid_rows}x{cfg.grid_cols} grid"
        )
    if (cfg.grid_rows - cfg.generator_rows) % 2 or (cfg.grid_cols - cfg.generator_cols) % 2:
        raise ConfigError(
            f"generator_region {cfg.generator_rows}x{cfg.generator_cols} cannot be centered "
            f"in a {cfg.grid_rows}x{cfg.grid_cols} grid"
        )
    if cfg.arrival_rate < 0:
        raise ConfigError(f"arrival_rate must be >= 0, got {cfg.arrival_rate}")
    if cfg.service_rate <= 0:
        raise ConfigError(f"service_rate must be > 0, got {cfg.service_rate}")
    if cfg.algorithm not in ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {cfg.algorithm!r}")
    if cfg.eta <= 0:
        raise ConfigError(f"eta must be > 0, got {cfg.eta}")
    if not 0 < cfg.alpha <= 1:
        raise ConfigError(f"alpha must be in (0, 1], got {cfg.alpha}")
    n_max = max_action_set_size(cfg.grid_rows, cfg.grid_cols)
    if not 0 <= cfg.epsilon_floor < 1.0 / n_max:
        raise ConfigError(
            f"epsilon_floor must lie in [0, 1/{n_max}) for this grid, got {cfg.epsilon_floor}"
        )
    if cfg.duration < 1:
        raise ConfigError(f"duration must be >= 1, got {cfg.duration}")
    if cfg.window < 1:
        raise ConfigError(f"window must be >= 1, got {cfg.window}")
    if cfg.hop_cap < 0:
        raise ConfigError(f"hop_cap must be >= 0, got {cfg.hop_cap}")
    if cfg.dump_every < 1:
        raise ConfigError(f"dump_every must be >= 1, got {cfg.dump_every}")
    return cfg


def parse_config_file(path) -> dict:
    """key=value lines; blank lines and #-comments ignored; unknown keys rejected."""
    values: dict = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        values[key] = _coerce(key, value)
    return values


def make_config(preset: str | None = None, config_file=None, overrides: dict | None = None) -> RunConfig:
    values: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; available: {sorted(PRESETS)}")
        values.update(PRESETS[preset])
    if config_file is not None:
        values.update(parse_config_file(config_file))
    if overrides:
        for key, value in overrides.items():
            coerced = _coerce(key, value)
            if coerced is not None:
                values[key] = coerced
    return validate(RunConfig(**values))


def echo_config(cfg: RunConfig) -> str:
    lines = [f"{f.name}={getattr(cfg, f.name)}" for f in dataclasses.fields(RunConfig)]
    return "\n".join(lines) + "\n"


def learner_config(cfg: RunConfig) -> LearnerConfig:
    return LearnerConfig(
        eta=cfg.eta,
        alpha=cfg.alpha,
        epsilon_floor=cfg.epsilon_floor,
        algorithm=cfg.algorithm,
    )


def generator_ids(cfg: RunConfig) -> list[int]:
    """Agent ids of the centered generator_rows x generator_cols sub-grid."""
    r0 = (cfg.grid_rows - cfg.generator_rows) // 2
    c0 = (cfg.grid_cols - cfg.generator_cols) // 2
    return [
        (r0 + r) * cfg.grid_cols + (c0 + c)
        for r in range(cfg.generator_rows)
        for c in range(cfg.generator_cols)
    ]
