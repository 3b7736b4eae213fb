"""Per-agent gradient-ascent learners behind one interface.

Both learners estimate per-action expected reward with an exponential
moving average, turn it into an advantage-centered gradient, and take one
policy step per observed reward: WPL damps each coordinate by pi(j) or
1 - pi(j) depending on the gradient sign, GIGA-WoLF interpolates between a
fast track and a slow baseline track. All functions are pure
(state in, state out); the world's hot loop uses the in-place kernels
these wrap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .policy import uniform_policy, validate_policy

WPL = "wpl"
GIGA_WOLF = "giga-wolf"
ALGORITHMS = (WPL, GIGA_WOLF)


@dataclass(frozen=True)
class LearnerConfig:
    eta: float = 0.001
    alpha: float = 0.1
    epsilon_floor: float = 0.01
    algorithm: str = WPL

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.epsilon_floor < 0.0:
            raise ValueError(f"epsilon_floor must be >= 0, got {self.epsilon_floor}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")


@dataclass
class LearnerState:
    """Policy plus value estimates; z is the GIGA-WoLF baseline track."""

    policy: np.ndarray
    q: np.ndarray
    z: np.ndarray | None = None


def make_learner_state(n_actions: int, cfg: LearnerConfig) -> LearnerState:
    """Fresh state: uniform policy, zero value estimates."""
    if cfg.epsilon_floor >= 1.0 / n_actions:
        raise ValueError(
            f"epsilon_floor {cfg.epsilon_floor} infeasible for {n_actions} actions"
        )
    p = uniform_policy(n_actions)
    z = p.copy() if cfg.algorithm == GIGA_WOLF else None
    return LearnerState(policy=p, q=np.zeros(n_actions), z=z)


def update_value(q, action: int, reward: float, alpha: float) -> np.ndarray:
    """EMA update of the acted entry: q[a] <- (1-alpha) q[a] + alpha * reward."""
    q = np.asarray(q, dtype=np.float64)
    if not 0 <= action < q.size:
        raise IndexError(f"action {action} out of range for {q.size} actions")
    if not np.isfinite(reward):
        raise ValueError(f"reward must be finite, got {reward}")
    out = q.copy()
    out[action] = (1.0 - alpha) * out[action] + alpha * reward
    return out


def gradient(q, p) -> np.ndarray:
    """Advantage-centered gradient estimate g[j] = q[j] - sum_k p[k] q[k]."""
    q = np.asarray(q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if q.shape != p.shape:
        raise ValueError(f"length mismatch: q has {q.size} entries, policy {p.size}")
    return kernels.advantage_gradient(q, p)


def wpl_deltas(p, g, eta: float) -> np.ndarray:
    """Pre-projection WPL step vector (exposed for analysis and tests)."""
    return kernels.wpl_deltas(
        np.asarray(p, dtype=np.float64), np.asarray(g, dtype=np.float64), eta
    )


def wpl_step(p, g, cfg: LearnerConfig) -> np.ndarray:
    p = validate_policy(p)
    g = np.asarray(g, dtype=np.float64)
    return kernels.wpl_step(p, g, cfg.eta, cfg.epsilon_floor)


def giga_wolf_step(p, z, g, cfg: LearnerConfig) -> tuple[np.ndarray, np.ndarray]:
    p = validate_policy(p)
    z = validate_policy(z)
    g = np.asarray(g, dtype=np.float64)
    new_p, new_z = kernels.giga_step(p, z, g, cfg.eta, cfg.epsilon_floor)
    return new_p, new_z


def learner_observe(state: LearnerState, action: int, reward: float, cfg: LearnerConfig) -> LearnerState:
    """One full observation: value update, gradient, one policy step."""
    p = state.policy.copy()
    q = state.q.copy()
    if not 0 <= action < q.size:
        raise IndexError(f"action {action} out of range for {q.size} actions")
    if cfg.algorithm == GIGA_WOLF:
        if state.z is None:
            raise ValueError("GIGA-WoLF state requires a baseline z vector")
        z = state.z.copy()
        kernels.observe_giga(p, q, z, action, reward, cfg.alpha, cfg.eta, cfg.epsilon_floor)
        return LearnerState(policy=p, q=q, z=z)
    kernels.observe_wpl(p, q, action, reward, cfg.alpha, cfg.eta, cfg.epsilon_floor)
    return LearnerState(policy=p, q=q, z=None)
