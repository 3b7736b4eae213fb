"""Simplex-constrained policy math: projection, entropy, sampling.

A policy is a plain 1-D float64 array of action probabilities in a fixed
action ordering. Functions here validate at the API boundary and delegate
the arithmetic to :mod:`dtapsim.kernels`.
"""

from __future__ import annotations

import numpy as np

from . import kernels

SUM_TOLERANCE = 1e-9


def as_probability_vector(values) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("policy must be a non-empty 1-D vector")
    return arr


def validate_policy(p, atol: float = SUM_TOLERANCE) -> np.ndarray:
    """Check simplex membership; returns the validated array."""
    arr = as_probability_vector(p)
    if not np.all(np.isfinite(arr)):
        raise ValueError("policy entries must be finite")
    if np.any(arr < -atol) or np.any(arr > 1.0 + atol):
        raise ValueError("policy entries must lie in [0, 1]")
    total = float(arr.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"policy entries must sum to 1 (got {total!r})")
    return arr


def uniform_policy(n_actions: int) -> np.ndarray:
    if n_actions < 1:
        raise ValueError("a policy needs at least one action")
    return np.full(n_actions, 1.0 / n_actions)


def project(raw, epsilon_floor: float = 0.0) -> np.ndarray:
    """Euclidean projection of `raw` onto {p : sum(p) = 1, p_k >= epsilon_floor}.

    Idempotent: projecting a valid policy returns it unchanged.
    """
    arr = as_probability_vector(raw)
    if not np.all(np.isfinite(arr)):
        raise ValueError("projection input must be finite")
    n = arr.size
    if not 0.0 <= epsilon_floor < 1.0 / n:
        raise ValueError(
            f"epsilon_floor must lie in [0, 1/{n}) for {n} actions, got {epsilon_floor}"
        )
    return kernels.project_simplex(arr, float(epsilon_floor))


def entropy_bits(p) -> float:
    """Policy entropy -sum p_k log2 p_k in bits; 0*log2(0) counts as 0."""
    arr = validate_policy(p)
    return float(kernels.entropy_bits(arr))


def sample(p, rng: np.random.Generator) -> int:
    """Draw one action index ~ p, consuming exactly one uniform from `rng`."""
    arr = validate_policy(p)
    u = rng.random()
    return int(kernels.sample_index(arr, u))
