import math

import numpy as np
import pytest

from dtapsim.policy import entropy_bits, project, sample, uniform_policy, validate_policy

from oracles import project_simplex_enumeration, simplex_grid


def test_project_returns_valid_input_unchanged():
    out = project([0.2, 0.3, 0.5], 0.0)
    np.testing.assert_allclose(out, [0.2, 0.3, 0.5], atol=1e-15)


def test_project_symmetric_overflow_splits_equally():
    np.testing.assert_allclose(project([0.6, 0.6], 0.0), [0.5, 0.5], atol=1e-15)


def test_project_idempotent():
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = rng.integers(2, 7)
        floor = float(rng.uniform(0, 0.9 / n)) if rng.random() < 0.5 else 0.0
        v = rng.normal(0, 2, n)
        once = project(v, floor)
        twice = project(once, floor)
        np.testing.assert_allclose(twice, once, atol=1e-12)


def test_project_matches_enumeration_oracle():
    rng = np.random.default_rng(7)
    for _ in range(300):
        n = int(rng.integers(2, 7))
        floor = float(rng.uniform(0, 0.9 / n)) if rng.random() < 0.5 else 0.0
        v = rng.normal(0, 3, n)
        expected = project_simplex_enumeration(v, floor)
        np.testing.assert_allclose(project(v, floor), expected, atol=1e-6)


def test_project_no_grid_point_is_closer():
    rng = np.random.default_rng(3)
    for n, steps in ((2, 400), (3, 60)):
        grid = simplex_grid(n, steps)
        resolution = 1.0 / steps
        for _ in range(25):
            v = rng.normal(0, 2, n)
            p = project(v, 0.0)
            proj_dist = math.sqrt(((p - v) ** 2).sum())
            grid_best = math.sqrt(((grid - v) ** 2).sum(axis=1).min())
            assert grid_best >= proj_dist - resolution


def test_project_respects_floor():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 6))
        floor = float(rng.uniform(0, 0.9 / n))
        out = project(rng.normal(0, 5, n), floor)
        assert out.min() >= floor - 1e-12
        assert abs(out.sum() - 1.0) < 1e-9


@pytest.mark.parametrize(
    "raw,floor",
    [
        ([], 0.0),
        ([0.1, float("nan")], 0.0),
        ([0.1, float("inf")], 0.0),
        ([0.4, 0.6], 0.5),
        ([0.4, 0.6], -0.01),
    ],
)
def test_project_rejects_bad_input(raw, floor):
    with pytest.raises(ValueError):
        project(raw, floor)


def test_entropy_uniform_four_actions():
    assert entropy_bits([0.25, 0.25, 0.25, 0.25]) == pytest.approx(2.0, abs=1e-12)


def test_entropy_point_mass_is_zero():
    assert entropy_bits([1.0, 0.0, 0.0]) == 0.0


def test_entropy_analytic_mixed():
    assert entropy_bits([0.5, 0.25, 0.25]) == pytest.approx(1.5, abs=1e-12)


def test_entropy_bounds_and_permutation_invariance():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(2, 6))
        p = project(rng.normal(0, 2, n), 0.0)
        h = entropy_bits(p)
        assert -1e-12 <= h <= math.log2(n) + 1e-12
        perm = p[rng.permutation(n)]
        assert entropy_bits(perm) == pytest.approx(h, abs=1e-12)
    for n in range(2, 6):
        assert entropy_bits(uniform_policy(n)) == pytest.approx(math.log2(n), abs=1e-12)
        assert entropy_bits(np.eye(n)[0]) == 0.0


def test_sample_point_mass_always_first():
    rng = np.random.default_rng(0)
    assert all(sample([1.0, 0.0], rng) == 0 for _ in range(50))


def test_sample_is_reproducible_and_consumes_one_draw():
    p = [0.5, 0.5]
    rng_a = np.random.default_rng(123)
    rng_b = np.random.default_rng(123)
    draws_a = [sample(p, rng_a) for _ in range(20)]
    draws_b = [sample(p, rng_b) for _ in range(20)]
    assert draws_a == draws_b
    # after k samples the stream state equals after exactly k uniforms
    fresh = np.random.default_rng(123)
    fresh.random(20)
    assert rng_a.random() == fresh.random()


def test_sample_frequencies_match_probabilities():
    rng = np.random.default_rng(99)
    p = [0.2, 0.8]
    n = 100_000
    counts = np.zeros(2)
    for _ in range(n):
        counts[sample(p, rng)] += 1
    np.testing.assert_allclose(counts / n, p, atol=0.01)


def test_validate_policy_rejects_bad_vectors():
    with pytest.raises(ValueError):
        validate_policy([0.5, 0.6])
    with pytest.raises(ValueError):
        validate_policy([1.2, -0.2])
    with pytest.raises(ValueError):
        validate_policy([])
    validate_policy(uniform_policy(5))
