import math

import numpy as np
import pytest

from qmem.bounds import binary_entropy
from qmem.classical import (
    LOG2_3,
    bsc_capacity,
    classical_point,
    classical_ub,
    delta_h,
    delta_h_star,
    compare_bounds,
    max_gap_alpha,
)
from qmem.errors import DomainError
from qmem.test.pytest_util import assertNonincreasing


def test_delta_h_star_endpoints():
    p, value = delta_h_star(0.0)
    assert abs(p) <= 1e-6 and abs(value - LOG2_3) <= 1e-6
    p, value = delta_h_star(0.5)
    assert abs(p - 0.25) <= 1e-6 and abs(value - 1.0) <= 1e-6


def test_uniform_input_identity():
    for alpha in np.linspace(0.0, 0.5, 101):
        uniform = 2.0 - float(binary_entropy(0.25 + alpha / 2.0))
        assert abs(delta_h(float(alpha), 0.25) - uniform) <= 1e-12


def test_delta_h_vectorised():
    grid = np.linspace(0.0, 1.0, 7)
    values = delta_h(0.1, grid)
    assert values.shape == (7,)
    assert values[3] == pytest.approx(delta_h(0.1, 0.5))


def test_refined_bound_dominates_uniform():
    points = compare_bounds(500)
    assert len(points) == 500
    assert all(p.ub_new >= p.ub_old - 1e-12 for p in points)
    assert all(p.delta_h_star >= delta_h(p.alpha, 0.25) - 1e-12 for p in points)
    assert max_gap_alpha(points) < 0.2


def test_bound_endpoints():
    assert classical_ub(0.0) == 1.0
    assert classical_ub(0.5) == 0.0
    assert classical_ub(0.0, "old") == 1.0


def test_point_matches_variants():
    point = classical_point(0.1)
    assert point.ub_new == classical_ub(0.1, "new")
    assert point.ub_old == classical_ub(0.1, "old")
    assert point.gap == point.ub_new - point.ub_old
    assert math.isclose(bsc_capacity(0.1), 1.0 - float(binary_entropy(0.1)))


def test_custom_capacity():
    assert classical_ub(0.1, capacity=lambda alpha: 0.0) == 0.0
    half = classical_ub(0.1, capacity=lambda alpha: 0.5 * bsc_capacity(alpha))
    assert half == pytest.approx(0.5 * classical_ub(0.1))


def test_validation():
    with pytest.raises(DomainError):
        classical_ub(0.6)
    with pytest.raises(DomainError):
        classical_ub(0.1, "newer")
    with pytest.raises(DomainError):
        delta_h(0.1, 1.5)
    with pytest.raises(DomainError):
        compare_bounds(1)


def test_bounds_are_nonincreasing_in_alpha():
    grid = np.linspace(0.0, 0.5, 51).tolist()
    assertNonincreasing([delta_h_star(a)[1] for a in grid], slack=1e-9)
    for variant in ("new", "old"):
        values = [classical_ub(a, variant) for a in grid]
        assert all(0.0 <= v <= 1.0 for v in values)
        assertNonincreasing(values, slack=1e-12)
