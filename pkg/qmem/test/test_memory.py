import math
from fractions import Fraction

import numpy as np
import pytest

from qmem.config import load_record
from qmem.errors import ConfigError, DimensionError, DomainError, InfeasibleError
from qmem.memory import (
    ExpanderFamilyConstants,
    NoiseModel,
    bb_complexity,
    bb_logical_error,
    bb_multi_cycle_error,
    closed_form_rate,
    compose_local_stochastic,
    cycles,
    depolarizing_from_local_stochastic,
    design_rates,
    expander_complexity,
    expander_crossover_n,
    expander_logical_error,
    expander_threshold,
    fidelity_from_error,
    local_stochastic_from_depolarizing,
    multi_cycle_error,
    residual_noise,
    wait_noise,
)
from qmem.test.pytest_util import assertClose, assertNonincreasing


def _degree_grid(count=100):
    """(n_A, n_B, d_A, d_B) with n_A / n_B == d_B / d_A."""
    out = []
    for scale in (1, 2, 3):
        for d_B in range(2, 12):
            for d_A in range(1, d_B):
                g = math.gcd(d_A, d_B)
                out.append((scale * d_B // g, scale * d_A // g, d_A, d_B))
    return out[:count]


CONSTS = ExpanderFamilyConstants(d_A=7, d_B=8)


def test_expander_rate_is_exact():
    breakdown = expander_complexity(d_A=7, d_B=8)
    assert breakdown.storage_rate == Fraction(1, 2355)
    assert abs(float(breakdown.storage_rate) - 0.0004246) <= 1e-7
    assert breakdown.flags == ()


def test_expander_rate_does_not_depend_on_size():
    assert expander_complexity(16, 14, d_A=7, d_B=8).storage_rate == Fraction(1, 2355)
    assert closed_form_rate(7, 8) == Fraction(1, 2355)


@pytest.mark.parametrize("d_A, d_B", [(2, 3), (3, 4), (3, 5), (5, 6)])
def test_component_sum_matches_closed_form(d_A, d_B):
    assert expander_complexity(d_A=d_A, d_B=d_B).storage_rate == closed_form_rate(d_A, d_B)


@pytest.mark.parametrize("n_A, n_B, d_A, d_B", _degree_grid())
def test_component_sum_over_degree_grid(n_A, n_B, d_A, d_B):
    breakdown = expander_complexity(n_A, n_B, d_A=d_A, d_B=d_B)
    b = breakdown
    assert b.chi == b.n + b.n_a + b.n_H + b.n_synd + b.n_m + b.n_EC
    assert breakdown.chi == 3 * (n_A**2 + n_B**2) + 2 * n_A * n_B * (3 + d_A + d_B)
    assert breakdown.storage_rate == closed_form_rate(d_A, d_B)


def test_expander_rate_errors():
    with pytest.raises(DimensionError):
        expander_complexity(9, 7, d_A=7, d_B=8)
    with pytest.raises(DomainError):
        expander_complexity(d_A=8, d_B=7)
    with pytest.raises(DomainError):
        expander_complexity(16, None, d_A=7, d_B=8)


def test_equal_degrees_are_degenerate():
    breakdown = expander_complexity(d_A=3, d_B=3)
    assert breakdown.k == 0
    assert breakdown.storage_rate == 0
    assert breakdown.overhead == math.inf
    assert breakdown.flags == ("degenerate",)


def test_design_rates():
    r_c, r = design_rates(7, 8)
    assert r_c == Fraction(1, 8)
    assert r == Fraction(1, 113)


def test_bb_accounting():
    breakdown = bb_complexity(144, 12)
    assert breakdown.chi == 1728
    assert abs(float(breakdown.storage_rate) - 0.006944) <= 1e-6
    assert breakdown.overhead == 144
    with pytest.raises(DomainError):
        bb_complexity(145, 12)


def test_bb_accounting_on_random_even_n():
    rng = np.random.default_rng(50)
    for half in rng.integers(1, 5000, size=50).tolist():
        n = 2 * half
        k = int(rng.integers(0, n + 1))
        breakdown = bb_complexity(n, k)
        assert breakdown.chi == 12 * n
        assert breakdown.storage_rate == Fraction(k, 12 * n)


def test_threshold():
    assertClose(expander_threshold(CONSTS), 2.212e-19, rel=0.01)
    assert CONSTS.to_dict()["p_th"] == expander_threshold(CONSTS)


def test_bb_fitting_formula():
    assertClose(bb_logical_error(1e-3, 10), 2.3639e-7, rel=1e-3)
    assert bb_logical_error(0.0, 10) == 0.0
    with pytest.raises(DomainError):
        bb_logical_error(0.2, 10)


def test_bb_multi_cycle():
    single = math.log10(bb_logical_error(1e-3, 10))
    assertClose(bb_multi_cycle_error(1e-3, 10, 1e-3, 1e-6), single + 3.0, abs_=1e-12)


def test_wait_noise():
    assert wait_noise(0.0, 49e-6, 95e-6) == 0.0
    values = [wait_noise(t * 1e-6, 49e-6, 95e-6) for t in range(0, 2000, 50)]
    assert values == sorted(values)
    assertClose(wait_noise(1.0, 49e-6, 95e-6), 0.5)
    with pytest.raises(DomainError):
        wait_noise(1e-9, 0.0, 1e-6)


def test_noise_model():
    model = NoiseModel(p=0.01)
    assertClose(model.p_tilde, 0.015)
    waited = model.after_wait(50e-9)
    assert waited.p == wait_noise(50e-9, model.tau_r, model.tau_d)
    assert model.with_residual(CONSTS).p_r == 0.0
    with pytest.raises(DomainError):
        NoiseModel(p=1.5)


def test_noise_model_from_config():
    model = load_record(NoiseModel, {"p": 1e-3, "tau_r_us": 49, "tau_d_us": 95})
    assertClose(model.tau_r, 49e-6, rel=1e-12)
    assertClose(model.tau_d, 95e-6, rel=1e-12)
    with pytest.raises(ConfigError):
        load_record(NoiseModel, {"tau_r": 49e-6})
    with pytest.raises(ConfigError):
        load_record(NoiseModel, {"p_tilde": 0.1})
    with pytest.raises(ConfigError):
        load_record(NoiseModel, {"tau_r_us": 49, "tau_r_ns": 49000})


def test_composition():
    comp = compose_local_stochastic(0.1, 0.2, threshold=0.5)
    assertClose(comp.value, 0.3)
    assert comp.below_threshold is True and comp.flags == ()
    assert compose_local_stochastic(0.6, 0.6).flags == ("clamped",)


def test_residual_noise():
    assert residual_noise(0.0, CONSTS) == 0.0
    low, high = residual_noise(1e-6, CONSTS), residual_noise(1e-3, CONSTS)
    assert 0 < low < high < 1
    assertClose(residual_noise(1e-3, CONSTS, K=0.5), 0.5 * high)


def test_logical_error_above_threshold():
    p_th = expander_threshold(CONSTS)
    bound = expander_logical_error(1e4, 2.0 * p_th, 0.0, CONSTS)
    assert bound.log10_pe == 0.0
    assert bound.flags == ("above_threshold",)
    with pytest.raises(InfeasibleError):
        expander_crossover_n(2.0 * p_th, 0.0, CONSTS)


def test_logical_error_decreases_beyond_crossover():
    p = 0.1 * expander_threshold(CONSTS)
    start = expander_crossover_n(p, 0.0, CONSTS)
    sizes = [start * f for f in (1, 2, 4, 8, 16, 32)]
    values = [expander_logical_error(n, p, 0.0, CONSTS).log10_pe for n in sizes]
    assertNonincreasing(values)
    assert values[-1] < values[0]


def test_logical_error_near_threshold_is_flagged():
    p = expander_threshold(CONSTS) * (1.0 - 1e-9)
    assert "near_threshold" in expander_logical_error(100.0, p, 0.0, CONSTS).flags


def test_cycles_and_union_bound():
    assert cycles(1.0, 1.0) == 1
    assert cycles(1.0 + 1e-6, 1.0) == 2
    assert cycles(0.0, 1.0) == 1
    assert multi_cycle_error(-5.0, 10.0, 1.0) == -4.0
    assert multi_cycle_error(-0.5, 100.0, 1.0) == 0.0
    with pytest.raises(DomainError):
        cycles(1.0, 0.0)


def test_fidelity():
    assert fidelity_from_error(0.0) == 1.0
    with pytest.raises(DomainError):
        fidelity_from_error(1.5)


def test_noise_conversions():
    assert depolarizing_from_local_stochastic(1e-3) == pytest.approx(1.5e-3)
    assert local_stochastic_from_depolarizing(0.75) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        depolarizing_from_local_stochastic(-0.1)
