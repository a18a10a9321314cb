import itertools

import pytest

from qmem.codes import CssCode, builtin_code, hypergraph_product, steane_code
from qmem.gf2 import BinaryMatrix
from qmem.errors import CapacityError, DomainError
from qmem.sim import (
    BLOCK_SIZE,
    SimConfig,
    SimResult,
    build_decoder_table,
    exact_logical_error,
    simulate,
)
from qmem.test import depolarizing_levels, small_codes, syndrome_flip_levels
from qmem.test.pytest_util import assertClose, assertWithinSigma

MC_TRIALS = 40_000
# agreement with the exact rate is checked at three sigma on this many trials
SIGMA_TRIALS = 1_000_000


@pytest.fixture(scope="module")
def steane():
    return steane_code()


@pytest.fixture(scope="module")
def hgp_rep2():
    return builtin_code("hgp-rep2")


def _weight(word):
    return bin(word).count("1")


def test_steane_table_corrects_single_errors(steane):
    table = build_decoder_table(steane)
    assert table.n == 7
    assert table.x_bits == table.z_bits == 3
    for j in range(7):
        error = 1 << j
        assert table.decode_x(int(table.x_syndrome[error])) == error
        assert table.decode_z(int(table.z_syndrome[error])) == error
    assert table.decode_x(0) == 0


def test_corrections_have_minimum_weight(hgp_rep2):
    table = build_decoder_table(hgp_rep2)
    for syndrome_of, correction in (
        (table.x_syndrome, table.x_correction),
        (table.z_syndrome, table.z_correction),
    ):
        for pattern in range(1 << table.n):
            s = int(syndrome_of[pattern])
            fix = int(correction[s])
            assert int(syndrome_of[fix]) == s
            assert _weight(fix) <= _weight(pattern)


def test_stabilizers_are_trivial(steane):
    table = build_decoder_table(steane)
    # 0b1111000 is a row of the Hamming check read with bit j = column j
    assert table.x_trivial[0]
    assert table.x_trivial[0b1111000]
    assert not table.x_trivial[0b1111111]


def test_steane_regression_values(steane):
    assertClose(exact_logical_error(steane, 0.01, 0.0), 0.0015782072448388737, rel=1e-9)
    assertClose(exact_logical_error(steane, 1.0, 0.0), 575 / 729)
    assert exact_logical_error(steane, 0.0, 0.0) == 0.0


def _brute_force(code, p, q):
    """Scalar enumeration over Pauli patterns and syndrome flips."""
    table = build_decoder_table(code)

    def sector(syndrome_of, decode, trivial, bits):
        out = []
        for error in range(1 << code.n):
            total = 0.0
            for flips in range(1 << bits):
                w = _weight(flips)
                weight = q**w * (1 - q) ** (bits - w)
                residual = error ^ decode(int(syndrome_of[error]) ^ flips)
                residual ^= decode(int(syndrome_of[residual]))
                if not trivial[residual]:
                    total += weight
            out.append(total)
        return out

    fail_x = sector(table.x_syndrome, table.decode_x, table.x_trivial, table.x_bits)
    fail_z = sector(table.z_syndrome, table.decode_z, table.z_trivial, table.z_bits)
    total = 0.0
    for ex, ez in itertools.product(range(1 << code.n), repeat=2):
        prob = 1.0
        for j in range(code.n):
            hit = (ex >> j) & 1 or (ez >> j) & 1
            prob *= p / 3 if hit else 1 - p
        fx, fz = fail_x[ex], fail_z[ez]
        total += prob * (fx + fz - fx * fz)
    return total


@pytest.mark.parametrize("p, q", [(0.1, 0.0), (0.1, 0.05), (1.0, 0.2)])
def test_exact_matches_scalar_enumeration(hgp_rep2, p, q):
    assertClose(exact_logical_error(hgp_rep2, p, q), _brute_force(hgp_rep2, p, q), rel=1e-9)


def test_exact_grows_with_noise(steane):
    values = [exact_logical_error(steane, p, 0.0) for p in depolarizing_levels]
    assert values == sorted(values)
    assert exact_logical_error(steane, 0.01, 0.01) > exact_logical_error(steane, 0.01, 0.0)


def test_distance_three_beats_distance_two(steane, hgp_rep2):
    assert exact_logical_error(steane, 1e-2, 0.0) < exact_logical_error(hgp_rep2, 1e-2, 0.0)


@pytest.mark.slow
@pytest.mark.parametrize("code", small_codes, ids=lambda c: c.label)
@pytest.mark.parametrize("p_tilde", depolarizing_levels)
@pytest.mark.parametrize("q", syndrome_flip_levels)
def test_monte_carlo_agrees_with_exact(code, p_tilde, q):
    exact = exact_logical_error(code, p_tilde, q)
    result = simulate(SimConfig(code, p_tilde, q, trials=SIGMA_TRIALS, seed=7))
    assert result.trials_run == SIGMA_TRIALS
    assert result.failures == round(result.logical_error_estimate * SIGMA_TRIALS)
    assertWithinSigma(result.logical_error_estimate, exact, SIGMA_TRIALS)


def test_errors_accumulate_at_most_linearly(steane):
    p_tilde = 0.03
    single = exact_logical_error(steane, p_tilde, 0.0)
    three = simulate(SimConfig(steane, p_tilde, cycles=3, trials=MC_TRIALS, seed=11))
    assert three.logical_error_estimate > single
    assert three.logical_error_estimate <= 3 * single + 4 * (3 * single / MC_TRIALS) ** 0.5


def test_seed_determinism(steane):
    cfg = SimConfig(steane, 0.05, 0.01, cycles=2, trials=5000, seed=123)
    assert simulate(cfg) == simulate(cfg)


def test_thread_count_does_not_change_result(monkeypatch, hgp_rep2):
    cfg = SimConfig(hgp_rep2, 0.02, 0.01, trials=BLOCK_SIZE + 500, seed=5)
    monkeypatch.setenv("QMEM_THREADS", "1")
    serial = simulate(cfg)
    monkeypatch.setenv("QMEM_THREADS", "4")
    assert simulate(cfg) == serial


def test_noiseless_memory_never_fails(hgp_rep2):
    result = simulate(SimConfig(hgp_rep2, 0.0, 0.0, cycles=5, trials=1000))
    assert result.failures == 0
    assert result.confidence_halfwidth == 0.0


def test_result_serialisation():
    data = SimResult.from_counts(3, 1000).to_dict()
    assert data["failures"] == 3
    assert data["trials_run"] == 1000
    assertClose(data["logical_error_estimate"], 0.003)


@pytest.mark.parametrize(
    "kwargs",
    [dict(p_tilde=1.5), dict(p_tilde=0.1, q=-0.1), dict(p_tilde=0.1, cycles=0),
     dict(p_tilde=0.1, trials=0), dict(p_tilde=0.1, seed=-1)],
)
def test_config_validation(steane, kwargs):
    with pytest.raises(DomainError):
        SimConfig(steane, **kwargs)


def test_large_codes_are_refused():
    wide = hypergraph_product(BinaryMatrix(["110", "011"]))
    assert wide.n == 13
    with pytest.raises(CapacityError):
        build_decoder_table(wide)
    with pytest.raises(CapacityError):
        exact_logical_error(wide, 0.01, 0.0)

    tall = CssCode(BinaryMatrix(["000"] * 17), BinaryMatrix(["000"]))
    with pytest.raises(CapacityError):
        build_decoder_table(tall)

    zeros = BinaryMatrix(["0000000"] * 5)
    many_checks = CssCode(zeros, zeros)
    assert exact_logical_error(many_checks, 0.01, 0.0) >= 0.0
    with pytest.raises(CapacityError):
        exact_logical_error(many_checks, 0.01, 0.01)
