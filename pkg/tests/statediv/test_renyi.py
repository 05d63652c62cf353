import math

import numpy as np
import pytest

from chandisc.errors import DomainError
from chandisc.qmat.channels import apply_channel
from chandisc.qmat.sampling import random_channel, random_density, random_probabilities, trial_rng
from chandisc.qmat.states import DensityOperator, diagonal_state, maximally_mixed
from chandisc.statediv.renyi import (
    binary_entropy,
    classical_relative_entropy,
    classical_renyi,
    dmax,
    fidelity,
    petz_renyi,
    sandwiched_renyi,
    umegaki,
)
from chandisc.statediv.values import RenyiOrder

ZERO = diagonal_state([1.0, 0.0])
HALF = maximally_mixed(2)


def full_rank_pair(index: int, d: int = 3) -> tuple[DensityOperator, DensityOperator]:
    rng = trial_rng(21, index)
    return random_density(rng, d), random_density(rng, d)


def softened(rho: DensityOperator) -> DensityOperator:
    d = rho.dim
    return DensityOperator.from_array(0.5 * rho.data + 0.5 * np.eye(d) / d)


def test_umegaki_identical():
    rho, _ = full_rank_pair(0)
    assert umegaki(rho, rho).value == pytest.approx(0.0, abs=1e-12)


def test_umegaki_pure_against_mixed():
    assert umegaki(ZERO, HALF).value == pytest.approx(1.0)


def test_umegaki_commuting_matches_classical():
    p, q = [0.5, 0.5], [0.25, 0.75]
    expected = classical_relative_entropy(np.array(p), np.array(q))
    assert umegaki(diagonal_state(p), diagonal_state(q)).value == pytest.approx(expected)


def test_umegaki_support_violation():
    result = umegaki(HALF, ZERO)
    assert result.value == math.inf
    assert not result.support_ok


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        umegaki(HALF, maximally_mixed(3))


@pytest.mark.parametrize("alpha", [0.3, 0.7, 2.0, 3.0])
def test_petz_identical(alpha):
    rho, _ = full_rank_pair(1)
    assert petz_renyi(rho, rho, alpha).value == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("alpha", [0.3, 0.7, 2.0, 5.0])
def test_petz_commuting_matches_classical(alpha):
    rng = np.random.default_rng(3)
    p, q = random_probabilities(rng, 4), random_probabilities(rng, 4)
    value = petz_renyi(diagonal_state(p), diagonal_state(q), RenyiOrder(alpha)).value
    assert value == pytest.approx(classical_renyi(p, q, alpha), abs=1e-10)


def test_petz_below_one_is_finite_on_support_violation():
    result = petz_renyi(HALF, ZERO, 0.5)
    assert math.isfinite(result.value)
    assert not result.support_ok
    assert petz_renyi(HALF, ZERO, 2.0).value == math.inf


def test_petz_near_one_approaches_umegaki():
    for index in range(100):
        rho, sigma = (softened(x) for x in full_rank_pair(index))
        assert petz_renyi(rho, sigma, 0.999).value == pytest.approx(
            umegaki(rho, sigma).value, abs=1e-3
        )


@pytest.mark.parametrize("alpha", [0.5, 0.7, 1.5, 4.0])
def test_sandwiched_identical(alpha):
    rho, _ = full_rank_pair(2)
    assert sandwiched_renyi(rho, rho, alpha).value == pytest.approx(0.0, abs=1e-10)


def test_sandwiched_half_is_fidelity():
    for index in range(100):
        rho, sigma = full_rank_pair(index)
        expected = -2.0 * math.log2(fidelity(rho, sigma))
        assert sandwiched_renyi(rho, sigma, 0.5).value == pytest.approx(expected, abs=1e-9)


def test_sandwiched_monotone_in_alpha():
    grid = [0.3, 0.5, 0.7, 0.9, 1.1, 1.5, 2.0, 3.0, 5.0]
    for index in range(20):
        rho, sigma = full_rank_pair(index)
        values = [sandwiched_renyi(rho, sigma, a).value for a in grid]
        assert all(b >= a - 1e-10 for a, b in zip(values, values[1:]))


def test_sandwiched_large_alpha_approaches_dmax():
    rho, sigma = full_rank_pair(5)
    assert sandwiched_renyi(rho, sigma, 1e7).value == pytest.approx(dmax(rho, sigma).value, abs=1e-5)


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
def test_petz_dominates_sandwiched(alpha):
    for index in range(20):
        rho, sigma = full_rank_pair(index)
        assert petz_renyi(rho, sigma, alpha).value >= sandwiched_renyi(rho, sigma, alpha).value - 1e-9


def test_continuity_at_one():
    for index in range(20):
        rho, sigma = full_rank_pair(index, 2)
        d = umegaki(rho, sigma).value
        for alpha in (1 - 1e-4, 1 + 1e-4):
            assert abs(petz_renyi(rho, sigma, alpha).value - d) <= 1e-3
            assert abs(sandwiched_renyi(rho, sigma, alpha).value - d) <= 1e-3


def test_dmax_cases():
    rho, _ = full_rank_pair(4)
    assert dmax(rho, rho).value == pytest.approx(0.0, abs=1e-12)
    assert dmax(ZERO, HALF).value == pytest.approx(1.0)
    p, q = np.array([0.2, 0.5, 0.3]), np.array([0.4, 0.4, 0.2])
    assert dmax(diagonal_state(p), diagonal_state(q)).value == pytest.approx(math.log2(max(p / q)))
    assert dmax(HALF, ZERO).value == math.inf


def test_data_processing_sample():
    kinds = [
        lambda r, s: umegaki(r, s).value,
        lambda r, s: petz_renyi(r, s, 0.7).value,
        lambda r, s: petz_renyi(r, s, 2.0).value,
        lambda r, s: sandwiched_renyi(r, s, 0.7).value,
        lambda r, s: sandwiched_renyi(r, s, 3.0).value,
        lambda r, s: dmax(r, s).value,
    ]
    for index in range(30):
        rng = trial_rng(31, index)
        rho, sigma = random_density(rng, 3), random_density(rng, 3)
        channel = random_channel(rng, 3, 2)
        out_rho, out_sigma = apply_channel(channel, rho), apply_channel(channel, sigma)
        for kind in kinds:
            assert kind(out_rho, out_sigma) <= kind(rho, sigma) + 1e-7


@pytest.mark.parametrize(
    "alpha, expected",
    [
        (0.5, 1.0),
        (0.25, 0.8112781244591328),
        (0.0, 0.0),
        (1.0, 0.0),
    ],
)
def test_binary_entropy(alpha, expected):
    assert binary_entropy(alpha) == pytest.approx(expected)
    assert binary_entropy(1 - alpha) == pytest.approx(expected)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5])
def test_renyi_order_rejects(alpha):
    with pytest.raises(DomainError):
        RenyiOrder(alpha)
