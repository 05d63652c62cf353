import math

import numpy as np
import pytest

from chandisc.chandiv.divergence import channel_divergence
from chandisc.chandiv.optimizer import OptimizerConfig
from chandisc.discrim.stein import StrategyClass, optimal_type2, stein_sequence
from chandisc.discrim.strategies import CoherentStrategy, ProductStrategy, SequentialStrategy
from chandisc.errors import DomainError, ResourceError
from chandisc.qmat.channels import identity_channel, replacer_channel, unitary_channel
from chandisc.qmat.sampling import random_channel, random_density
from chandisc.qmat.states import diagonal_state, maximally_entangled
from chandisc.statediv.hypothesis import hypothesis_testing_oracle
from chandisc.statediv.kinds import SandwichedRenyi
from chandisc.statediv.renyi import binary_entropy, classical_relative_entropy, classical_renyi

SMALL = OptimizerConfig(restarts=2, max_iterations=40)
P, Q = np.array([0.9, 0.1]), np.array([0.4, 0.6])


@pytest.fixture
def replacers():
    return replacer_channel(diagonal_state(P), 2), replacer_channel(diagonal_state(Q), 2)


def kron_power(v: np.ndarray, k: int) -> np.ndarray:
    result = v
    for _ in range(k - 1):
        result = np.kron(result, v)
    return result


@pytest.mark.parametrize("eps", [0.1, 0.4])
def test_equal_channels_for_every_strategy(eps):
    channel = random_channel(np.random.default_rng(8), 2, 2)
    phi = maximally_entangled(2).density()
    expected = -math.log2(1 - eps) / 2
    for strategy in (
        ProductStrategy([phi, phi]),
        CoherentStrategy(random_density(np.random.default_rng(9), (2, 2, 2)), 2),
        SequentialStrategy(phi, [unitary_channel(np.eye(4), (2, 2))]),
    ):
        assert optimal_type2(strategy, channel, channel, 2, eps) == pytest.approx(expected, abs=1e-9)


def test_replacers_are_strategy_independent(replacers):
    n, m = replacers
    eps = 0.1
    expected = hypothesis_testing_oracle(kron_power(P, 2), kron_power(Q, 2), eps) / 2
    rng = np.random.default_rng(10)
    for strategy in (
        ProductStrategy([random_density(rng, (2, 2)), random_density(rng, (2, 2))]),
        CoherentStrategy(random_density(rng, (3, 2, 2)), 2),
    ):
        assert optimal_type2(strategy, n, m, 2, eps) == pytest.approx(expected, abs=1e-8)


def test_optimal_type2_rejects_eps():
    channel = identity_channel(2)
    with pytest.raises(DomainError):
        optimal_type2(ProductStrategy([maximally_entangled(2).density()]), channel, channel, 1, 0.0)


def test_product_sequence_for_replacers(replacers):
    n, m = replacers
    points = stein_sequence(n, m, 0.1, 4, StrategyClass.PRO, SMALL)
    assert [p.copies for p in points] == [1, 2, 3, 4]
    assert points[0].rate == pytest.approx(math.log2(2.5), abs=1e-8)
    # beta = 0.0256 + (0.2439 / 0.2916) * 0.1536 at four copies
    assert points[3].rate == pytest.approx(0.67457, abs=1e-4)
    for point in points:
        expected = hypothesis_testing_oracle(kron_power(P, point.copies), kron_power(Q, point.copies), 0.1)
        assert point.rate == pytest.approx(expected / point.copies, abs=1e-8)
    assert points[3].witness.dims == (2,) * 8


def test_product_rates_sit_between_renyi_bounds(replacers):
    n, m = replacers
    eps = 0.1
    points = stein_sequence(n, m, eps, 4, StrategyClass.PRO, SMALL)
    for point in points:
        k = point.copies
        upper = classical_renyi(P, Q, 1.5) + 3 * math.log2(1 / (1 - eps)) / k
        lower = max(
            (k * classical_renyi(P, Q, a) + a / (1 - a) * (binary_entropy(a) / a - math.log2(1 / eps))) / k
            for a in np.linspace(0.05, 0.95, 19)
        )
        assert lower <= point.rate + 1e-9
        assert point.rate <= upper + 1e-9
    limit = classical_relative_entropy(P, Q)
    assert abs(points[3].rate - limit) < abs(points[0].rate - limit)


def test_equal_channels_sequence():
    channel = random_channel(np.random.default_rng(11), 2, 2)
    for point in stein_sequence(channel, channel, 0.2, 3, "PRO", SMALL):
        assert point.rate == pytest.approx(-math.log2(0.8) / point.copies, abs=1e-9)


def test_coherent_dominates_product():
    rng = np.random.default_rng(12)
    n, m = random_channel(rng, 2, 2), random_channel(rng, 2, 2)
    cfg = OptimizerConfig(restarts=1, max_iterations=10)
    product = stein_sequence(n, m, 0.2, 2, StrategyClass.PRO, cfg)
    coherent = stein_sequence(n, m, 0.2, 2, StrategyClass.COH, cfg)
    for p, c in zip(product, coherent):
        assert c.rate >= p.rate - 1e-6


@pytest.mark.parametrize("alpha", [1.5, 2.0, 4.0])
def test_product_rate_below_sandwiched_bound(alpha):
    rng = np.random.default_rng(13)
    n, m = random_channel(rng, 2, 2), random_channel(rng, 2, 2)
    eps = 0.2
    point = stein_sequence(n, m, eps, 1, StrategyClass.PRO, SMALL)[0]
    sandwiched = channel_divergence(n, m, SandwichedRenyi(alpha), SMALL, seeds=[point.witness]).value.value
    assert point.rate <= sandwiched + alpha / (alpha - 1) * math.log2(1 / (1 - eps)) + 1e-9


def test_sequence_rejects_blow_up():
    channel = identity_channel(2)
    with pytest.raises(ResourceError):
        stein_sequence(channel, channel, 0.1, 5, StrategyClass.COH, SMALL)


@pytest.mark.parametrize("eps, n_max", [(1.0, 2), (0.1, 0)])
def test_sequence_rejects_arguments(eps, n_max):
    channel = identity_channel(2)
    with pytest.raises(DomainError):
        stein_sequence(channel, channel, eps, n_max, StrategyClass.PRO, SMALL)
