import numpy as np
import pytest

from chandisc.chandiv.optimizer import OptimizerConfig
from chandisc.errors import DomainError, PreconditionError
from chandisc.qmat.channels import (
    amplitude_damping_channel,
    depolarizing_channel,
    identity_channel,
    replacer_channel,
)
from chandisc.qmat.sampling import random_channel
from chandisc.qmat.states import diagonal_state
from chandisc.statediv.renyi import umegaki
from chandisc.verify.channel_checks import (
    OutputNormCheck,
    SymmetrizationCheck,
    check_infnorm_bound,
    check_order_relation,
    check_symmetrization,
)

SMALL = OptimizerConfig(restarts=2, max_iterations=40)


def test_symmetrization_passes():
    n, m = amplitude_damping_channel(0.3), depolarizing_channel(0.4)
    report = check_symmetrization(n, m, 0.2, trials=3, seed=1)
    assert report.passed, report.witness


def test_symmetrization_rejects_eps():
    channel = identity_channel(2)
    with pytest.raises(DomainError):
        SymmetrizationCheck(channel, channel, 1.0, trials=1)


@pytest.mark.parametrize("copies", [1, 2, 3])
def test_infnorm_bound_on_depolarizing(copies):
    report = check_infnorm_bound(depolarizing_channel(0.5), copies, trials=10, seed=2)
    assert report.passed
    assert report.witness["b"] == pytest.approx(0.75)


def test_infnorm_bound_on_full_replacer():
    tau = diagonal_state([0.7, 0.3])
    check = OutputNormCheck(replacer_channel(tau, 2), 2, trials=4, seed=3)
    (comparison,) = check.trial(0, np.random.default_rng(0))
    # constant output tau (x) tau next to the reference
    assert comparison.lhs <= 0.49 + 1e-9
    assert check.run().passed


def test_infnorm_bound_needs_positive_definite_choi():
    with pytest.raises(PreconditionError):
        OutputNormCheck(identity_channel(2), 2, trials=1)


def test_infnorm_bound_rejects_copies():
    with pytest.raises(DomainError):
        OutputNormCheck(depolarizing_channel(0.5), 4, trials=1)


def test_order_relation_on_random_pair():
    rng = np.random.default_rng(21)
    n, m = random_channel(rng, 2, 2), random_channel(rng, 2, 2)
    report = check_order_relation(n, m, SMALL)
    assert report.passed
    assert report.trials == 1


def test_order_relation_on_replacers():
    rho, sigma = diagonal_state([0.9, 0.1]), diagonal_state([0.4, 0.6])
    report = check_order_relation(replacer_channel(rho, 2), replacer_channel(sigma, 2), SMALL)
    assert report.passed
    expected = umegaki(rho, sigma).value
    assert report.witness["a1"] == pytest.approx(expected, abs=1e-6)
    assert report.witness["a2"] == pytest.approx(expected, abs=1e-6)
    assert report.witness["amortized"] == pytest.approx(expected, abs=1e-5)


def test_order_relation_on_equal_channels():
    channel = amplitude_damping_channel(0.2)
    report = check_order_relation(channel, channel, SMALL)
    assert report.passed
    assert report.witness["a1"] == pytest.approx(0.0, abs=1e-9)
    assert report.witness["amortized"] == pytest.approx(0.0, abs=1e-6)
