import numpy as np
import pytest

from chandisc.errors import DomainError, PreconditionError
from chandisc.qmat.operators import positive_part_trace_array
from chandisc.qmat.sampling import random_hermitian
from chandisc.qmat.states import diagonal_state
from chandisc.statediv.hypothesis import hypothesis_testing, hypothesis_testing_oracle
from chandisc.statediv.renyi import binary_entropy, petz_renyi
from chandisc.verify.state_checks import (
    ContinuityCheck,
    PetzLowerBoundCheck,
    TradeoffCheck,
    UniformBoundCheck,
    check_boundsdmin,
    check_continuity,
    check_data_processing,
    check_dh_sandwiched,
    check_geometric_mean,
    check_tradeoff,
    check_twomat,
    check_ubd,
)
from chandisc.verify.suite import ubd_pair


def test_twomat_degenerate_cases():
    m = random_hermitian(np.random.default_rng(0), 5).data
    zero = np.zeros_like(m)
    # N = 0 makes both sides tr M_+
    assert positive_part_trace_array(m - zero) == pytest.approx(
        positive_part_trace_array(m) + positive_part_trace_array(zero)
    )
    # M = N leaves the trace norm on the right
    rhs = 2 * positive_part_trace_array(m) - np.trace(m).real
    assert positive_part_trace_array(m - m) == 0.0
    assert rhs == pytest.approx(np.abs(np.linalg.eigvalsh(m)).sum())


@pytest.mark.parametrize(
    "check, kwargs",
    [
        (check_twomat, {"trials": 300, "dim": 8}),
        (check_boundsdmin, {"trials": 100, "dim": 3}),
        (check_dh_sandwiched, {"trials": 100, "dim": 3}),
        (check_continuity, {"trials": 50}),
        (check_geometric_mean, {"trials": 100}),
        (check_tradeoff, {"trials": 200}),
        (check_data_processing, {"trials": 20, "max_dim": 4}),
    ],
)
def test_checks_pass(check, kwargs):
    report = check(seed=11, **kwargs)
    assert report.passed, report.witness
    assert report.worst_margin <= 0.0


def test_checks_are_reproducible():
    assert check_boundsdmin(trials=20, seed=5) == check_boundsdmin(trials=20, seed=5)
    assert check_twomat(trials=20, seed=5) != check_twomat(trials=20, seed=6)


def test_boundsdmin_records_improvement():
    report = PetzLowerBoundCheck(3, trials=10, seed=2).run()
    alpha = report.witness["alpha"]
    assert report.witness["improvement"] == pytest.approx(binary_entropy(alpha) / (1 - alpha))


def test_boundsdmin_checks_improvement_in_every_trial():
    check = PetzLowerBoundCheck(3, trials=1)
    rng = np.random.default_rng(7)
    for index in range(5):
        bound, improvement = check.trial(index, rng)
        assert improvement.rhs == 0.0
        assert improvement.lhs < 1e-10
        assert improvement.margin(check.tolerance) <= 0
        assert improvement.witness is bound.witness


def test_boundsdmin_on_commuting_pair():
    p, q = np.array([0.6, 0.3, 0.1]), np.array([0.2, 0.2, 0.6])
    rho, sigma = diagonal_state(p), diagonal_state(q)
    dh = hypothesis_testing(rho, sigma, 0.2).value
    assert dh == pytest.approx(hypothesis_testing_oracle(p, q, 0.2), abs=1e-8)
    for alpha in (0.2, 0.5, 0.8):
        bound = petz_renyi(rho, sigma, alpha).value + alpha / (1 - alpha) * (
            binary_entropy(alpha) / alpha - np.log2(1 / 0.2)
        )
        assert bound <= dh + 1e-9


def test_continuity_records_variance():
    report = ContinuityCheck(2, trials=5, seed=1).run()
    assert report.passed
    assert report.witness["variance"] >= 0.0


def test_tradeoff_records_errors():
    report = TradeoffCheck(3, trials=5, seed=2).run()
    assert 0.0 <= report.witness["type1"] <= 1.0
    assert 0.0 <= report.witness["type2"] <= 1.0


def test_ubd_passes_on_qubit_pair():
    rho, sigma = ubd_pair()
    report = check_ubd(rho, sigma, copies=3)
    assert report.trials == 11**3
    assert report.passed


def test_ubd_at_s_zero_is_two():
    rho, sigma = ubd_pair()
    check = UniformBoundCheck(rho, sigma, copies=2, mus=[0.5], rs=[-1.0], ss=[0.0])
    (comparison,) = check.trial(0, np.random.default_rng(0))
    assert comparison.rhs == pytest.approx(2.0)
    assert comparison.lhs <= 1.0


def test_ubd_identical_states_vanish():
    rho, _ = ubd_pair()
    check = UniformBoundCheck(rho, rho, copies=2, mus=[0.3], rs=[0.0], ss=[0.5])
    (comparison,) = check.trial(0, np.random.default_rng(0))
    assert comparison.lhs == pytest.approx(0.0, abs=1e-12)


def test_ubd_rejects_support_violation():
    with pytest.raises(PreconditionError):
        UniformBoundCheck(diagonal_state([0.5, 0.5]), diagonal_state([1.0, 0.0]))


@pytest.mark.parametrize("kwargs", [{"copies": 5}, {"ss": [1.5]}])
def test_ubd_rejects_arguments(kwargs):
    rho, sigma = ubd_pair()
    with pytest.raises(DomainError):
        UniformBoundCheck(rho, sigma, **kwargs)
