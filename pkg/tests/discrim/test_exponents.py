import math

import numpy as np
import pytest

from chandisc.chandiv.optimizer import OptimizerConfig
from chandisc.discrim.exponents import (
    CurveCache,
    ExponentQuery,
    err_exponent,
    err_exponent_point,
    exponent_report,
    sc_exponent,
    sc_exponent_point,
)
from chandisc.errors import DomainError
from chandisc.qmat.channels import replacer_channel
from chandisc.qmat.sampling import random_channel
from chandisc.qmat.states import diagonal_state
from chandisc.statediv.kinds import PetzRenyi, SandwichedRenyi
from chandisc.statediv.renyi import petz_renyi, sandwiched_renyi

SMALL = OptimizerConfig(restarts=1, max_iterations=20)
RHO, SIGMA = diagonal_state([0.9, 0.1]), diagonal_state([0.4, 0.6])


def constant(c: float):
    return lambda alpha: c


@pytest.mark.parametrize(
    "rate, c, expected",
    [
        # zero curve: supremum as alpha -> inf
        (1.0, 0.0, 1.0),
        (2.5, 0.0, 2.5),
        # constant curve below the rate
        (1.0, 0.25, 0.75),
        # rate at or below the curve
        (1.0, 1.0, 0.0),
        (0.5, 2.0, 0.0),
    ],
)
def test_sc_exponent_constant_curves(rate, c, expected):
    assert sc_exponent(ExponentQuery(rate, constant(c))) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize(
    "rate, c, expected",
    [
        # zero curve with positive rate
        (1.0, 0.0, 0.0),
        # bracket vanishes
        (0.7, 0.7, 0.0),
        # curve above the rate
        (0.2, 0.7, math.inf),
    ],
)
def test_err_exponent_constant_curves(rate, c, expected):
    assert err_exponent(ExponentQuery(rate, constant(c))) == expected


def test_sc_exponent_matches_dense_grid():
    curve = lambda alpha: sandwiched_renyi(RHO, SIGMA, alpha).value
    # below the max-divergence, so the supremum is interior
    rate = 0.9
    value = sc_exponent(ExponentQuery(rate, curve))
    grid = 1.0 + np.logspace(-3, 3, 4000)
    dense = max((a - 1) / a * (rate - curve(a)) for a in grid)
    assert value >= dense - 1e-9
    assert value == pytest.approx(dense, abs=1e-4)


def test_err_exponent_matches_dense_grid():
    curve = lambda alpha: petz_renyi(RHO, SIGMA, alpha).value
    rate = 0.3
    point = err_exponent_point(ExponentQuery(rate, curve))
    grid = np.linspace(1e-3, 1 - 1e-3, 4000)
    dense = max((a - 1) / a * (rate - curve(a)) for a in grid)
    assert 0.0 < point.alpha < 1.0
    assert point.value >= dense - 1e-9
    assert point.value == pytest.approx(dense, abs=1e-4)


def test_sc_exponent_is_never_negative():
    point = sc_exponent_point(ExponentQuery(0.1, lambda alpha: 1.0 + alpha))
    assert point.value == 0.0
    assert point.alpha == 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rate": 0.0},
        {"rate": 1.0, "alpha_min": 1.0},
        {"rate": 1.0, "alpha_max": 1.0},
        {"rate": 1.0, "points_per_decade": 0},
    ],
)
def test_query_rejects(kwargs):
    with pytest.raises(DomainError):
        ExponentQuery(curve=constant(0.0), **kwargs)


def test_curve_cache_memoizes_and_warm_starts():
    rng = np.random.default_rng(14)
    n, m = random_channel(rng, 2, 2), random_channel(rng, 2, 2)
    cache = CurveCache(n, m, SandwichedRenyi, SMALL)
    first = cache(2.0)
    assert cache(2.0) == first
    cache(3.0)
    assert cache.evaluations == 2
    assert cache.witness(3.0).dims == (2, 2)
    assert cache.witness(5.0) is None


def test_report_for_equal_channels():
    channel = random_channel(np.random.default_rng(15), 2, 2)
    report = exponent_report(channel, channel, 0.8, SMALL, points_per_decade=2)
    assert report.strong_converse.value == pytest.approx(0.8, abs=1e-6)
    assert report.error.value == 0.0
    assert report.error_witness is None
    assert report.regularized_strong_converse is None


def test_report_for_replacers_matches_states():
    n, m = replacer_channel(RHO, 2), replacer_channel(SIGMA, 2)
    report = exponent_report(n, m, 1.2, SMALL, points_per_decade=4)
    sc = sc_exponent(
        ExponentQuery(1.2, lambda alpha: sandwiched_renyi(RHO, SIGMA, alpha).value, points_per_decade=4)
    )
    assert report.strong_converse.value == pytest.approx(sc, abs=1e-6)
    assert report.strong_converse_witness is not None
    alphas = [alpha for alpha, _ in report.sandwiched_curve]
    assert alphas == sorted(alphas)
    assert report.strong_converse.alpha in alphas
    for alpha, value in report.sandwiched_curve:
        assert value == pytest.approx(sandwiched_renyi(RHO, SIGMA, alpha).value, abs=1e-6)

    report = exponent_report(n, m, 0.3, SMALL, points_per_decade=4)
    err = err_exponent(
        ExponentQuery(0.3, lambda alpha: petz_renyi(RHO, SIGMA, alpha).value, points_per_decade=4)
    )
    assert report.error.value == pytest.approx(err, abs=1e-6)
    assert report.petz_curve
    for alpha, value in report.petz_curve:
        assert value == pytest.approx(petz_renyi(RHO, SIGMA, alpha).value, abs=1e-6)


def test_report_is_deterministic():
    rng = np.random.default_rng(16)
    n, m = random_channel(rng, 2, 2), random_channel(rng, 2, 2)
    first = exponent_report(n, m, 0.5, SMALL, points_per_decade=1)
    second = exponent_report(n, m, 0.5, SMALL, points_per_decade=1)
    assert first.strong_converse == second.strong_converse
    assert first.error == second.error


def test_report_with_regularized_curves():
    n, m = replacer_channel(RHO, 2), replacer_channel(SIGMA, 2)
    cfg = OptimizerConfig(restarts=1, max_iterations=3)
    report = exponent_report(n, m, 1.2, cfg, copies=2, points_per_decade=1)
    # replacer curves are additive, so the regularized estimate repeats the one-shot curve
    assert report.regularized_strong_converse.value == pytest.approx(report.strong_converse.value, abs=1e-6)
    assert report.regularized_error.value == pytest.approx(report.error.value, abs=1e-6)


def test_petz_family_is_accepted():
    rng = np.random.default_rng(17)
    n = random_channel(rng, 2, 2)
    cache = CurveCache(n, n, PetzRenyi, SMALL)
    assert cache(0.5) == pytest.approx(0.0, abs=1e-10)
