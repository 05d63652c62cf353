from collections.abc import Callable
from dataclasses import dataclass
import logging

from chandisc.chandiv.optimizer import OptimizerConfig
from chandisc.errors import DomainError
from chandisc.qmat.channels import amplitude_damping_channel, depolarizing_channel
from chandisc.qmat.states import DensityOperator, diagonal_state
from chandisc.verify.base import CheckReport
from chandisc.verify.channel_checks import (
    MAX_NORM_COPIES,
    OrderRelationCheck,
    OutputNormCheck,
    SymmetrizationCheck,
)
from chandisc.verify.glt import GltConstancyCheck
from chandisc.verify.state_checks import (
    ContinuityCheck,
    DataProcessingCheck,
    GeometricMeanCheck,
    PetzLowerBoundCheck,
    SandwichedUpperBoundCheck,
    TradeoffCheck,
    TwoMatrixCheck,
    UniformBoundCheck,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SuiteOptions:
    """Shared knobs; `trials` of None means each check's full default count."""

    trials: int | None = None
    seed: int = 0
    workers: int = 1
    tolerance: float | None = None
    restarts: int = 8

    def count(self, default: int) -> int:
        return default if self.trials is None else self.trials

    def common(self, default_trials: int) -> dict:
        return {
            "trials": self.count(default_trials),
            "seed": self.seed,
            "workers": self.workers,
            "tolerance": self.tolerance,
        }


def ubd_pair() -> tuple[DensityOperator, DensityOperator]:
    """A full-rank, non-commuting qubit pair."""
    rho = DensityOperator.from_array([[0.5, 0.4], [0.4, 0.5]])
    return rho, diagonal_state([0.7, 0.3])


def _ubd(o: SuiteOptions) -> list[CheckReport]:
    rho, sigma = ubd_pair()
    return [UniformBoundCheck(rho, sigma, copies=3, workers=o.workers, tolerance=o.tolerance).run()]


def _symmetrization(o: SuiteOptions) -> list[CheckReport]:
    n, m = amplitude_damping_channel(0.3), depolarizing_channel(0.4)
    return [SymmetrizationCheck(n, m, 0.2, **o.common(200)).run()]


def _infnorm(o: SuiteOptions) -> list[CheckReport]:
    channel = depolarizing_channel(0.5)
    return [OutputNormCheck(channel, k, **o.common(200)).run() for k in range(1, MAX_NORM_COPIES + 1)]


def _order(o: SuiteOptions) -> list[CheckReport]:
    cfg = OptimizerConfig(restarts=o.restarts, workers=o.workers)
    n, m = amplitude_damping_channel(0.3), depolarizing_channel(0.4)
    return [OrderRelationCheck(n, m, cfg, seed=o.seed, tolerance=o.tolerance).run()]


SUITES: dict[str, Callable[[SuiteOptions], list[CheckReport]]] = {
    "twomat": lambda o: [TwoMatrixCheck(8, **o.common(10_000)).run()],
    "boundsdmin": lambda o: [PetzLowerBoundCheck(4, **o.common(10_000)).run()],
    "dh-sandwiched": lambda o: [SandwichedUpperBoundCheck(4, **o.common(10_000)).run()],
    "ubd": _ubd,
    "symmetrization": _symmetrization,
    "infnorm": _infnorm,
    "glt": lambda o: [GltConstancyCheck(**o.common(64)).run()],
    "order": _order,
    "continuity": lambda o: [ContinuityCheck(3, **o.common(500)).run()],
    "dpi": lambda o: [DataProcessingCheck(6, **o.common(1000)).run()],
    "geomean": lambda o: [GeometricMeanCheck(6, **o.common(1000)).run()],
    "tradeoff": lambda o: [TradeoffCheck(4, **o.common(500)).run()],
}
SUITE_NAMES = ("all", *SUITES)


def run_suite(name: str, options: SuiteOptions | None = None) -> list[CheckReport]:
    options = options or SuiteOptions()
    if name == "all":
        selected = list(SUITES)
    elif name in SUITES:
        selected = [name]
    else:
        raise DomainError(f"unknown suite {name!r}; expected one of {', '.join(SUITE_NAMES)}")
    reports = []
    for suite in selected:
        logger.info("running suite %s", suite)
        reports.extend(SUITES[suite](options))
    return reports
