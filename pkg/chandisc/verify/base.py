from abc import ABC, abstractmethod
from dataclasses import dataclass, field
import logging
import math
from typing import Any, ClassVar

import numpy as np

from chandisc.chandiv.optimizer import run_parallel
from chandisc.errors import DomainError
from chandisc.qmat.sampling import trial_rng

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Comparison:
    """One asserted inequality lhs <= rhs, with the inputs that produced it."""

    lhs: float
    rhs: float
    witness: dict[str, Any] = field(default_factory=dict)

    def margin(self, tolerance: float) -> float:
        if self.lhs == self.rhs:
            return -tolerance
        if math.isnan(self.lhs) or math.isnan(self.rhs):
            return math.inf
        return self.lhs - self.rhs - tolerance


@dataclass(frozen=True)
class CheckReport:
    """Summary of a check; a trial is a violation exactly when its margin is positive."""

    name: str
    trials: int
    violations: int
    worst_margin: float
    witness: dict[str, Any]
    seed: int

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "trials": self.trials,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "seed": self.seed,
            "witness": self.witness,
        }


class BaseCheck(ABC):
    """A randomized inequality check.

    Trial `index` draws its inputs from `trial_rng(seed, index)` and returns the
    comparisons it asserts. Trials are independent, so the report does not depend
    on `workers`.
    """

    name: ClassVar[str]
    default_tolerance: ClassVar[float] = DEFAULT_TOLERANCE

    def __init__(self, trials: int, seed: int = 0, workers: int = 1, tolerance: float | None = None):
        if trials < 1:
            raise DomainError(f"a check needs at least one trial, got {trials}")
        self.trials = trials
        self.seed = seed
        self.workers = workers
        self.tolerance = self.default_tolerance if tolerance is None else tolerance

    @abstractmethod
    def trial(self, index: int, rng: np.random.Generator) -> list[Comparison]:
        pass

    def _run_trial(self, index: int) -> tuple[float, dict[str, Any]]:
        comparisons = self.trial(index, trial_rng(self.seed, index))
        worst = max(comparisons, key=lambda c: c.margin(self.tolerance))
        return worst.margin(self.tolerance), {"trial": index, "lhs": worst.lhs, "rhs": worst.rhs, **worst.witness}

    def run(self) -> CheckReport:
        outcomes = run_parallel(self._run_trial, list(range(self.trials)), self.workers)
        violations = sum(1 for margin, _ in outcomes if margin > 0.0)
        # first trial wins ties, so the report is independent of scheduling
        worst_margin, witness = max(outcomes, key=lambda o: o[0])
        logger.info(
            "%s: %d/%d violations, worst margin %.3e", self.name, violations, self.trials, worst_margin
        )
        return CheckReport(self.name, self.trials, violations, worst_margin, witness, self.seed)
