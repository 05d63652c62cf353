from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from chandisc.errors import DomainError
from chandisc.qmat.states import DensityOperator
from chandisc.statediv.hypothesis import hypothesis_testing_array
from chandisc.statediv.renyi import (
    check_pair,
    dmax_array,
    petz_renyi_array,
    sandwiched_renyi_array,
    umegaki_array,
)
from chandisc.statediv.values import DivergenceValue, as_alpha, as_epsilon


class BaseDivergence(ABC):
    """A state divergence of fixed kind and parameters.

    Channel optimizers, strategies and the command line all dispatch through
    these objects so that every consumer sees the same set of kinds.
    """

    name: ClassVar[str]

    @abstractmethod
    def evaluate_arrays(self, rho: np.ndarray, sigma: np.ndarray) -> DivergenceValue:
        pass

    def evaluate(self, rho: DensityOperator, sigma: DensityOperator) -> DivergenceValue:
        return self.evaluate_arrays(*check_pair(rho, sigma))

    @property
    def label(self) -> str:
        return self.name


class Umegaki(BaseDivergence):
    name = "umegaki"

    def evaluate_arrays(self, rho, sigma):
        return umegaki_array(rho, sigma)


class MaxRelative(BaseDivergence):
    name = "dmax"

    def evaluate_arrays(self, rho, sigma):
        return dmax_array(rho, sigma)


@dataclass(frozen=True)
class PetzRenyi(BaseDivergence):
    alpha: float
    name: ClassVar[str] = "petz"

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_alpha(self.alpha))

    def evaluate_arrays(self, rho, sigma):
        return petz_renyi_array(rho, sigma, self.alpha)

    @property
    def label(self) -> str:
        return f"petz({self.alpha:g})"


@dataclass(frozen=True)
class SandwichedRenyi(BaseDivergence):
    alpha: float
    name: ClassVar[str] = "sandwiched"

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_alpha(self.alpha))

    def evaluate_arrays(self, rho, sigma):
        return sandwiched_renyi_array(rho, sigma, self.alpha)

    @property
    def label(self) -> str:
        return f"sandwiched({self.alpha:g})"


@dataclass(frozen=True)
class HypothesisTesting(BaseDivergence):
    epsilon: float
    name: ClassVar[str] = "hypothesis"

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_epsilon(self.epsilon))

    def evaluate_arrays(self, rho, sigma):
        return hypothesis_testing_array(rho, sigma, self.epsilon)

    @property
    def label(self) -> str:
        return f"hypothesis({self.epsilon:g})"


KIND_NAMES = ("umegaki", "petz", "sandwiched", "dmax", "hypothesis")


def make_divergence(
    name: str, alpha: float | None = None, epsilon: float | None = None
) -> BaseDivergence:
    match name:
        case "umegaki":
            return Umegaki()
        case "dmax":
            return MaxRelative()
        case "petz" | "sandwiched":
            if alpha is None:
                raise DomainError(f"divergence kind {name!r} needs an order alpha")
            return PetzRenyi(alpha) if name == "petz" else SandwichedRenyi(alpha)
        case "hypothesis":
            if epsilon is None:
                raise DomainError("divergence kind 'hypothesis' needs an error threshold epsilon")
            return HypothesisTesting(epsilon)
    raise DomainError(f"unknown divergence kind {name!r}; expected one of {', '.join(KIND_NAMES)}")
