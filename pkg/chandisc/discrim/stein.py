from dataclasses import dataclass
from enum import Enum
import logging
import math

from chandisc.chandiv.divergence import check_budget, channel_divergence, check_channel_pair, tensor_witness
from chandisc.chandiv.optimizer import OptimizerConfig
from chandisc.discrim.strategies import ProductStrategy, Strategy, generate_testing_states
from chandisc.errors import DomainError
from chandisc.qmat.channels import QuantumChannel, tensor_power
from chandisc.qmat.states import PureStateVector
from chandisc.statediv.hypothesis import hypothesis_testing
from chandisc.statediv.kinds import HypothesisTesting, Umegaki
from chandisc.statediv.values import as_epsilon

logger = logging.getLogger(__name__)


class StrategyClass(Enum):
    PRO = "PRO"
    COH = "COH"


@dataclass(frozen=True)
class SteinPoint:
    copies: int
    rate: float
    witness: PureStateVector


def optimal_type2(
    strategy: Strategy, n: QuantumChannel, m: QuantumChannel, copies: int, eps: float
) -> float:
    """-(1/copies) log beta for the best test on the testing states of `strategy`."""
    eps = as_epsilon(eps)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    rho, sigma = generate_testing_states(strategy, n, m, copies)
    return hypothesis_testing(rho, sigma, eps).value / copies


def _repeated(witness: PureStateVector, copies: int) -> PureStateVector:
    result = witness
    for _ in range(copies - 1):
        result = tensor_witness(result, witness)
    return result


def stein_sequence(
    n: QuantumChannel,
    m: QuantumChannel,
    eps: float,
    n_max: int,
    strategy_class: StrategyClass | str = StrategyClass.PRO,
    cfg: OptimizerConfig | None = None,
) -> list[SteinPoint]:
    """Achievable Stein rates (1/k) D_H^eps at k = 1..n_max copies.

    PRO repeats the single-copy Umegaki witness k times. COH optimizes the joint
    input at every k, starting from that same repeated witness, so each COH rate
    is at least the PRO rate at the same k.
    """
    check_channel_pair(n, m)
    eps = as_epsilon(eps)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if n_max < 1:
        raise DomainError(f"n_max must be positive, got {n_max}")
    strategy_class = StrategyClass(strategy_class)
    cfg = cfg or OptimizerConfig()
    check_budget(n.dim_in, n.dim_out, n_max)

    single = channel_divergence(n, m, Umegaki(), cfg).witness
    points: list[SteinPoint] = []
    for k in range(1, n_max + 1):
        repeated = _repeated(single, k)
        if strategy_class is StrategyClass.PRO:
            strategy = ProductStrategy((single.density(),) * k)
            rate = optimal_type2(strategy, n, m, k, eps)
            witness = repeated
        else:
            result = channel_divergence(
                tensor_power(n, k), tensor_power(m, k), HypothesisTesting(eps), cfg, seeds=[repeated]
            )
            rate, witness = result.value.value / k, result.witness
        if math.isinf(rate):
            logger.info("%s strategy separates the channels perfectly at %d copies", strategy_class.value, k)
        logger.debug("%s Stein rate at %d copies: %.12g", strategy_class.value, k, rate)
        points.append(SteinPoint(k, rate, witness))
    return points
