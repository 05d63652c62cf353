"""Checks of channel-level statements: symmetric inputs, output norms and the divergence order."""

from chandisc.chandiv.divergence import (
    amortized_lowerbound,
    check_budget,
    check_channel_pair,
    regularized_estimate,
)
from chandisc.chandiv.optimizer import OptimizerConfig
from chandisc.chandiv.positivity import replacer_decomposition
from chandisc.errors import DomainError, ResourceError
from chandisc.interchange import encode_complex_array
from chandisc.qmat.channels import QuantumChannel, apply_channel, tensor_power
from chandisc.qmat.operators import DENSE_LIMIT, operator_norm
from chandisc.qmat.sampling import random_density, random_pure_state
from chandisc.qmat.states import DensityOperator
from chandisc.qmat.symmetry import symmetric_purification, symmetrize
from chandisc.statediv.hypothesis import hypothesis_testing
from chandisc.statediv.kinds import Umegaki
from chandisc.verify.base import BaseCheck, CheckReport, Comparison

SYMMETRIZATION_TOLERANCE = 1e-8
ORDER_TOLERANCE = 1e-5
MAX_NORM_COPIES = 3


def _pair_outputs(n: QuantumChannel, m: QuantumChannel, state: DensityOperator, acting: list[int]):
    return apply_channel(n, state, acting), apply_channel(m, state, acting)


class SymmetrizationCheck(BaseCheck):
    """Two-copy D_H does not drop when a random input psi on (RA)^2 is replaced by the
    symmetric purification of its permutation average."""

    name = "symmetrization"
    default_tolerance = SYMMETRIZATION_TOLERANCE

    def __init__(self, n: QuantumChannel, m: QuantumChannel, eps: float = 0.2, **kwargs):
        check_channel_pair(n, m)
        if not 0.0 < eps < 1.0:
            raise DomainError(f"eps must lie in (0, 1), got {eps}")
        # the purified input doubles every subsystem of both copies
        if (n.dim_in**3 * max(n.dim_in, n.dim_out)) ** 2 > DENSE_LIMIT:
            raise ResourceError(f"symmetric purification of two copies of {n.dims_in} exceeds {DENSE_LIMIT}")
        super().__init__(**kwargs)
        self.pair = tensor_power(n, 2), tensor_power(m, 2)
        self.eps = eps
        self.block = n.dims_in + n.dims_in

    def trial(self, index, rng):
        n2, m2 = self.pair
        k = len(self.block) // 2
        psi = random_pure_state(rng, self.block * 2).density()
        # copy c is (R_c, A_c); the channel acts on every A_c
        acting = [len(self.block) * c + k + s for c in range(2) for s in range(k)]
        before = hypothesis_testing(*_pair_outputs(n2, m2, psi, acting), self.eps).value

        phi = symmetric_purification(symmetrize(psi, 2), 2).density()
        # copy c of phi is (R_c, A_c, R'_c, A'_c)
        width = 2 * len(self.block)
        acting_phi = [width * c + k + s for c in range(2) for s in range(k)]
        after = hypothesis_testing(*_pair_outputs(n2, m2, phi, acting_phi), self.eps).value
        return [Comparison(before, after, {"psi": encode_complex_array(psi.data)})]


class OutputNormCheck(BaseCheck):
    """||(id (x) N^(x)k)(rho)||_inf <= b^k for the b of the replacer decomposition of N."""

    name = "infnorm"

    def __init__(self, channel: QuantumChannel, copies: int = MAX_NORM_COPIES, **kwargs):
        if not 1 <= copies <= MAX_NORM_COPIES:
            raise DomainError(f"copies must lie in [1, {MAX_NORM_COPIES}], got {copies}")
        check_budget(channel.dim_in, channel.dim_out, copies)
        self.decomposition = replacer_decomposition(channel)
        super().__init__(**kwargs)
        self.channel = tensor_power(channel, copies)
        self.copies = copies
        self.block = channel.dims_in + channel.dims_in

    def trial(self, index, rng):
        dims = self.block * self.copies
        # pure inputs are the extreme points; odd trials also try mixed ones
        if index % 2:
            rho = random_density(rng, dims)
        else:
            rho = random_pure_state(rng, dims).density()
        k = len(self.block) // 2
        acting = [len(self.block) * c + k + s for c in range(self.copies) for s in range(k)]
        norm = operator_norm(apply_channel(self.channel, rho, acting))
        bound = self.decomposition.b**self.copies
        return [Comparison(norm, bound, {"b": self.decomposition.b, "copies": self.copies})]


class OrderRelationCheck(BaseCheck):
    """One-shot, two-copy regularized and amortized Umegaki estimates are ordered a_1 <= a_2 and a_1 <= amortized."""

    name = "order"
    default_tolerance = ORDER_TOLERANCE

    def __init__(self, n: QuantumChannel, m: QuantumChannel, cfg: OptimizerConfig | None = None, **kwargs):
        check_channel_pair(n, m)
        kwargs.setdefault("trials", 1)
        super().__init__(**kwargs)
        self.n, self.m = n, m
        self.cfg = (cfg or OptimizerConfig()).replace(seed=self.seed)

    def trial(self, index, rng):
        a1, a2 = (p.value for p in regularized_estimate(self.n, self.m, Umegaki(), 2, self.cfg))
        amortized = amortized_lowerbound(self.n, self.m, Umegaki(), self.n.dim_in, self.cfg)
        witness = {"a1": a1, "a2": a2, "amortized": amortized}
        return [Comparison(a1, a2, witness), Comparison(a1, amortized, witness)]


def check_symmetrization(
    n: QuantumChannel, m: QuantumChannel, eps: float = 0.2, trials: int = 200, seed: int = 0, workers: int = 1
) -> CheckReport:
    return SymmetrizationCheck(n, m, eps, trials=trials, seed=seed, workers=workers).run()


def check_infnorm_bound(
    channel: QuantumChannel, copies: int = MAX_NORM_COPIES, trials: int = 200, seed: int = 0, workers: int = 1
) -> CheckReport:
    return OutputNormCheck(channel, copies, trials=trials, seed=seed, workers=workers).run()


def check_order_relation(
    n: QuantumChannel, m: QuantumChannel, cfg: OptimizerConfig | None = None, seed: int = 0
) -> CheckReport:
    return OrderRelationCheck(n, m, cfg, trials=1, seed=seed).run()
