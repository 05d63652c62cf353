from dataclasses import dataclass
import logging

import numpy as np

from chandisc.errors import PreconditionError
from chandisc.qmat.channels import QuantumChannel, channel_from_choi, mix_channels, replacer_channel
from chandisc.qmat.states import DensityOperator, maximally_mixed

logger = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-10
# Keeps the residual channel well defined for channels that are themselves replacers.
EPSILON_CAP = 1.0 - 1e-6


def positivity_check(n: QuantumChannel) -> bool:
    """Whether the Choi matrix of `n` is positive definite."""
    return float(n.choi.eigenvalues[0]) > POSITIVITY_TOL


@dataclass(frozen=True)
class ReplacerDecomposition:
    """N = (1 - epsilon) residual + epsilon R_tau with tau maximally mixed on the output.

    `b` = 1 - epsilon + ||tau||_inf epsilon bounds the output operator norm of every
    copy of N, giving ||N^(x)k(rho)||_inf <= b^k.
    """

    epsilon: float
    tau: DensityOperator
    residual_channel: QuantumChannel
    b: float

    def recombined(self) -> QuantumChannel:
        replacer = replacer_channel(self.tau, self.residual_channel.dims_in)
        return mix_channels(
            [1.0 - self.epsilon, self.epsilon], [self.residual_channel, replacer]
        )


def replacer_decomposition(n: QuantumChannel) -> ReplacerDecomposition:
    if not positivity_check(n):
        raise PreconditionError("replacer decomposition needs a channel with positive definite Choi matrix")
    d_out = n.dim_out
    tau = maximally_mixed(n.dims_out)
    epsilon = min(d_out * float(n.choi.eigenvalues[0]), EPSILON_CAP)
    # Choi of R_tau is I_in (x) tau = I / d_out
    residual_choi = (n.choi.data - epsilon * np.eye(n.choi.dim) / d_out) / (1.0 - epsilon)
    residual = channel_from_choi(residual_choi, n.dims_in, n.dims_out)
    b = 1.0 - epsilon + epsilon / d_out
    logger.debug("replacer decomposition epsilon=%.12g b=%.12g", epsilon, b)
    return ReplacerDecomposition(epsilon, tau, residual, b)
