"""The counterexample to the proposed continuity bound on the variance of log tau.

For sigma = I/d and tau = t P + 3t (I - P), with t = 1/(2d) and P a projector of
rank d/2, the variance of log tau under sigma is (log 3)^2 / 4 for every even d,
while the proposed bound ||sigma||_inf log^2(1 + 1/t - d) = log^2(1 + d)/d goes to
zero. The bound fails from some even d onwards.
"""

from dataclasses import dataclass
import math

import numpy as np

from chandisc.errors import DomainError
from chandisc.verify.base import BaseCheck, Comparison

GLT_LHS = math.log2(3.0) ** 2 / 4.0
GLT_CONSTANCY_TOL = 1e-12
GLT_SCAN_LIMIT = 1 << 20


@dataclass(frozen=True)
class GltRecord:
    d: int
    lhs: float
    rhs: float
    violated: bool


def counterexample_glt(d: int) -> GltRecord:
    if d < 2 or d % 2:
        raise DomainError(f"d must be an even integer >= 2, got {d}")
    t = 1.0 / (2 * d)
    # tau and sigma = I/d commute, so both traces are averages over the spectrum of tau
    spectrum = np.full(d, 3.0 * t)
    spectrum[: d // 2] = t
    logs = np.log2(spectrum)
    lhs = float(np.mean((logs - np.mean(logs)) ** 2))
    rhs = math.log2(1.0 + 1.0 / t - d) ** 2 / d
    return GltRecord(d, lhs, rhs, lhs > rhs)


def minimal_glt_violation(limit: int = GLT_SCAN_LIMIT) -> int:
    """Smallest even d at which the proposed bound fails."""
    for d in range(2, limit + 1, 2):
        if counterexample_glt(d).violated:
            return d
    raise DomainError(f"no violation for even d up to {limit}")


class GltConstancyCheck(BaseCheck):
    """The variance side equals (log 3)^2/4 at d = 2, 4, ..., 2 trials."""

    name = "glt"
    default_tolerance = GLT_CONSTANCY_TOL

    def trial(self, index, rng):
        record = counterexample_glt(2 * (index + 1))
        witness = {"d": record.d, "rhs": record.rhs, "violated": record.violated}
        return [Comparison(abs(record.lhs - GLT_LHS), 0.0, witness)]
