from dataclasses import dataclass
import math

from chandisc.errors import DomainError


@dataclass(frozen=True)
class DivergenceValue:
    """An extended real divergence value.

    `support_ok` is False when the support condition of the divergence fails.
    Outside the orders in (0, 1) this coincides with the value being +inf.
    """

    value: float
    support_ok: bool = True

    @classmethod
    def infinite(cls) -> "DivergenceValue":
        return cls(math.inf, False)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class RenyiOrder:
    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not alpha > 0.0 or alpha == 1.0 or not math.isfinite(alpha):
            raise DomainError(f"Renyi order must lie in (0, 1) or (1, inf), got {self.alpha}")
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class ErrorThreshold:
    epsilon: float

    def __post_init__(self):
        epsilon = float(self.epsilon)
        if not 0.0 <= epsilon <= 1.0:
            raise DomainError(f"error threshold must lie in [0, 1], got {self.epsilon}")
        object.__setattr__(self, "epsilon", epsilon)


def as_alpha(order: "RenyiOrder | float") -> float:
    return order.alpha if isinstance(order, RenyiOrder) else RenyiOrder(order).alpha


def as_epsilon(eps: "ErrorThreshold | float") -> float:
    return eps.epsilon if isinstance(eps, ErrorThreshold) else ErrorThreshold(eps).epsilon
