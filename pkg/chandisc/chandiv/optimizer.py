from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
import logging
import math
from typing import TypeVar

import numpy as np

from chandisc.errors import DomainError

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]
T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_iterations: int = 2000
    convergence_tol: float = 1e-7
    seed: int = 0
    # Restarts are independent; more workers only changes wall time, never results.
    workers: int = 1
    step: float = 1e-5

    def __post_init__(self):
        if self.restarts < 1 or self.max_iterations < 1 or self.workers < 1:
            raise DomainError("restarts, max_iterations and workers must be positive")
        if not self.convergence_tol > 0.0 or not self.step > 0.0:
            raise DomainError("convergence_tol and step must be positive")
        if not -(2**63) <= self.seed < 2**64:
            raise DomainError(f"seed {self.seed} does not fit in 64 bits")

    def replace(self, **changes) -> "OptimizerConfig":
        return replace(self, **changes)


class Manifold(ABC):
    @abstractmethod
    def retract(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def project(self, x: np.ndarray, g: np.ndarray) -> np.ndarray:
        pass


class Euclidean(Manifold):
    def retract(self, x, v):
        return x + v

    def project(self, x, g):
        return g


@dataclass(frozen=True)
class SphereProduct(Manifold):
    """A product of unit spheres, one per consecutive block of the real parameter vector."""

    sizes: tuple[int, ...]

    def _blocks(self, x: np.ndarray) -> list[np.ndarray]:
        return np.split(x, np.cumsum(self.sizes)[:-1])

    def retract(self, x, v):
        return np.concatenate([b / np.linalg.norm(b) for b in self._blocks(x + v)])

    def project(self, x, g):
        return np.concatenate(
            [gb - np.dot(gb, xb) * xb for xb, gb in zip(self._blocks(x), self._blocks(g))]
        )


def numerical_gradient(objective: Objective, x: np.ndarray, step: float) -> np.ndarray:
    """Central differences; coordinates whose probes leave the finite domain get slope 0."""
    grad = np.zeros_like(x)
    probe = x.copy()
    for i in range(x.size):
        probe[i] = x[i] + step
        forward = objective(probe)
        probe[i] = x[i] - step
        backward = objective(probe)
        probe[i] = x[i]
        if math.isfinite(forward) and math.isfinite(backward):
            grad[i] = (forward - backward) / (2.0 * step)
    return grad


class BackTrackingLineSearcher:
    """Armijo back-tracking along an ascent direction."""

    def __init__(
        self,
        contraction_factor=0.5,
        optimism=2.0,
        sufficient_increase=1e-4,
        max_iterations=25,
        initial_step_size=1.0,
    ):
        self.contraction_factor = contraction_factor
        self.optimism = optimism
        self.sufficient_increase = sufficient_increase
        self.max_iterations = max_iterations
        self.initial_step_size = initial_step_size

        self._oldf0: float | None = None

    def search(
        self, objective: Objective, manifold: Manifold, x: np.ndarray, d: np.ndarray, f0: float, df0: float
    ) -> tuple[float, np.ndarray, float]:
        """Step along `d` from `x`.

        Args:
            objective: function being maximized.
            manifold: where the iterates live.
            x: current iterate.
            d: ascent direction in the tangent space at `x`.
            f0: objective at `x`.
            df0: directional derivative at `x` along `d`, positive.

        Returns:
            (step_size, newx, newf); a step size of 0 means the step was rejected.
        """
        norm_d = float(np.linalg.norm(d))
        if self._oldf0 is not None and f0 > self._oldf0:
            # start from where the last step landed, then look a little further
            alpha = self.optimism * 2.0 * (f0 - self._oldf0) / df0
        else:
            alpha = self.initial_step_size / norm_d

        newx = manifold.retract(x, alpha * d)
        newf = objective(newx)
        step_count = 1
        while (
            not newf >= f0 + self.sufficient_increase * alpha * df0
            and step_count <= self.max_iterations
        ):
            alpha *= self.contraction_factor
            newx = manifold.retract(x, alpha * d)
            newf = objective(newx)
            step_count += 1

        self._oldf0 = f0
        if not newf > f0:
            return 0.0, x, f0
        return alpha * norm_d, newx, newf


@dataclass(frozen=True)
class AscentResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool


def ascend(
    objective: Objective,
    x0: np.ndarray,
    cfg: OptimizerConfig,
    manifold: Manifold | None = None,
) -> AscentResult:
    """Local maximization by projected finite-difference gradient ascent.

    Stops when the tangent gradient or the per-step gain drops below
    cfg.convergence_tol, or as soon as the objective reaches +inf.
    """
    manifold = manifold or Euclidean()
    x = manifold.retract(np.asarray(x0, dtype=float), np.zeros_like(x0, dtype=float))
    f = objective(x)
    if not math.isfinite(f):
        return AscentResult(x, f, 0, True)
    searcher = BackTrackingLineSearcher()
    for iteration in range(1, cfg.max_iterations + 1):
        g = manifold.project(x, numerical_gradient(objective, x, cfg.step))
        slope = float(np.dot(g, g))
        if math.sqrt(slope) < cfg.convergence_tol:
            return AscentResult(x, f, iteration, True)
        step, newx, newf = searcher.search(objective, manifold, x, g, f, slope)
        if step == 0.0:
            return AscentResult(x, f, iteration, True)
        gain = newf - f
        x, f = newx, newf
        if not math.isfinite(f) or gain < cfg.convergence_tol * max(1.0, abs(f)):
            return AscentResult(x, f, iteration, True)
    logger.debug("ascent stopped after %d iterations at %.12g", cfg.max_iterations, f)
    return AscentResult(x, f, cfg.max_iterations, False)


def run_parallel(work: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    """Map `work` over `items`, in input order, on up to `workers` threads."""
    if workers <= 1 or len(items) <= 1:
        return [work(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, items))


def complex_to_real(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex).reshape(-1)
    return np.concatenate([z.real, z.imag])


def real_to_complex(x: np.ndarray) -> np.ndarray:
    half = x.size // 2
    return x[:half] + 1j * x[half:]
