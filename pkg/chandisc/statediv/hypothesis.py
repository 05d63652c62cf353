from enum import Enum
import math

import numpy as np
from scipy.optimize import minimize_scalar

from chandisc.errors import DomainError
from chandisc.qmat.operators import (
    EIGEN_CLAMP_TOL,
    HermitianOperator,
    eigh,
    hermitian_part,
    positive_part_trace_array,
    support_mask,
)
from chandisc.qmat.states import DensityOperator
from chandisc.statediv.renyi import check_pair
from chandisc.statediv.values import DivergenceValue, ErrorThreshold, as_epsilon

# Type II errors at or below this are treated as exactly zero.
BETA_FLOOR = 1e-15
BISECTION_TOL = 1e-9
BRACKET_LIMIT = 1e4


class SpectrumVariant(Enum):
    D_S = "D_s"
    UNDERLINE = "underline"
    OVERLINE = "overline"


def _compress(rho: np.ndarray, sigma: np.ndarray):
    """Restrict both operators to supp(rho + sigma); also return that sum's nonzero spectrum."""
    w, v = eigh(rho + sigma)
    keep = support_mask(w)
    vs = v[:, keep]
    return vs.conj().T @ rho @ vs, vs.conj().T @ sigma @ vs, w[keep]


def _pencil_weights(r: np.ndarray, total: np.ndarray) -> np.ndarray:
    """Eigenvalues mu of (rho+sigma)^-1/2 rho (rho+sigma)^-1/2, all in [0, 1].

    t rho - sigma is singular exactly where t = (1 - mu)/mu, and 2^g sigma - rho
    where 2^g = mu/(1 - mu).
    """
    scale = total**-0.5
    return np.clip(np.linalg.eigvalsh(hermitian_part(scale[:, None] * r * scale[None, :])), 0.0, 1.0)


def _dual_objective(t: float, r: np.ndarray, s: np.ndarray, eps: float) -> float:
    return (1.0 - eps) * t - positive_part_trace_array(t * r - s)


def _support_projector(a: np.ndarray) -> np.ndarray:
    w, v = eigh(a)
    vs = v[:, support_mask(w)]
    return vs @ vs.conj().T


def solve_hypothesis_testing(rho: np.ndarray, sigma: np.ndarray, eps: float) -> tuple[float, float]:
    """Optimal Type II error beta and the dual multiplier t attaining it.

    beta = max_{t >= 0} (1 - eps) t - tr(t rho - sigma)_+. The objective is concave
    with kinks only where t rho - sigma changes inertia, so the best kink (or
    endpoint) brackets the optimum; the two adjacent segments are then refined with
    a bounded scalar search, which is exact on commuting inputs already.
    """
    if eps >= 1.0:
        return 0.0, 0.0
    if eps == 0.0:
        beta = float(np.trace(_support_projector(rho) @ sigma).real)
        return beta, math.inf
    r, s, total = _compress(rho, sigma)
    upper = 1.0 / eps
    mu = _pencil_weights(r, total)
    mu = mu[mu > EIGEN_CLAMP_TOL]
    kinks = (1.0 - mu) / mu
    grid = np.unique(np.concatenate([[0.0, upper], kinks[(kinks > 0.0) & (kinks < upper)]]))
    values = np.array([_dual_objective(t, r, s, eps) for t in grid])
    i = int(np.argmax(values))
    best_t, best = float(grid[i]), float(values[i])
    for lo, hi in ((i - 1, i), (i, i + 1)):
        if lo < 0 or hi >= grid.size:
            continue
        a, b = float(grid[lo]), float(grid[hi])
        result = minimize_scalar(
            lambda t: -_dual_objective(t, r, s, eps),
            bounds=(a, b),
            method="bounded",
            options={"xatol": 1e-12 * max(1.0, b)},
        )
        if -result.fun > best:
            best_t, best = float(result.x), float(-result.fun)
    return max(best, 0.0), best_t


def hypothesis_testing_array(rho: np.ndarray, sigma: np.ndarray, eps: float) -> DivergenceValue:
    beta, _ = solve_hypothesis_testing(rho, sigma, eps)
    if beta <= BETA_FLOOR:
        return DivergenceValue.infinite()
    return DivergenceValue(-math.log2(beta))


def hypothesis_testing(
    rho: DensityOperator, sigma: DensityOperator, eps: ErrorThreshold | float
) -> DivergenceValue:
    """D_H^eps(rho||sigma) = -log min{tr(T sigma) : tr(T rho) >= 1 - eps, 0 <= T <= I}.

    eps = 1 gives +inf, the defined limit of an unconstrained test.
    """
    return hypothesis_testing_array(*check_pair(rho, sigma), as_epsilon(eps))


def neyman_pearson_test(
    rho: DensityOperator, sigma: DensityOperator, eps: ErrorThreshold | float
) -> HermitianOperator:
    """An optimal test for the Type I budget eps.

    Accepts on the positive part of t* rho - sigma and randomizes on its kernel
    so that the Type I error is exactly eps whenever that is achievable.
    """
    a, b = check_pair(rho, sigma)
    eps = as_epsilon(eps)
    if eps >= 1.0:
        return HermitianOperator(np.zeros_like(a), rho.dims, check=False)
    _, t = solve_hypothesis_testing(a, b, eps)
    if math.isinf(t):
        return HermitianOperator(_support_projector(a), rho.dims, check=False)
    w, v = eigh(t * a - b)
    zero = 1e-9 * max(1.0, float(np.max(np.abs(w))))
    plus, kernel = v[:, w > zero], v[:, np.abs(w) <= zero]
    accept = plus @ plus.conj().T
    boundary = kernel @ kernel.conj().T
    accepted = float(np.trace(accept @ a).real)
    available = float(np.trace(boundary @ a).real)
    q = float(np.clip((1.0 - eps - accepted) / available, 0.0, 1.0)) if available > 0.0 else 0.0
    return HermitianOperator(accept + q * boundary, rho.dims, check=False)


def hypothesis_testing_oracle(p, q, eps: float) -> float:
    """Classical Neyman-Pearson optimum -log beta for probability vectors p and q.

    Outcomes are accepted in decreasing likelihood ratio p/q until the acceptance
    mass reaches 1 - eps, with the boundary outcome accepted fractionally.
    """
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    eps = as_epsilon(eps)
    if eps >= 1.0:
        return math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(q > 0.0, p / np.where(q > 0.0, q, 1.0), np.where(p > 0.0, np.inf, 0.0))
    need = 1.0 - eps
    beta = 0.0
    for k in np.argsort(-ratio, kind="stable"):
        if need <= 1e-15 or p[k] <= 0.0:
            break
        take = min(1.0, need / p[k])
        beta += take * q[k]
        need -= take * p[k]
    return math.inf if beta <= BETA_FLOOR else -math.log2(beta)


def _spectrum_projection_mass(gamma: float, r: np.ndarray, s: np.ndarray) -> float:
    """tr(rho {rho <= 2^gamma sigma}), the projector including the kernel of 2^gamma sigma - rho."""
    w, v = eigh(2.0**gamma * s - r)
    tol = EIGEN_CLAMP_TOL * max(1.0, float(np.max(np.abs(w))))
    vs = v[:, w >= -tol]
    return float(np.einsum("ik,ij,jk->", vs.conj(), r, vs).real)


def _d_s(r: np.ndarray, s: np.ndarray, total: np.ndarray, eps: float) -> float:
    mu = _pencil_weights(r, total)
    mu = mu[(mu > EIGEN_CLAMP_TOL) & (mu < 1.0 - EIGEN_CLAMP_TOL)]
    breakpoints = np.unique(np.log2(mu / (1.0 - mu)))

    def holds(gamma: float) -> bool:
        return _spectrum_projection_mass(gamma, r, s) <= eps

    if breakpoints.size == 0:
        return math.inf if holds(0.0) else -math.inf
    if holds(float(breakpoints[-1]) + 1.0):
        return math.inf
    # descend through the breakpoints and the open intervals between them
    for i in range(breakpoints.size - 1, -1, -1):
        if holds(float(breakpoints[i])):
            return float(breakpoints[i])
        below = float(breakpoints[i - 1]) if i > 0 else float(breakpoints[0]) - 2.0
        if holds(0.5 * (below + float(breakpoints[i]))):
            return float(breakpoints[i])
    return -math.inf


def _bisect(predicate, lo: float, hi: float) -> float:
    """Boundary of a predicate that holds at lo and fails at hi."""
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _expand(predicate, start: float, expected: bool) -> float | None:
    """Double `start` away from zero until predicate(x) == expected."""
    x = start
    while predicate(x) != expected:
        x *= 2.0
        if abs(x) > BRACKET_LIMIT:
            return None
    return x


def info_spectrum(
    rho: DensityOperator,
    sigma: DensityOperator,
    eps: ErrorThreshold | float,
    variant: SpectrumVariant | str = SpectrumVariant.D_S,
) -> float:
    """Information-spectrum relative entropies.

    D_s:       sup{g : tr(rho {rho <= 2^g sigma}) <= eps}
    underline: sup{g : tr(rho - 2^g sigma)_+ >= 1 - eps}
    overline:  inf{g : tr(rho - 2^g sigma)_+ <= eps}

    The positive-part trace is continuous and nonincreasing in g, so the last two
    are found by bisection. The D_s projector only changes rank at the generalized
    eigenvalue breakpoints, which are scanned together with the midpoints between them.
    """
    a, b = check_pair(rho, sigma)
    eps = as_epsilon(eps)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"information spectrum needs eps in (0, 1), got {eps}")
    variant = SpectrumVariant(variant)
    if variant is SpectrumVariant.D_S:
        return _d_s(*_compress(a, b), eps)

    def tail(gamma: float) -> float:
        return positive_part_trace_array(a - 2.0**gamma * b)

    if variant is SpectrumVariant.UNDERLINE:
        target = 1.0 - eps
        lo = _expand(lambda g: tail(g) >= target, -1.0, True)
        if lo is None:
            return -math.inf
        hi = _expand(lambda g: tail(g) >= target, 1.0, False)
        if hi is None:
            return math.inf
        return _bisect(lambda g: tail(g) >= target, lo, hi)
    hi = _expand(lambda g: tail(g) <= eps, 1.0, True)
    if hi is None:
        return math.inf
    lo = _expand(lambda g: tail(g) <= eps, -1.0, False)
    if lo is None:
        return -math.inf
    return _bisect(lambda g: tail(g) > eps, lo, hi)


def smooth_dmax_bounds(
    rho: DensityOperator, sigma: DensityOperator, eps: float, eps_prime: float
) -> tuple[float, float]:
    """Two-sided hypothesis-testing bounds on the smooth max-relative entropy D_max^eps."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if not 0.0 < eps_prime < 1.0 - eps:
        raise DomainError(f"eps_prime must lie in (0, {1.0 - eps}), got {eps_prime}")
    lower = hypothesis_testing(rho, sigma, eps_prime).value + math.log2(1.0 - eps - eps_prime)
    upper = hypothesis_testing(rho, sigma, 1.0 - eps**2 / 2.0).value + math.log2(2.0 / eps**2)
    return lower, upper
