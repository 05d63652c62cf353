"""Closed-form divergences: Umegaki, Petz and sandwiched Renyi, max-relative entropy.

All values are in bits. The `*_array` variants take raw positive semidefinite
matrices and are what the channel optimizers call in their inner loops; the
public functions validate `DensityOperator` arguments and delegate to them.
"""

import math

import numpy as np
from scipy.special import logsumexp

from chandisc.errors import DomainError
from chandisc.qmat.operators import (
    SUPPORT_TOL,
    KernelPolicy,
    eigh,
    hermitian_part,
    spectral_function,
    support_mask,
)
from chandisc.qmat.states import DensityOperator
from chandisc.statediv.values import DivergenceValue, RenyiOrder, as_alpha

LN2 = math.log(2.0)


def _spectrum(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = eigh(a)
    return np.clip(w, 0.0, None), v


def leaked_mass(rho: np.ndarray, sigma_w: np.ndarray, sigma_v: np.ndarray) -> float:
    """tr[rho (I - Pi_sigma)], the weight of rho outside the support of sigma."""
    kernel = sigma_v[:, ~support_mask(sigma_w)]
    if kernel.shape[1] == 0:
        return 0.0
    return float(np.einsum("ik,ij,jk->", kernel.conj(), rho, kernel).real)


def _support_violated(rho: np.ndarray, sigma_w: np.ndarray, sigma_v: np.ndarray) -> bool:
    scale = max(float(np.trace(rho).real), 1.0)
    return leaked_mass(rho, sigma_w, sigma_v) > SUPPORT_TOL * scale


def check_pair(rho: DensityOperator, sigma: DensityOperator) -> tuple[np.ndarray, np.ndarray]:
    if rho.dims != sigma.dims:
        raise DomainError(f"dimension mismatch: {rho.dims} vs {sigma.dims}")
    return rho.data, sigma.data


def umegaki_array(rho: np.ndarray, sigma: np.ndarray) -> DivergenceValue:
    p, u = _spectrum(rho)
    q, v = _spectrum(sigma)
    if _support_violated(rho, q, v):
        return DivergenceValue.infinite()
    sp, sq = support_mask(p), support_mask(q)
    overlap = np.abs(u[:, sp].conj().T @ v[:, sq]) ** 2
    ps, qs = p[sp], q[sq]
    value = float(ps @ np.log2(ps) - ps @ overlap @ np.log2(qs))
    return DivergenceValue(value)


def petz_renyi_array(rho: np.ndarray, sigma: np.ndarray, alpha: float) -> DivergenceValue:
    p, u = _spectrum(rho)
    q, v = _spectrum(sigma)
    violated = _support_violated(rho, q, v)
    if violated and alpha > 1.0:
        return DivergenceValue.infinite()
    sp, sq = support_mask(p), support_mask(q)
    overlap = np.abs(u[:, sp].conj().T @ v[:, sq]) ** 2
    if not np.any(overlap > 0.0):
        return DivergenceValue(math.inf, False)
    exponents = alpha * np.log(p[sp])[:, None] + (1.0 - alpha) * np.log(q[sq])[None, :]
    log_q = float(logsumexp(exponents, b=overlap))
    return DivergenceValue(log_q / ((alpha - 1.0) * LN2), not violated)


def sandwiched_renyi_array(rho: np.ndarray, sigma: np.ndarray, alpha: float) -> DivergenceValue:
    q, v = _spectrum(sigma)
    violated = _support_violated(rho, q, v)
    if violated and alpha > 1.0:
        return DivergenceValue.infinite()
    sq = support_mask(q)
    vs = v[:, sq]
    scale = q[sq] ** ((1.0 - alpha) / (2.0 * alpha))
    inner = scale[:, None] * (vs.conj().T @ rho @ vs) * scale[None, :]
    m = np.linalg.eigvalsh(hermitian_part(inner))
    m = m[support_mask(m) & (m > 0.0)]
    if m.size == 0:
        return DivergenceValue(math.inf, False)
    log_q = float(logsumexp(alpha * np.log(m)))
    return DivergenceValue(log_q / ((alpha - 1.0) * LN2), not violated)


def dmax_array(rho: np.ndarray, sigma: np.ndarray) -> DivergenceValue:
    q, v = _spectrum(sigma)
    if _support_violated(rho, q, v):
        return DivergenceValue.infinite()
    sq = support_mask(q)
    vs = v[:, sq]
    scale = q[sq] ** -0.5
    inner = scale[:, None] * (vs.conj().T @ rho @ vs) * scale[None, :]
    top = float(np.linalg.eigvalsh(hermitian_part(inner))[-1])
    if top <= 0.0:
        return DivergenceValue(-math.inf)
    return DivergenceValue(math.log2(top))


def umegaki(rho: DensityOperator, sigma: DensityOperator) -> DivergenceValue:
    """D(rho||sigma) = tr[rho (log rho - log sigma)], +inf unless supp(rho) is inside supp(sigma)."""
    return umegaki_array(*check_pair(rho, sigma))


def petz_renyi(
    rho: DensityOperator, sigma: DensityOperator, order: RenyiOrder | float
) -> DivergenceValue:
    return petz_renyi_array(*check_pair(rho, sigma), as_alpha(order))


def sandwiched_renyi(
    rho: DensityOperator, sigma: DensityOperator, order: RenyiOrder | float
) -> DivergenceValue:
    return sandwiched_renyi_array(*check_pair(rho, sigma), as_alpha(order))


def dmax(rho: DensityOperator, sigma: DensityOperator) -> DivergenceValue:
    """log of the largest eigenvalue of sigma^-1/2 rho sigma^-1/2 on supp(sigma)."""
    return dmax_array(*check_pair(rho, sigma))


def fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Root fidelity ||sqrt(rho) sqrt(sigma)||_1."""
    a, b = check_pair(rho, sigma)
    root_a = spectral_function(a, np.sqrt, KernelPolicy.MAP_ZERO_TO_ZERO)
    root_b = spectral_function(b, np.sqrt, KernelPolicy.MAP_ZERO_TO_ZERO)
    return float(np.sum(np.linalg.svd(root_a @ root_b, compute_uv=False)))


def binary_entropy(alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"binary entropy is defined on [0, 1], got {alpha}")
    if alpha in (0.0, 1.0):
        return 0.0
    return -alpha * math.log2(alpha) - (1.0 - alpha) * math.log2(1.0 - alpha)


def classical_relative_entropy(p: np.ndarray, q: np.ndarray) -> float:
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    mask = p > 0.0
    if np.any(q[mask] <= 0.0):
        return math.inf
    return float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))


def classical_renyi(p: np.ndarray, q: np.ndarray, alpha: float) -> float:
    """Classical Renyi divergence of order alpha between two probability vectors."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    alpha = as_alpha(alpha)
    if alpha > 1.0 and np.any(q[p > 0.0] <= 0.0):
        return math.inf
    mask = (p > 0.0) & (q > 0.0)
    total = float(np.sum(p[mask] ** alpha * q[mask] ** (1.0 - alpha)))
    if total == 0.0:
        return math.inf
    return math.log2(total) / (alpha - 1.0)
