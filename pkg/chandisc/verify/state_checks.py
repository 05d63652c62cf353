"""Randomized checks of inequalities between state divergences.

Each check samples its inputs per trial and asserts lhs <= rhs. The `check_*`
functions are the entry points; the classes are exposed for the suite runner.
"""

from collections.abc import Sequence
import math

import numpy as np

from chandisc.discrim.strategies import TestOperator, error_pair
from chandisc.errors import DomainError, PreconditionError, ResourceError
from chandisc.interchange import encode_complex_array
from chandisc.qmat.channels import apply_channel
from chandisc.qmat.operators import (
    DENSE_LIMIT,
    hermitian_part,
    positive_part_trace_array,
    spectral_function,
    support_mask,
    tensor,
)
from chandisc.qmat.sampling import random_channel, random_density, random_hermitian, random_psd, random_test
from chandisc.qmat.states import DensityOperator
from chandisc.statediv.hypothesis import hypothesis_testing_array
from chandisc.statediv.kinds import (
    BaseDivergence,
    HypothesisTesting,
    MaxRelative,
    PetzRenyi,
    SandwichedRenyi,
    Umegaki,
)
from chandisc.statediv.renyi import (
    binary_entropy,
    petz_renyi_array,
    sandwiched_renyi_array,
    umegaki_array,
)
from chandisc.verify.base import BaseCheck, CheckReport, Comparison

LN2 = math.log(2.0)
CONTINUITY_DELTA = 1e-4
DPI_TOLERANCE = 1e-7
# Orders where each family is known to obey data processing.
DPI_KINDS: tuple[BaseDivergence, ...] = (
    Umegaki(),
    PetzRenyi(0.3),
    PetzRenyi(0.7),
    PetzRenyi(2.0),
    SandwichedRenyi(0.7),
    SandwichedRenyi(2.0),
    SandwichedRenyi(3.0),
    MaxRelative(),
    HypothesisTesting(0.1),
    HypothesisTesting(0.5),
)
GEOMEAN_ALPHAS = (0.0, 0.25, 0.5, 0.75, 1.0)


def _check_dim(dim: int, limit: int):
    if not 1 <= dim <= limit:
        raise DomainError(f"dimension must lie in [1, {limit}], got {dim}")


def _power_trace(m: np.ndarray, n: np.ndarray, alpha: float) -> float:
    """tr[M^alpha N^(1 - alpha)] for positive semidefinite M, N; x^0 is the support projector."""
    a = spectral_function(m, lambda w: w**alpha)
    b = spectral_function(n, lambda w: w ** (1.0 - alpha))
    return float(np.trace(a @ b).real)


class TwoMatrixCheck(BaseCheck):
    """tr(M - N)_+ <= tr M_+ + tr N_+ - tr N for Hermitian M, N."""

    name = "twomat"

    def __init__(self, dim: int = 8, **kwargs):
        _check_dim(dim, 64)
        super().__init__(**kwargs)
        self.dim = dim

    def trial(self, index, rng):
        m = random_hermitian(rng, self.dim).data
        n = random_hermitian(rng, self.dim).data
        lhs = positive_part_trace_array(m - n)
        rhs = positive_part_trace_array(m) + positive_part_trace_array(n) - float(np.trace(n).real)
        return [Comparison(lhs, rhs, {"M": encode_complex_array(m), "N": encode_complex_array(n)})]


class PetzLowerBoundCheck(BaseCheck):
    """D_H^eps >= Petz D_alpha + (alpha/(1 - alpha))(h(alpha)/alpha - log 1/eps) for alpha in (0, 1).

    The witness records how much the bound improves on the one without the
    binary entropy term. A second comparison holds that improvement to
    h(alpha)/(1 - alpha).
    """

    name = "boundsdmin"

    def __init__(self, dim: int = 4, **kwargs):
        _check_dim(dim, 16)
        super().__init__(**kwargs)
        self.dim = dim

    def trial(self, index, rng):
        rho = random_density(rng, self.dim).data
        sigma = random_density(rng, self.dim).data
        eps = float(rng.uniform(0.01, 0.99))
        alpha = float(rng.uniform(0.02, 0.98))
        petz = petz_renyi_array(rho, sigma, alpha).value
        h = binary_entropy(alpha)
        bound = petz + alpha / (1.0 - alpha) * (h / alpha - math.log2(1.0 / eps))
        older = petz - alpha / (1.0 - alpha) * math.log2(1.0 / eps)
        dh = hypothesis_testing_array(rho, sigma, eps).value
        witness = {"eps": eps, "alpha": alpha, "improvement": bound - older, "rho": encode_complex_array(rho)}
        comparisons = [Comparison(bound, dh, witness)]
        if math.isfinite(petz):
            comparisons.append(Comparison(abs(bound - older - h / (1.0 - alpha)), 0.0, witness))
        return comparisons


class SandwichedUpperBoundCheck(BaseCheck):
    """D_H^eps <= sandwiched D_alpha + (alpha/(alpha - 1)) log 1/(1 - eps) for alpha > 1."""

    name = "dh-sandwiched"

    def __init__(self, dim: int = 4, **kwargs):
        _check_dim(dim, 16)
        super().__init__(**kwargs)
        self.dim = dim

    def trial(self, index, rng):
        rho = random_density(rng, self.dim).data
        sigma = random_density(rng, self.dim).data
        eps = float(rng.uniform(0.01, 0.99))
        alpha = 1.0 + float(rng.uniform(0.05, 3.0))
        bound = sandwiched_renyi_array(rho, sigma, alpha).value + alpha / (alpha - 1.0) * math.log2(
            1.0 / (1.0 - eps)
        )
        dh = hypothesis_testing_array(rho, sigma, eps).value
        return [Comparison(dh, bound, {"eps": eps, "alpha": alpha})]


class ContinuityCheck(BaseCheck):
    """Petz and sandwiched divergences at 1 +- delta stay within C delta of the Umegaki value.

    Both families have slope V ln2 / 2 at alpha = 1, with V the relative entropy
    variance in bits; C is taken as V ln2 + 1 per instance.
    """

    name = "continuity"

    def __init__(self, dim: int = 3, delta: float = CONTINUITY_DELTA, **kwargs):
        _check_dim(dim, 16)
        super().__init__(**kwargs)
        self.dim = dim
        self.delta = delta

    def trial(self, index, rng):
        rho = random_density(rng, self.dim).data
        sigma = random_density(rng, self.dim).data
        d = umegaki_array(rho, sigma).value
        log_ratio = spectral_function(rho, np.log2) - spectral_function(sigma, np.log2)
        second = float(np.trace(rho @ log_ratio @ log_ratio).real)
        variance = max(second - d * d, 0.0)
        allowance = (variance * LN2 + 1.0) * self.delta
        witness = {"umegaki": d, "variance": variance}
        comparisons = []
        for alpha in (1.0 - self.delta, 1.0 + self.delta):
            for evaluate in (petz_renyi_array, sandwiched_renyi_array):
                deviation = abs(evaluate(rho, sigma, alpha).value - d)
                comparisons.append(Comparison(deviation, allowance, {**witness, "alpha": alpha}))
        return comparisons


class DataProcessingCheck(BaseCheck):
    """D(N(rho)||N(sigma)) <= D(rho||sigma) for a random channel N and every kind in `kinds`."""

    name = "dpi"
    default_tolerance = DPI_TOLERANCE

    def __init__(self, max_dim: int = 6, kinds: Sequence[BaseDivergence] = DPI_KINDS, **kwargs):
        _check_dim(max_dim, 16)
        super().__init__(**kwargs)
        self.max_dim = max_dim
        self.kinds = tuple(kinds)

    def trial(self, index, rng):
        d_in = int(rng.integers(2, self.max_dim + 1)) if self.max_dim > 1 else 1
        d_out = int(rng.integers(2, self.max_dim + 1)) if self.max_dim > 1 else 1
        # enough Kraus operators for an isometry and a full-rank output
        kraus_count = max(int(rng.integers(1, d_in * d_out + 1)), math.ceil(d_in / d_out), math.ceil(d_out / d_in))
        channel = random_channel(rng, d_in, d_out, kraus_count)
        rho, sigma = random_density(rng, d_in), random_density(rng, d_in)
        rho_out, sigma_out = apply_channel(channel, rho), apply_channel(channel, sigma)
        comparisons = []
        for kind in self.kinds:
            before = kind.evaluate(rho, sigma).value
            after = kind.evaluate(rho_out, sigma_out).value
            comparisons.append(Comparison(after, before, {"kind": kind.label, "d_in": d_in, "d_out": d_out}))
        return comparisons


class GeometricMeanCheck(BaseCheck):
    """(1/2) tr[M + N - |M - N|] <= tr[M^alpha N^(1 - alpha)] for positive semidefinite M, N."""

    name = "geomean"

    def __init__(self, max_dim: int = 6, alphas: Sequence[float] = GEOMEAN_ALPHAS, **kwargs):
        _check_dim(max_dim, 64)
        super().__init__(**kwargs)
        self.max_dim = max_dim
        self.alphas = tuple(alphas)
        if any(not 0.0 <= a <= 1.0 for a in self.alphas):
            raise DomainError(f"geometric-mean orders must lie in [0, 1], got {self.alphas}")

    def trial(self, index, rng):
        d = int(rng.integers(1, self.max_dim + 1))
        rank = int(rng.integers(1, d + 1))
        m = random_psd(rng, d)
        n = random_psd(rng, d, rank)
        w = np.linalg.eigvalsh(hermitian_part(m - n))
        lhs = 0.5 * (float(np.trace(m + n).real) - float(np.sum(np.abs(w))))
        return [Comparison(lhs, _power_trace(m, n, a), {"alpha": a, "d": d, "rank": rank}) for a in self.alphas]


class TradeoffCheck(BaseCheck):
    """-log(1 - a) >= ((alpha - 1)/alpha)(-log b - sandwiched D_alpha) for every test with errors (a, b)."""

    name = "tradeoff"

    def __init__(self, max_dim: int = 4, **kwargs):
        _check_dim(max_dim, 16)
        super().__init__(**kwargs)
        self.max_dim = max_dim

    def trial(self, index, rng):
        d = int(rng.integers(2, self.max_dim + 1)) if self.max_dim > 1 else 1
        rho, sigma = random_density(rng, d), random_density(rng, d)
        test = TestOperator(random_test(rng, d))
        errors = error_pair((rho, sigma), test)
        alpha = 1.0 + float(rng.uniform(0.05, 4.0))
        if errors.type2 <= 0.0 or errors.type1 >= 1.0:
            return [Comparison(-math.inf, 0.0)]
        lhs = (alpha - 1.0) / alpha * (
            -math.log2(errors.type2) - sandwiched_renyi_array(rho.data, sigma.data, alpha).value
        )
        rhs = -math.log2(1.0 - errors.type1)
        return [Comparison(lhs, rhs, {"alpha": alpha, "type1": errors.type1, "type2": errors.type2})]


class UniformBoundCheck(BaseCheck):
    """tr(rho_n - 2^(mu n) sigma_n)_+ against its two-term exponential bound on a (mu, r, s) grid.

    rho_n and sigma_n are n-fold tensor powers. Trial `index` is one grid point,
    so the random generator is unused.
    """

    name = "ubd"

    def __init__(
        self,
        rho: DensityOperator,
        sigma: DensityOperator,
        copies: int = 3,
        mus: Sequence[float] = tuple(np.linspace(-0.5, 2.0, 11)),
        rs: Sequence[float] = tuple(np.linspace(-3.0, 0.5, 11)),
        ss: Sequence[float] = tuple(np.linspace(0.0, 1.0, 11)),
        seed: int = 0,
        workers: int = 1,
        tolerance: float | None = None,
    ):
        if rho.dims != sigma.dims:
            raise DomainError(f"dimension mismatch: {rho.dims} vs {sigma.dims}")
        if not 1 <= copies <= 4:
            raise DomainError(f"copies must lie in [1, 4], got {copies}")
        if rho.dim**copies > DENSE_LIMIT:
            raise ResourceError(f"{copies} copies of dimension {rho.dim} exceed {DENSE_LIMIT}")
        if any(not 0.0 <= s <= 1.0 for s in ss):
            raise DomainError("s values must lie in [0, 1]")
        q, v = sigma.spectrum
        kernel = v[:, ~support_mask(q)]
        if kernel.size and float(np.max(np.abs(kernel.conj().T @ rho.data @ kernel))) > 1e-10:
            raise PreconditionError("supp(rho) must lie inside supp(sigma)")
        super().__init__(len(mus) * len(rs) * len(ss), seed, workers, tolerance)
        self.copies = copies
        self.grid = (tuple(mus), tuple(rs), tuple(ss))
        self.local_dim = rho.dim
        rho_n, sigma_n = rho, sigma
        for _ in range(copies - 1):
            rho_n, sigma_n = tensor(rho_n, rho), tensor(sigma_n, sigma)
        self._rho_n, self._sigma_n = rho_n.data, sigma_n.data
        self._p = np.clip(rho_n.eigenvalues, 0.0, None)
        self._q, self._v = sigma_n.spectrum

    def _log_trace_power(self, s: float) -> float:
        p = self._p[self._p > 0.0]
        return float(np.log2(np.sum(p ** (1.0 + s))))

    def _log_trace_inverse(self, s: float) -> float:
        keep = support_mask(self._q)
        vs = self._v[:, keep]
        weights = np.einsum("ij,ik,kj->j", vs.conj(), self._rho_n, vs).real
        return float(np.log2(np.sum(weights * self._q[keep] ** -s)))

    def trial(self, index, rng):
        i, j, k = np.unravel_index(index, tuple(len(axis) for axis in self.grid))
        mu, r, s = (float(axis[t]) for axis, t in zip(self.grid, (i, j, k)))
        n = self.copies
        lhs = positive_part_trace_array(self._rho_n - 2.0 ** (mu * n) * self._sigma_n)
        first = -n * r * s + self._log_trace_power(s)
        second = -n * s * (mu - r) + s * self.local_dim * math.log2(1 + n) + self._log_trace_inverse(s)
        rhs = 2.0**first + 2.0**second
        return [Comparison(lhs, rhs, {"mu": mu, "r": r, "s": s})]


def check_twomat(trials: int = 10_000, dim: int = 8, seed: int = 0, workers: int = 1) -> CheckReport:
    return TwoMatrixCheck(dim, trials=trials, seed=seed, workers=workers).run()


def check_boundsdmin(trials: int = 10_000, dim: int = 4, seed: int = 0, workers: int = 1) -> CheckReport:
    return PetzLowerBoundCheck(dim, trials=trials, seed=seed, workers=workers).run()


def check_dh_sandwiched(trials: int = 10_000, dim: int = 4, seed: int = 0, workers: int = 1) -> CheckReport:
    return SandwichedUpperBoundCheck(dim, trials=trials, seed=seed, workers=workers).run()


def check_continuity(trials: int = 500, dim: int = 3, seed: int = 0, workers: int = 1) -> CheckReport:
    return ContinuityCheck(dim, trials=trials, seed=seed, workers=workers).run()


def check_data_processing(trials: int = 1000, max_dim: int = 6, seed: int = 0, workers: int = 1) -> CheckReport:
    return DataProcessingCheck(max_dim, trials=trials, seed=seed, workers=workers).run()


def check_geometric_mean(trials: int = 1000, max_dim: int = 6, seed: int = 0, workers: int = 1) -> CheckReport:
    return GeometricMeanCheck(max_dim, trials=trials, seed=seed, workers=workers).run()


def check_tradeoff(trials: int = 500, max_dim: int = 4, seed: int = 0, workers: int = 1) -> CheckReport:
    return TradeoffCheck(max_dim, trials=trials, seed=seed, workers=workers).run()


def check_ubd(
    rho: DensityOperator,
    sigma: DensityOperator,
    copies: int = 3,
    mus: Sequence[float] = tuple(np.linspace(-0.5, 2.0, 11)),
    rs: Sequence[float] = tuple(np.linspace(-3.0, 0.5, 11)),
    ss: Sequence[float] = tuple(np.linspace(0.0, 1.0, 11)),
    workers: int = 1,
) -> CheckReport:
    return UniformBoundCheck(rho, sigma, copies, mus, rs, ss, workers=workers).run()
