from collections.abc import Sequence
from dataclasses import dataclass
import logging
import math

import numpy as np

from chandisc.chandiv.optimizer import (
    AscentResult,
    OptimizerConfig,
    SphereProduct,
    ascend,
    complex_to_real,
    real_to_complex,
    run_parallel,
)
from chandisc.errors import DomainError, ResourceError
from chandisc.qmat.channels import QuantumChannel, apply_kraus, tensor_power
from chandisc.qmat.operators import DENSE_LIMIT, KernelPolicy, spectral_function
from chandisc.qmat.sampling import complex_normal, trial_rng
from chandisc.qmat.states import DensityOperator, PureStateVector, maximally_entangled, permute_vector, tensor_vectors
from chandisc.statediv.kinds import BaseDivergence, SandwichedRenyi, Umegaki
from chandisc.statediv.renyi import dmax_array
from chandisc.statediv.values import DivergenceValue

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChannelDivergence:
    """A lower estimate of a channel divergence together with the input realizing it.

    The witness lives on R (x) A with the reference R a copy of the input space,
    reference subsystems first.
    """

    value: DivergenceValue
    witness: PureStateVector
    kind: str


@dataclass(frozen=True)
class RegularizedPoint:
    copies: int
    value: float
    witness: PureStateVector


@dataclass(frozen=True)
class AmortizedWitness:
    value: float
    psi: DensityOperator
    phi: DensityOperator


def check_channel_pair(n: QuantumChannel, m: QuantumChannel):
    if n.dims_in != m.dims_in or n.dims_out != m.dims_out:
        raise DomainError(
            f"channels act on different spaces: {n.dims_in}->{n.dims_out} vs {m.dims_in}->{m.dims_out}"
        )


def check_budget(dim_in: int, dim_out: int, copies: int = 1):
    if (dim_in * dim_in) ** copies > DENSE_LIMIT or (dim_in * dim_out) ** copies > DENSE_LIMIT:
        raise ResourceError(
            f"{copies} copies of a {dim_in}->{dim_out} channel exceed the dense limit of {DENSE_LIMIT}"
        )


def _pure_output(kraus: np.ndarray, psi: np.ndarray, ref_dim: int) -> np.ndarray:
    """(id_R (x) N)(|psi><psi|) for psi laid out as (R, A)."""
    branches = np.einsum("ri,koi->kro", psi.reshape(ref_dim, -1), kraus).reshape(kraus.shape[0], -1)
    return branches.T @ branches.conj()


def _canonical_phase(z: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(z)))
    if abs(z[k]) == 0.0:
        return z
    return z * (abs(z[k]) / z[k])


def _witness_key(value: float, z: np.ndarray) -> tuple:
    return (-value, tuple(np.column_stack([z.real, z.imag]).ravel()))


def _input_objective(n: QuantumChannel, m: QuantumChannel, kind: BaseDivergence):
    d = n.dim_in

    def evaluate(psi: np.ndarray) -> DivergenceValue:
        return kind.evaluate_arrays(_pure_output(n.kraus, psi, d), _pure_output(m.kraus, psi, d))

    def objective(x: np.ndarray) -> float:
        z = real_to_complex(x)
        return evaluate(z / np.linalg.norm(z)).value

    return evaluate, objective


def channel_divergence(
    n: QuantumChannel,
    m: QuantumChannel,
    kind: BaseDivergence,
    cfg: OptimizerConfig | None = None,
    seeds: Sequence[PureStateVector] = (),
    restarts: int | None = None,
) -> ChannelDivergence:
    """Worst-case divergence sup_psi D((id (x) N)(psi) || (id (x) M)(psi)) over pure inputs.

    Estimated by multi-start ascent on the unit sphere of R (x) A with |R| = |A|.
    Seeds are polished first, then the maximally entangled input, then `restarts`
    random inputs (cfg.restarts when omitted). The reported value is the exact
    re-evaluation at the stored witness, so it is a certified lower estimate.
    """
    check_channel_pair(n, m)
    cfg = cfg or OptimizerConfig()
    d = n.dim_in
    check_budget(d, n.dim_out)
    dims = n.dims_in + n.dims_in
    evaluate, objective = _input_objective(n, m, kind)

    starts = []
    for seed in seeds:
        if seed.dim != d * d:
            raise DomainError(f"seed of dimension {seed.dim} does not fit input space {dims}")
        starts.append(complex_to_real(seed.amplitudes))
    restarts = cfg.restarts if restarts is None else restarts
    if restarts > 0:
        starts.append(complex_to_real(maximally_entangled(d).amplitudes))
        for index in range(restarts):
            starts.append(complex_to_real(complex_normal(trial_rng(cfg.seed, index), d * d)))
    if not starts:
        raise DomainError("channel divergence needs at least one seed or restart")

    manifold = SphereProduct((2 * d * d,))
    results: list[AscentResult] = run_parallel(
        lambda x0: ascend(objective, x0, cfg, manifold), starts, cfg.workers
    )
    candidates = []
    for result in results:
        z = real_to_complex(result.x)
        z = _canonical_phase(z / np.linalg.norm(z))
        candidates.append((result.value, z))
    value, z = min(candidates, key=lambda c: _witness_key(*c))
    witness = PureStateVector(z, dims, normalize=True)
    exact = evaluate(witness.amplitudes)
    logger.debug(
        "%s channel divergence %.12g from %d starts", kind.label, exact.value, len(starts)
    )
    return ChannelDivergence(exact, witness, kind.label)


def tensor_witness(first: PureStateVector, second: PureStateVector) -> PureStateVector:
    """psi_1 (x) psi_2 for witnesses laid out (R, A), regrouped as (R_1 R_2, A_1 A_2)."""
    a, b = len(first.dims) // 2, len(second.dims) // 2
    product = tensor_vectors(first, second)
    perm = (
        list(range(a))
        + list(range(2 * a, 2 * a + b))
        + list(range(a, 2 * a))
        + list(range(2 * a + b, 2 * a + 2 * b))
    )
    return permute_vector(product, perm)


def regularized_estimate(
    n: QuantumChannel,
    m: QuantumChannel,
    kind: BaseDivergence,
    n_max: int = 2,
    cfg: OptimizerConfig | None = None,
) -> list[RegularizedPoint]:
    """a_k = (1/k) D(N^(x)k || M^(x)k) for k = 1..n_max.

    Copy count k is seeded with the (k-1)-copy witness tensored with the one-copy
    witness, so superadditive kinds give a_k >= a_1 up to rounding.
    """
    check_channel_pair(n, m)
    cfg = cfg or OptimizerConfig()
    if n_max < 1:
        raise DomainError(f"n_max must be positive, got {n_max}")
    check_budget(n.dim_in, n.dim_out, n_max)
    points: list[RegularizedPoint] = []
    for k in range(1, n_max + 1):
        seeds = [tensor_witness(points[-1].witness, points[0].witness)] if points else []
        result = channel_divergence(tensor_power(n, k), tensor_power(m, k), kind, cfg, seeds=seeds)
        points.append(RegularizedPoint(k, result.value.value / k, result.witness))
        logger.info("regularized %s estimate a_%d = %.12g", kind.label, k, points[-1].value)
    return points


def _gram_state(g: np.ndarray) -> np.ndarray:
    return g @ g.conj().T / np.vdot(g, g).real


def _state_root(rho: DensityOperator) -> np.ndarray:
    return spectral_function(rho.data, np.sqrt, KernelPolicy.MAP_ZERO_TO_ZERO)


def amortized_search(
    n: QuantumChannel,
    m: QuantumChannel,
    kind: BaseDivergence,
    ref_dim: int | None = None,
    cfg: OptimizerConfig | None = None,
    seeds: Sequence[tuple[DensityOperator, DensityOperator]] = (),
    restarts: int | None = None,
    polish_seeds: bool = True,
) -> AmortizedWitness:
    """Best pair found for sup D(N(psi)||M(phi)) - D(psi||phi) over states on R (x) A.

    Each state is parameterized as G G^dagger / tr(G G^dagger) with G on a unit
    sphere. Without explicit seeds the one-shot channel divergence witness
    (psi = phi) is used, so the result never falls below that estimate. Random
    restarts begin from full-rank psi = phi.
    """
    if not isinstance(kind, (Umegaki, SandwichedRenyi)):
        raise DomainError(f"amortized search supports umegaki and sandwiched kinds, not {kind.label}")
    check_channel_pair(n, m)
    cfg = cfg or OptimizerConfig()
    d = n.dim_in
    ref_dim = ref_dim or d * d
    if ref_dim < d:
        raise DomainError(f"reference dimension {ref_dim} is smaller than the input dimension {d}")
    size = ref_dim * d
    if size > DENSE_LIMIT or ref_dim * n.dim_out > DENSE_LIMIT:
        raise ResourceError(f"reference dimension {ref_dim} exceeds the dense limit")
    dims = (ref_dim,) + n.dims_in

    def states(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        half = x.size // 2
        g_psi = real_to_complex(x[:half]).reshape(size, size)
        g_phi = real_to_complex(x[half:]).reshape(size, size)
        return _gram_state(g_psi), _gram_state(g_phi)

    def gap(psi: np.ndarray, phi: np.ndarray) -> float:
        before = kind.evaluate_arrays(psi, phi).value
        if math.isinf(before):
            return -math.inf
        after = kind.evaluate_arrays(
            apply_kraus(n.kraus, psi, pre=ref_dim), apply_kraus(m.kraus, phi, pre=ref_dim)
        ).value
        return after - before

    def objective(x: np.ndarray) -> float:
        return gap(*states(x))

    pairs = list(seeds)
    if not pairs:
        witness = channel_divergence(n, m, kind, cfg).witness
        padded = np.zeros((ref_dim, d), dtype=complex)
        padded[:d] = witness.amplitudes.reshape(d, d)
        rho = DensityOperator.trusted(np.outer(padded.reshape(-1), padded.reshape(-1).conj()), dims)
        pairs.append((rho, rho))
    starts = []
    for psi, phi in pairs:
        if psi.dim != size or phi.dim != size:
            raise DomainError(f"seed pair does not live on a space of dimension {size}")
        starts.append(
            np.concatenate([complex_to_real(_state_root(psi)), complex_to_real(_state_root(phi))])
        )
    seed_count = len(starts)
    restarts = cfg.restarts if restarts is None else restarts
    for index in range(restarts):
        g = complex_to_real(complex_normal(trial_rng(cfg.seed, index), (size, size)))
        starts.append(np.concatenate([g, g]))

    manifold = SphereProduct((2 * size * size, 2 * size * size))

    def polish(item: tuple[int, np.ndarray]) -> AscentResult:
        index, x0 = item
        if index < seed_count and not polish_seeds:
            x = manifold.retract(x0, np.zeros_like(x0))
            return AscentResult(x, objective(x), 0, True)
        return ascend(objective, x0, cfg, manifold)

    results = run_parallel(polish, list(enumerate(starts)), cfg.workers)
    best = max(results, key=lambda r: r.value)
    psi, phi = states(best.x)
    value = gap(psi, phi)
    logger.debug("amortized %s lower bound %.12g (ref dim %d)", kind.label, value, ref_dim)
    return AmortizedWitness(
        value, DensityOperator.trusted(psi, dims), DensityOperator.trusted(phi, dims)
    )


def amortized_lowerbound(
    n: QuantumChannel,
    m: QuantumChannel,
    kind: BaseDivergence,
    ref_dim: int | None = None,
    cfg: OptimizerConfig | None = None,
) -> float:
    return amortized_search(n, m, kind, ref_dim, cfg).value


def choi_dmax(n: QuantumChannel, m: QuantumChannel) -> DivergenceValue:
    """D_max(J_N || J_M) on the unnormalized Choi matrices."""
    check_channel_pair(n, m)
    return dmax_array(n.choi.data, m.choi.data)
