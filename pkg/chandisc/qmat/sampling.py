"""Random states and channels used by the optimizers and the verification checks.

States follow the Hilbert-Schmidt measure (normalized Wishart G G^dagger), channels
come from truncating a Haar-random unitary to an isometry and cutting it into
Kraus blocks.
"""

from collections.abc import Sequence
import math

import numpy as np
from scipy.stats import unitary_group

from chandisc.qmat.channels import QuantumChannel
from chandisc.qmat.operators import HermitianOperator
from chandisc.qmat.states import DensityOperator, PureStateVector


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Private generator for work item `index` of a run seeded with `seed`."""
    return np.random.default_rng([int(seed) & (2**64 - 1), int(index)])


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def _dims(dims: Sequence[int] | int) -> tuple[int, ...]:
    return (dims,) if isinstance(dims, int) else tuple(dims)


def random_hermitian(rng: np.random.Generator, d: int) -> HermitianOperator:
    g = complex_normal(rng, (d, d))
    return HermitianOperator((g + g.conj().T) / 2, check=False)


def random_psd(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    g = complex_normal(rng, (d, rank or d))
    return g @ g.conj().T


def random_density(
    rng: np.random.Generator, dims: Sequence[int] | int, rank: int | None = None
) -> DensityOperator:
    dims = _dims(dims)
    w = random_psd(rng, math.prod(dims), rank)
    return DensityOperator.trusted(w / np.trace(w).real, dims)


def random_pure_state(rng: np.random.Generator, dims: Sequence[int] | int) -> PureStateVector:
    dims = _dims(dims)
    return PureStateVector(complex_normal(rng, math.prod(dims)), dims, normalize=True)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    if d == 1:
        return np.ones((1, 1), dtype=complex)
    return unitary_group.rvs(d, random_state=rng)


def random_probabilities(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.dirichlet(np.ones(d))


def random_channel(
    rng: np.random.Generator, d_in: int, d_out: int | None = None, kraus_count: int | None = None
) -> QuantumChannel:
    """Stinespring isometry taken from the first d_in columns of a Haar unitary."""
    d_out = d_out or d_in
    kraus_count = kraus_count or d_in * d_out
    isometry = random_unitary(rng, d_out * kraus_count)[:, :d_in]
    kraus = isometry.reshape(kraus_count, d_out, d_in)
    return QuantumChannel(kraus, (d_in,), (d_out,))


def random_test(rng: np.random.Generator, d: int) -> HermitianOperator:
    """A random operator 0 <= T <= I with spectrum drawn uniformly from [0, 1]."""
    u = random_unitary(rng, d)
    w = rng.uniform(0.0, 1.0, d)
    return HermitianOperator((u * w) @ u.conj().T, check=False)
