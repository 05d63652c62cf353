from collections.abc import Sequence
import itertools
import math

import numpy as np

from chandisc.errors import DomainError, PreconditionError
from chandisc.qmat.channels import QuantumChannel
from chandisc.qmat.operators import Dims, KernelPolicy, permute_array, spectral_function
from chandisc.qmat.states import DensityOperator, PureStateVector

SYMMETRY_TOL = 1e-9


def _block_dims(dims: Dims, copies: int) -> Dims:
    if copies < 1 or len(dims) % copies:
        raise DomainError(f"{dims} cannot be split into {copies} copies")
    size = len(dims) // copies
    block = dims[:size]
    if dims != block * copies:
        raise DomainError(f"{dims} is not {copies} copies of the same subsystem block")
    return block


def copy_permutation(block_size: int, pi: Sequence[int]) -> list[int]:
    """Subsystem permutation that moves whole copies: copy j of the result is copy pi[j]."""
    return [pi[j] * block_size + s for j in range(len(pi)) for s in range(block_size)]


def permutation_unitary(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Unitary mapping a vector on `dims` to the same vector with subsystems reordered by `perm`."""
    dims = tuple(dims)
    d = math.prod(dims)
    indices = np.arange(d).reshape(dims).transpose(list(perm)).reshape(-1)
    matrix = np.zeros((d, d), dtype=complex)
    matrix[np.arange(d), indices] = 1.0
    return matrix


def permutation_channel(dims: Sequence[int], perm: Sequence[int]) -> QuantumChannel:
    dims = tuple(dims)
    return QuantumChannel(
        permutation_unitary(dims, perm), dims, tuple(dims[p] for p in perm)
    )


def symmetrize(psi: DensityOperator, copies: int) -> DensityOperator:
    """Uniform average of psi over all permutations of its `copies` identical blocks."""
    block = _block_dims(psi.dims, copies)
    total = np.zeros_like(psi.data)
    for pi in itertools.permutations(range(copies)):
        total += permute_array(psi.data, psi.dims, copy_permutation(len(block), pi))
    return DensityOperator.trusted(total / math.factorial(copies), psi.dims)


def is_permutation_invariant(omega: DensityOperator, copies: int, tol: float = SYMMETRY_TOL) -> bool:
    return symmetrize(omega, copies).max_distance(omega) <= tol


def symmetric_purification(omega: DensityOperator, copies: int) -> PureStateVector:
    """Canonical purification vec(sqrt omega) against a mirror copy of every block.

    The result is laid out per copy as (block, mirror), so that permuting whole
    copies of the doubled system leaves it invariant.
    """
    block = _block_dims(omega.dims, copies)
    if not is_permutation_invariant(omega, copies):
        raise PreconditionError("state is not invariant under permutations of its copies")
    root = spectral_function(omega.data, np.sqrt, KernelPolicy.MAP_ZERO_TO_ZERO)
    dims = omega.dims + omega.dims
    n = len(omega.dims)
    size = len(block)
    # system subsystems are 0..n-1, mirror subsystems n..2n-1
    order = [
        offset + c * size + s
        for c in range(copies)
        for offset in (0, n)
        for s in range(size)
    ]
    amplitudes = root.reshape(dims).transpose(order).reshape(-1)
    return PureStateVector(amplitudes, tuple(dims[i] for i in order), normalize=True)


def swap_expectation(state: PureStateVector, copies: int) -> float:
    """<psi| P_sym |psi>, the weight of the state in the symmetric subspace of its copies."""
    block = _block_dims(state.dims, copies)
    tensor = state.amplitudes.reshape(state.dims)
    total = 0.0
    for pi in itertools.permutations(range(copies)):
        permuted = tensor.transpose(copy_permutation(len(block), pi)).reshape(-1)
        total += float(np.vdot(state.amplitudes, permuted).real)
    return total / math.factorial(copies)
