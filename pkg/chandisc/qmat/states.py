from collections.abc import Sequence
from dataclasses import InitVar, dataclass
import math

import numpy as np

from chandisc.errors import DomainError
from chandisc.qmat.operators import (
    EIGEN_CLAMP_TOL,
    NORM_TOL,
    TRACE_TOL,
    Dims,
    HermitianOperator,
    reassemble,
)


@dataclass(frozen=True, eq=False)
class DensityOperator(HermitianOperator):
    """A positive semidefinite, unit-trace operator over a dimension profile.

    Eigenvalues in [-EIGEN_CLAMP_TOL, 0) are clamped to zero on construction;
    anything more negative is rejected.
    """

    def __post_init__(self, check: bool):
        super().__post_init__(check)
        if not check:
            return
        w, v = self.spectrum
        if w[0] < -EIGEN_CLAMP_TOL:
            raise DomainError(f"operator is not positive semidefinite (eigenvalue {w[0]:.3e})")
        trace = float(np.sum(w))
        if abs(trace - 1.0) > TRACE_TOL:
            raise DomainError(f"density operator must have unit trace, got {trace:.12g}")
        if w[0] < 0.0:
            w = np.clip(w, 0.0, None)
            data = reassemble(w, v)
            data.setflags(write=False)
            object.__setattr__(self, "data", data)
            object.__setattr__(self, "spectrum", (w, v))

    @classmethod
    def from_array(cls, data: np.ndarray, dims: Sequence[int] | None = None) -> "DensityOperator":
        return cls(np.asarray(data, dtype=complex), tuple(dims) if dims else None)

    @classmethod
    def trusted(cls, data: np.ndarray, dims: Dims) -> "DensityOperator":
        """Wrap an array produced by a trace- and positivity-preserving computation."""
        return cls(data, dims, check=False)

    @property
    def op(self) -> HermitianOperator:
        return HermitianOperator(self.data, self.dims, check=False)


@dataclass(frozen=True, eq=False)
class PureStateVector:
    amplitudes: np.ndarray
    dims: Dims | None = None
    normalize: InitVar[bool] = False

    def __post_init__(self, normalize: bool):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in (self.dims or (amplitudes.size,)))
        if math.prod(dims) != amplitudes.size:
            raise DomainError(f"dimension profile {dims} does not match {amplitudes.size} amplitudes")
        norm = float(np.linalg.norm(amplitudes))
        if normalize:
            if norm == 0.0:
                raise DomainError("cannot normalize the zero vector")
            amplitudes = amplitudes / norm
        elif abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state vector must have unit norm, got {norm:.15g}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> DensityOperator:
        return DensityOperator.trusted(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)


def maximally_mixed(dims: Sequence[int] | int) -> DensityOperator:
    dims = (dims,) if isinstance(dims, int) else tuple(dims)
    d = math.prod(dims)
    return DensityOperator.trusted(np.eye(d, dtype=complex) / d, dims)


def basis_state(index: int, dims: Sequence[int] | int) -> PureStateVector:
    dims = (dims,) if isinstance(dims, int) else tuple(dims)
    amplitudes = np.zeros(math.prod(dims), dtype=complex)
    amplitudes[index] = 1.0
    return PureStateVector(amplitudes, dims)


def maximally_entangled(d: int) -> PureStateVector:
    """(1/sqrt d) sum_i |i>|i> on a reference of dimension d followed by the system."""
    amplitudes = np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d)
    return PureStateVector(amplitudes, (d, d))


def diagonal_state(probabilities: Sequence[float]) -> DensityOperator:
    p = np.asarray(probabilities, dtype=float)
    return DensityOperator.from_array(np.diag(p).astype(complex))


def tensor_vectors(*states: PureStateVector) -> PureStateVector:
    amplitudes = states[0].amplitudes
    dims = states[0].dims
    for state in states[1:]:
        amplitudes = np.kron(amplitudes, state.amplitudes)
        dims = dims + state.dims
    return PureStateVector(amplitudes, dims, normalize=True)


def permute_vector(state: PureStateVector, perm: Sequence[int]) -> PureStateVector:
    """Reorder subsystems of a pure state so that new subsystem j is old subsystem perm[j]."""
    dims = state.dims
    amplitudes = state.amplitudes.reshape(dims).transpose(list(perm)).reshape(-1)
    return PureStateVector(amplitudes, tuple(dims[p] for p in perm))
