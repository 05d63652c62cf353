from collections.abc import Callable, Iterable, Sequence
from dataclasses import InitVar, dataclass
from enum import Enum
from functools import cached_property
import math

import numpy as np

from chandisc.errors import DomainError, SpectralDomainError

HERMITICITY_TOL = 1e-12
EIGEN_CLAMP_TOL = 1e-10
TRACE_TOL = 1e-10
SUPPORT_TOL = 1e-10
NORM_TOL = 1e-12
DENSE_LIMIT = 256

Dims = tuple[int, ...]


class KernelPolicy(Enum):
    RESTRICT_TO_SUPPORT = "restrict-to-support"
    ERROR_ON_KERNEL = "error-on-kernel"
    MAP_ZERO_TO_ZERO = "map-zero-to-zero"


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of the Hermitian part of `a`, eigenvalues ascending."""
    return np.linalg.eigh(hermitian_part(a))


def support_mask(w: np.ndarray) -> np.ndarray:
    """Eigenvalues that count as nonzero, relative to the largest one."""
    if w.size == 0:
        return np.zeros(0, dtype=bool)
    scale = float(np.max(np.abs(w)))
    if scale == 0.0:
        return np.zeros(w.shape, dtype=bool)
    return np.abs(w) > SUPPORT_TOL * scale


def reassemble(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (v * w) @ v.conj().T


def spectral_function(
    a: np.ndarray,
    f: Callable[[np.ndarray], np.ndarray],
    policy: KernelPolicy = KernelPolicy.RESTRICT_TO_SUPPORT,
) -> np.ndarray:
    w, v = eigh(a)
    match policy:
        case KernelPolicy.RESTRICT_TO_SUPPORT:
            keep = support_mask(w)
            values = np.zeros_like(w)
            values[keep] = f(w[keep])
        case KernelPolicy.MAP_ZERO_TO_ZERO:
            w = np.where(np.abs(w) <= EIGEN_CLAMP_TOL, 0.0, w)
            keep = w != 0.0
            values = np.zeros_like(w)
            values[keep] = f(w[keep])
        case KernelPolicy.ERROR_ON_KERNEL:
            with np.errstate(divide="ignore", invalid="ignore"):
                values = np.asarray(f(w), dtype=float)
            if not np.all(np.isfinite(values)):
                bad = w[~np.isfinite(values)]
                raise SpectralDomainError(
                    f"function undefined at eigenvalue(s) {bad.tolist()}"
                )
    return reassemble(values, v)


def _check_dims(dims: Sequence[int], dim: int) -> Dims:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d <= 0 for d in dims):
        raise DomainError(f"invalid dimension profile {dims}")
    if math.prod(dims) != dim:
        raise DomainError(f"dimension profile {dims} does not multiply to {dim}")
    return dims


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    data: np.ndarray
    dims: Dims | None = None
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] == 0:
            raise DomainError(f"expected a nonempty square matrix, got shape {data.shape}")
        dims = _check_dims(self.dims or (data.shape[0],), data.shape[0])
        if check:
            scale = max(1.0, float(np.max(np.abs(data))))
            skew = float(np.max(np.abs(data - data.conj().T)))
            if skew > HERMITICITY_TOL * scale:
                raise DomainError(f"matrix is not Hermitian (max skew {skew:.3e})")
        data = hermitian_part(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        return eigh(self.data)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum[0]

    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def with_dims(self, dims: Sequence[int]):
        return type(self)(self.data, tuple(dims), check=False)

    def max_distance(self, other: "HermitianOperator") -> float:
        return float(np.max(np.abs(self.data - other.data)))

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _require_same_dims(self, other)
        return HermitianOperator(self.data + other.data, self.dims, check=False)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        _require_same_dims(self, other)
        return HermitianOperator(self.data - other.data, self.dims, check=False)

    def __mul__(self, scalar: float) -> "HermitianOperator":
        return HermitianOperator(float(scalar) * self.data, self.dims, check=False)

    __rmul__ = __mul__

    def __neg__(self) -> "HermitianOperator":
        return HermitianOperator(-self.data, self.dims, check=False)


def _require_same_dims(a: HermitianOperator, b: HermitianOperator):
    if a.dims != b.dims:
        raise DomainError(f"dimension mismatch: {a.dims} vs {b.dims}")


def identity_operator(dims: Sequence[int]) -> HermitianOperator:
    d = math.prod(dims)
    return HermitianOperator(np.eye(d), tuple(dims), check=False)


def _same_type(ops: Sequence[HermitianOperator]) -> type[HermitianOperator]:
    first = type(ops[0])
    return first if all(type(op) is first for op in ops) else HermitianOperator


def tensor(a: HermitianOperator, b: HermitianOperator, *rest: HermitianOperator):
    """Kronecker product with concatenated dimension profiles.

    The result keeps the operand type when all operands share it, so the
    tensor product of density operators is again a density operator.
    """
    ops = (a, b, *rest)
    data = ops[0].data
    dims = ops[0].dims
    for op in ops[1:]:
        data = np.kron(data, op.data)
        dims = dims + op.dims
    return _same_type(ops)(data, dims, check=False)


def permute_array(data: np.ndarray, dims: Dims, perm: Sequence[int]) -> np.ndarray:
    """Reorder subsystems so that new subsystem j is old subsystem perm[j]."""
    n = len(dims)
    d = math.prod(dims)
    axes = list(perm) + [p + n for p in perm]
    return data.reshape(dims + dims).transpose(axes).reshape(d, d)


def permute_subsystems(x: HermitianOperator, perm: Sequence[int]):
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(len(x.dims))):
        raise DomainError(f"{perm} is not a permutation of {len(x.dims)} subsystems")
    dims = tuple(x.dims[p] for p in perm)
    return type(x)(permute_array(x.data, x.dims, perm), dims, check=False)


def partial_trace_array(data: np.ndarray, dims: Dims, keep: Sequence[int]) -> np.ndarray:
    keep = sorted(keep)
    traced = [i for i in range(len(dims)) if i not in keep]
    dk = math.prod(dims[i] for i in keep)
    dt = math.prod(dims[i] for i in traced)
    moved = permute_array(data, dims, keep + traced)
    return np.einsum("iaja->ij", moved.reshape(dk, dt, dk, dt))


def partial_trace(x: HermitianOperator, keep: Iterable[int]):
    """Trace out every subsystem not listed in `keep`; kept subsystems stay in order."""
    keep = sorted({int(i) for i in keep})
    if not keep or keep[0] < 0 or keep[-1] >= len(x.dims):
        raise DomainError(f"subsystem indices {keep} out of range for {x.dims}")
    dims = tuple(x.dims[i] for i in keep)
    return type(x)(partial_trace_array(x.data, x.dims, keep), dims, check=False)


def positive_part_trace(x: HermitianOperator) -> float:
    w = x.eigenvalues
    return float(np.sum(w[w > 0.0]))


def positive_part_trace_array(a: np.ndarray) -> float:
    w = np.linalg.eigvalsh(hermitian_part(a))
    return float(np.sum(w[w > 0.0]))


def trace_norm(x: HermitianOperator) -> float:
    return float(np.sum(np.abs(x.eigenvalues)))


def operator_norm(x: HermitianOperator) -> float:
    return float(np.max(np.abs(x.eigenvalues)))


def matrix_function(
    h: HermitianOperator,
    f: Callable[[np.ndarray], np.ndarray],
    policy: KernelPolicy = KernelPolicy.RESTRICT_TO_SUPPORT,
) -> HermitianOperator:
    """Apply `f` to the eigenvalues of `h` and reassemble in the same eigenbasis.

    Args:
        h: the operator.
        f: a vectorized real function of the eigenvalues.
        policy: how eigenvalues in the kernel are treated. RESTRICT_TO_SUPPORT
            applies `f` only to eigenvalues above the relative support threshold,
            MAP_ZERO_TO_ZERO clamps eigenvalues within EIGEN_CLAMP_TOL of zero and
            sends them to zero, ERROR_ON_KERNEL evaluates `f` everywhere and raises
            SpectralDomainError if any value is not finite.
    """
    return HermitianOperator(spectral_function(h.data, f, policy), h.dims, check=False)
