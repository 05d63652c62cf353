from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from chandisc.errors import DomainError
from chandisc.qmat.operators import (
    Dims,
    HermitianOperator,
    eigh,
    partial_trace_array,
    permute_array,
)
from chandisc.qmat.states import DensityOperator

CPTP_TOL = 1e-9
# Choi eigenvalues below this fraction of the largest are dropped when extracting Kraus operators.
KRAUS_CUTOFF = 1e-14


def _as_dims(dims: Sequence[int] | int) -> Dims:
    return (int(dims),) if isinstance(dims, (int, np.integer)) else tuple(int(d) for d in dims)


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A CPTP map stored as a stack of Kraus operators of shape (count, dim_out, dim_in)."""

    kraus: np.ndarray
    dims_in: Dims
    dims_out: Dims

    def __post_init__(self):
        kraus = np.array(self.kraus, dtype=complex)
        if kraus.ndim == 2:
            kraus = kraus[np.newaxis]
        dims_in = _as_dims(self.dims_in)
        dims_out = _as_dims(self.dims_out)
        if kraus.ndim != 3 or kraus.shape[1:] != (math.prod(dims_out), math.prod(dims_in)):
            raise DomainError(
                f"Kraus operators of shape {kraus.shape[1:]} do not map {dims_in} to {dims_out}"
            )
        gram = np.einsum("kji,kjl->il", kraus.conj(), kraus)
        deviation = float(np.max(np.abs(gram - np.eye(kraus.shape[2]))))
        if deviation > CPTP_TOL:
            raise DomainError(f"Kraus operators are not trace preserving (deviation {deviation:.3e})")
        kraus.setflags(write=False)
        object.__setattr__(self, "kraus", kraus)
        object.__setattr__(self, "dims_in", dims_in)
        object.__setattr__(self, "dims_out", dims_out)

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    @cached_property
    def choi(self) -> HermitianOperator:
        """sum_ij |i><j| (x) N(|i><j|), ordered (input, output)."""
        vectors = self.kraus.transpose(0, 2, 1).reshape(self.kraus.shape[0], -1)
        data = vectors.T @ vectors.conj()
        return HermitianOperator(data, self.dims_in + self.dims_out, check=False)


def apply_kraus(kraus: np.ndarray, data: np.ndarray, pre: int = 1, post: int = 1) -> np.ndarray:
    """Act with a Kraus stack on the middle factor of a (pre, dim_in, post) operator."""
    _, d_out, d_in = kraus.shape
    x = data.reshape(pre, d_in, post, pre, d_in, post)
    out = np.einsum("kij,ajblmc,knm->aiblnc", kraus, x, kraus.conj(), optimize=True)
    d = pre * d_out * post
    return out.reshape(d, d)


def _acting_layout(channel: QuantumChannel, dims: Dims, acting: Sequence[int]) -> list[int]:
    acting = [int(i) for i in acting]
    if len(set(acting)) != len(acting) or any(i < 0 or i >= len(dims) for i in acting):
        raise DomainError(f"invalid acting subsystems {acting} for {dims}")
    acting_dims = tuple(dims[i] for i in acting)
    if math.prod(acting_dims) != channel.dim_in:
        raise DomainError(f"subsystems {acting_dims} do not match channel input {channel.dims_in}")
    if len(acting_dims) == len(channel.dims_in) and acting_dims != channel.dims_in:
        raise DomainError(f"subsystems {acting_dims} do not match channel input {channel.dims_in}")
    return acting


def _output_order(
    dims: Dims, acting: list[int], dims_out: Dims
) -> tuple[list[int], Dims]:
    """Where each output subsystem lands once the channel block is put back in place.

    Outputs replace the acting subsystems one for one when the counts agree;
    otherwise the whole output block is inserted at the first acting position.
    """
    rest = [i for i in range(len(dims)) if i not in acting]
    # labels in the computed layout: outputs first, then untouched subsystems
    computed = [("out", j) for j in range(len(dims_out))] + [("in", i) for i in rest]
    if len(dims_out) == len(acting):
        slot = {i: j for j, i in enumerate(acting)}
        target = [("out", slot[i]) if i in slot else ("in", i) for i in range(len(dims))]
    else:
        first = min(acting)
        target = []
        for i in range(len(dims)):
            if i == first:
                target.extend(("out", j) for j in range(len(dims_out)))
            elif i not in acting:
                target.append(("in", i))
    perm = [computed.index(label) for label in target]
    new_dims = tuple(dims_out[j] if kind == "out" else dims[j] for kind, j in target)
    return perm, new_dims


def apply_channel(
    channel: QuantumChannel, rho: DensityOperator, acting: Sequence[int] | None = None
) -> DensityOperator:
    """Apply `channel` to the listed subsystems of `rho`, identity elsewhere."""
    dims = rho.dims
    if acting is None:
        acting = range(len(dims))
    acting = _acting_layout(channel, dims, acting)
    rest = [i for i in range(len(dims)) if i not in acting]
    moved = permute_array(rho.data, dims, acting + rest)
    rest_dim = math.prod(dims[i] for i in rest)
    out = apply_kraus(channel.kraus, moved, pre=1, post=rest_dim)
    computed_dims = channel.dims_out + tuple(dims[i] for i in rest)
    perm, new_dims = _output_order(dims, acting, channel.dims_out)
    return DensityOperator.trusted(permute_array(out, computed_dims, perm), new_dims)


def apply_choi(
    channel: QuantumChannel, rho: DensityOperator, acting: Sequence[int] | None = None
) -> DensityOperator:
    """Same action as apply_channel, computed by contracting with the Choi matrix.

    N(X) = tr_in[(X^T (x) I) J_N], extended by the identity on the remaining subsystems.
    """
    dims = rho.dims
    if acting is None:
        acting = range(len(dims))
    acting = _acting_layout(channel, dims, acting)
    rest = [i for i in range(len(dims)) if i not in acting]
    rest_dim = math.prod(dims[i] for i in rest)
    d_in, d_out = channel.dim_in, channel.dim_out
    x = permute_array(rho.data, dims, acting + rest).reshape(d_in, rest_dim, d_in, rest_dim)
    j = channel.choi.data.reshape(d_in, d_out, d_in, d_out)
    out = np.einsum("iajb,ipjq->paqb", x, j).reshape(d_out * rest_dim, d_out * rest_dim)
    computed_dims = channel.dims_out + tuple(dims[i] for i in rest)
    perm, new_dims = _output_order(dims, acting, channel.dims_out)
    return DensityOperator.trusted(permute_array(out, computed_dims, perm), new_dims)


def channel_from_choi(
    choi: np.ndarray | HermitianOperator, dims_in: Sequence[int] | int, dims_out: Sequence[int] | int
) -> QuantumChannel:
    data = choi.data if isinstance(choi, HermitianOperator) else np.asarray(choi, dtype=complex)
    dims_in, dims_out = _as_dims(dims_in), _as_dims(dims_out)
    d_in, d_out = math.prod(dims_in), math.prod(dims_out)
    w, v = eigh(data)
    keep = w > KRAUS_CUTOFF * max(float(w[-1]), 0.0)
    vectors = v[:, keep] * np.sqrt(w[keep])
    kraus = vectors.T.reshape(-1, d_in, d_out).transpose(0, 2, 1)
    return QuantumChannel(kraus, dims_in, dims_out)


def identity_channel(d: int = 2) -> QuantumChannel:
    return QuantumChannel(np.eye(d, dtype=complex), (d,), (d,))


def unitary_channel(u: np.ndarray, dims: Sequence[int] | int | None = None) -> QuantumChannel:
    u = np.asarray(u, dtype=complex)
    dims = _as_dims(dims if dims is not None else u.shape[0])
    return QuantumChannel(u, dims, dims)


def replacer_channel(tau: DensityOperator, dims_in: Sequence[int] | int = 2) -> QuantumChannel:
    """R_tau(X) = tr(X) tau, with Kraus operators sqrt(w_k)|v_k><i|."""
    dims_in = _as_dims(dims_in)
    d_in = math.prod(dims_in)
    w, v = tau.spectrum
    kraus = [
        math.sqrt(float(wk)) * np.outer(v[:, k], basis)
        for k, wk in enumerate(w)
        if wk > 0.0
        for basis in np.eye(d_in)
    ]
    return QuantumChannel(np.array(kraus), dims_in, tau.dims)


def depolarizing_channel(p: float, d: int = 2) -> QuantumChannel:
    """(1 - p) rho + p tr(rho) I/d, with p the noise weight in [0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"depolarizing weight must lie in [0, 1], got {p}")
    kraus = [math.sqrt(1.0 - p) * np.eye(d)] if p < 1.0 else []
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d))
            unit[i, j] = 1.0
            kraus.append(math.sqrt(p / d) * unit)
    return QuantumChannel(np.array(kraus, dtype=complex), (d,), (d,))


def amplitude_damping_channel(gamma: float) -> QuantumChannel:
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"damping rate must lie in [0, 1], got {gamma}")
    k0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]])
    k1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]])
    return QuantumChannel(np.array([k0, k1], dtype=complex), (2,), (2,))


def tensor_channels(first: QuantumChannel, second: QuantumChannel) -> QuantumChannel:
    kraus = np.einsum("aij,bkl->abikjl", first.kraus, second.kraus)
    count = first.kraus.shape[0] * second.kraus.shape[0]
    kraus = kraus.reshape(count, first.dim_out * second.dim_out, first.dim_in * second.dim_in)
    return QuantumChannel(kraus, first.dims_in + second.dims_in, first.dims_out + second.dims_out)


def tensor_power(channel: QuantumChannel, copies: int) -> QuantumChannel:
    if copies < 1:
        raise DomainError(f"copy count must be positive, got {copies}")
    result = channel
    for _ in range(copies - 1):
        result = tensor_channels(result, channel)
    return result


def mix_channels(weights: Sequence[float], channels: Sequence[QuantumChannel]) -> QuantumChannel:
    """Convex combination sum_i w_i N_i, realized by stacking sqrt(w_i)-scaled Kraus sets."""
    first = channels[0]
    if any(c.dims_in != first.dims_in or c.dims_out != first.dims_out for c in channels):
        raise DomainError("cannot mix channels with different dimensions")
    if any(w < 0.0 for w in weights) or abs(sum(weights) - 1.0) > CPTP_TOL:
        raise DomainError(f"mixture weights must be a probability vector, got {list(weights)}")
    kraus = np.concatenate(
        [math.sqrt(w) * c.kraus for w, c in zip(weights, channels) if w > 0.0]
    )
    return QuantumChannel(kraus, first.dims_in, first.dims_out)


def choi_marginal(channel: QuantumChannel) -> np.ndarray:
    """Partial trace of the Choi matrix over the output; the identity for CPTP maps."""
    n_in = len(channel.dims_in)
    return partial_trace_array(channel.choi.data, channel.choi.dims, list(range(n_in)))
