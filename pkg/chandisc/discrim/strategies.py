from collections.abc import Sequence
from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.linalg import expm

from chandisc.chandiv.optimizer import OptimizerConfig, ascend, complex_to_real, real_to_complex, run_parallel
from chandisc.errors import DomainError
from chandisc.qmat.channels import QuantumChannel, apply_channel, unitary_channel
from chandisc.qmat.operators import (
    EIGEN_CLAMP_TOL,
    Dims,
    HermitianOperator,
    identity_operator,
    permute_array,
    reassemble,
    tensor,
)
from chandisc.qmat.sampling import random_hermitian, trial_rng
from chandisc.qmat.states import DensityOperator
from chandisc.qmat.symmetry import permutation_channel
from chandisc.statediv.renyi import umegaki_array

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProductStrategy:
    """One input per channel use, each laid out as (reference, channel input)."""

    inputs: tuple[DensityOperator, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if not self.inputs:
            raise DomainError("a product strategy needs at least one input")


@dataclass(frozen=True, eq=False)
class CoherentStrategy:
    """A joint input on R (x) A_1 (x) ... (x) A_copies, reference subsystems first."""

    input: DensityOperator
    copies: int

    def __post_init__(self):
        if self.copies < 1:
            raise DomainError(f"copy count must be positive, got {self.copies}")


@dataclass(frozen=True, eq=False)
class SequentialStrategy:
    """An initial state on R_1 A_1 and updates R_k B_k -> R_{k+1} A_{k+1}.

    The channel always acts on the trailing subsystems of the register; every
    update acts on the whole register.
    """

    initial: DensityOperator
    updates: tuple[QuantumChannel, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "updates", tuple(self.updates))


Strategy = ProductStrategy | CoherentStrategy | SequentialStrategy


def strategy_copies(strategy: Strategy) -> int:
    match strategy:
        case ProductStrategy(inputs=inputs):
            return len(inputs)
        case CoherentStrategy(copies=copies):
            return copies
        case SequentialStrategy(updates=updates):
            return len(updates) + 1
    raise DomainError(f"not a strategy: {strategy!r}")


@dataclass(frozen=True, eq=False)
class TestOperator:
    """A two-outcome measurement effect 0 <= op <= I; accepting means deciding for N."""

    __test__ = False

    op: HermitianOperator

    def __post_init__(self):
        w, v = self.op.spectrum
        if w[0] < -EIGEN_CLAMP_TOL or w[-1] > 1.0 + EIGEN_CLAMP_TOL:
            raise DomainError(f"test spectrum [{w[0]:.3e}, {w[-1]:.3e}] leaves [0, 1]")
        if w[0] < 0.0 or w[-1] > 1.0:
            object.__setattr__(
                self, "op", HermitianOperator(reassemble(np.clip(w, 0.0, 1.0), v), self.op.dims, check=False)
            )

    @classmethod
    def accept_all(cls, dims: Sequence[int]) -> "TestOperator":
        return cls(identity_operator(dims))

    @classmethod
    def reject_all(cls, dims: Sequence[int]) -> "TestOperator":
        return cls(0.0 * identity_operator(dims))


@dataclass(frozen=True)
class ErrorPair:
    type1: float
    type2: float

    def __post_init__(self):
        for name in ("type1", "type2"):
            value = float(getattr(self, name))
            if not -EIGEN_CLAMP_TOL <= value <= 1.0 + EIGEN_CLAMP_TOL:
                raise DomainError(f"{name} error {value} is not a probability")
            object.__setattr__(self, name, min(max(value, 0.0), 1.0))


def error_pair(states: tuple[DensityOperator, DensityOperator], test: TestOperator) -> ErrorPair:
    """(tr[(I - Pi) rho], tr[Pi sigma]) for the testing states (rho, sigma)."""
    rho, sigma = states
    if rho.dims != sigma.dims or test.op.dim != rho.dim:
        raise DomainError(f"test of dimension {test.op.dim} does not fit states on {rho.dims}")
    accept = test.op.data
    type1 = 1.0 - float(np.einsum("ij,ji->", accept, rho.data).real)
    type2 = float(np.einsum("ij,ji->", accept, sigma.data).real)
    return ErrorPair(type1, type2)


def _trailing(dims: Dims, count: int) -> list[int]:
    return list(range(len(dims) - count, len(dims)))


def _check_reference_layout(state: DensityOperator, block: Dims, what: str) -> int:
    """Number of reference subsystems in front of a trailing `block`."""
    if len(state.dims) < len(block) or state.dims[len(state.dims) - len(block):] != block:
        raise DomainError(f"{what} on {state.dims} does not end with the channel input {block}")
    return len(state.dims) - len(block)


def _product_states(strategy: ProductStrategy, channel: QuantumChannel) -> DensityOperator:
    outputs = []
    for phi in strategy.inputs:
        _check_reference_layout(phi, channel.dims_in, "product input")
        outputs.append(apply_channel(channel, phi, _trailing(phi.dims, len(channel.dims_in))))
    return outputs[0] if len(outputs) == 1 else tensor(*outputs)


def _coherent_states(strategy: CoherentStrategy, channel: QuantumChannel) -> DensityOperator:
    refs = _check_reference_layout(strategy.input, channel.dims_in * strategy.copies, "coherent input")
    state = strategy.input
    width = len(channel.dims_in)
    for k in range(strategy.copies):
        # the first k inputs have already been replaced by outputs
        start = refs + k * len(channel.dims_out)
        state = apply_channel(channel, state, list(range(start, start + width)))
    return state


def _sequential_states(strategy: SequentialStrategy, channel: QuantumChannel) -> DensityOperator:
    state = strategy.initial
    for k in range(len(strategy.updates) + 1):
        _check_reference_layout(state, channel.dims_in, f"register before channel use {k + 1}")
        state = apply_channel(channel, state, _trailing(state.dims, len(channel.dims_in)))
        if k < len(strategy.updates):
            update = strategy.updates[k]
            if update.dim_in != state.dim:
                raise DomainError(
                    f"update {k + 1} expects input {update.dims_in} but the register is {state.dims}"
                )
            state = apply_channel(update, state)
    return state


def generate_testing_states(
    strategy: Strategy, n: QuantumChannel, m: QuantumChannel, copies: int
) -> tuple[DensityOperator, DensityOperator]:
    """The pair (rho_n, sigma_n) produced by running `strategy` against N and against M."""
    if n.dims_in != m.dims_in or n.dims_out != m.dims_out:
        raise DomainError("the two hypotheses must be channels between the same spaces")
    if strategy_copies(strategy) != copies:
        raise DomainError(f"strategy makes {strategy_copies(strategy)} channel uses, not {copies}")
    match strategy:
        case ProductStrategy():
            build = _product_states
        case CoherentStrategy():
            build = _coherent_states
        case SequentialStrategy():
            build = _sequential_states
    return build(strategy, n), build(strategy, m)


def _blocks_to_subsystems(sizes: Sequence[int], order: Sequence[int]) -> list[int]:
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    return [int(offsets[b]) + s for b in order for s in range(sizes[b])]


def identity_updates(
    ref_dims: Sequence[int], dims_in: Sequence[int], dims_out: Sequence[int], copies: int
) -> list[QuantumChannel]:
    """Register relabelings under which a sequential strategy replays a coherent one.

    Before channel use k the register holds R, B_1..B_{k-1}, A_{k+1}..A_n, A_k;
    update k moves the fresh output B_k in front of the unused inputs and brings
    A_{k+1} to the end.
    """
    ref_dims, dims_in, dims_out = tuple(ref_dims), tuple(dims_in), tuple(dims_out)
    updates = []
    for k in range(1, copies):
        # blocks: R, B_1..B_{k-1}, A_{k+1}, A_{k+2}..A_n, B_k
        blocks = [ref_dims] + [dims_out] * (k - 1) + [dims_in] * (copies - k) + [dims_out]
        sizes = [len(b) for b in blocks]
        nxt = k  # index of A_{k+1}
        order = list(range(k)) + [len(blocks) - 1] + list(range(nxt + 1, len(blocks) - 1)) + [nxt]
        dims = tuple(d for b in blocks for d in b)
        updates.append(permutation_channel(dims, _blocks_to_subsystems(sizes, order)))
    return updates


def sequential_from_coherent(strategy: CoherentStrategy, channel: QuantumChannel) -> SequentialStrategy:
    """A sequential strategy with relabeling updates and the same testing states."""
    block = channel.dims_in * strategy.copies
    refs = _check_reference_layout(strategy.input, block, "coherent input")
    width = len(channel.dims_in)
    # move A_1 behind A_2..A_n
    perm = (
        list(range(refs))
        + list(range(refs + width, len(strategy.input.dims)))
        + list(range(refs, refs + width))
    )
    dims = strategy.input.dims
    initial = DensityOperator.trusted(
        permute_array(strategy.input.data, dims, perm), tuple(dims[p] for p in perm)
    )
    updates = identity_updates(dims[:refs], channel.dims_in, channel.dims_out, strategy.copies)
    return SequentialStrategy(initial, tuple(updates))


def _hermitian_from_real(x: np.ndarray, d: int) -> np.ndarray:
    g = real_to_complex(x).reshape(d, d)
    return (g + g.conj().T) / 2


def greedy_sequential_updates(
    n: QuantumChannel,
    m: QuantumChannel,
    initial: DensityOperator,
    copies: int,
    cfg: OptimizerConfig | None = None,
) -> SequentialStrategy:
    """Build unitary updates one channel use at a time.

    Update k is exp(iH) on the whole register with H chosen to maximize the
    Umegaki divergence between the two registers right after channel use k + 1.
    The identity update is always among the starting points. Needs a channel
    whose output space equals its input space.
    """
    cfg = cfg or OptimizerConfig()
    if n.dims_in != n.dims_out or m.dims_in != n.dims_in or m.dims_out != n.dims_out:
        raise DomainError("greedy updates need two channels from a space to itself")
    width = len(n.dims_in)
    _check_reference_layout(initial, n.dims_in, "initial state")
    rho = apply_channel(n, initial, _trailing(initial.dims, width))
    sigma = apply_channel(m, initial, _trailing(initial.dims, width))
    updates: list[QuantumChannel] = []
    for k in range(1, copies):
        d = rho.dim
        acting = _trailing(rho.dims, width)

        def step(u: np.ndarray) -> tuple[DensityOperator, DensityOperator]:
            move = unitary_channel(u, rho.dims)
            return (
                apply_channel(n, apply_channel(move, rho), acting),
                apply_channel(m, apply_channel(move, sigma), acting),
            )

        def objective(x: np.ndarray) -> float:
            after_n, after_m = step(expm(1j * _hermitian_from_real(x, d)))
            return umegaki_array(after_n.data, after_m.data).value

        starts = [np.zeros(2 * d * d)]
        for index in range(cfg.restarts):
            h = random_hermitian(trial_rng(cfg.seed, k * cfg.restarts + index), d).data
            starts.append(complex_to_real(h))
        results = run_parallel(lambda x0: ascend(objective, x0, cfg), starts, cfg.workers)
        best = max(results, key=lambda r: r.value)
        u = expm(1j * _hermitian_from_real(best.x, d))
        # unitary up to rounding; re-orthonormalize before the CPTP check
        q, r = np.linalg.qr(u)
        u = q * (np.diag(r) / np.abs(np.diag(r)))
        updates.append(unitary_channel(u, rho.dims))
        rho, sigma = step(u)
        logger.debug("greedy update %d reaches divergence %.12g", k, best.value)
    if math.isinf(umegaki_array(rho.data, sigma.data).value):
        logger.info("greedy sequential strategy separates the hypotheses perfectly")
    return SequentialStrategy(initial, tuple(updates))
