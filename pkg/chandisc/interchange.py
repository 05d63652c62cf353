"""JSON interchange for states and channels.

Complex numbers are [re, im] pairs and matrices are row-major nested lists. A
channel file holds a ChannelSpec object:

    {"name": "...", "dim_in": 2, "dim_out": 2, "kraus": [[[[re, im], ...], ...], ...]}

and a state file holds {"dims": [2, 2], "matrix": [[[re, im], ...], ...]}, with
"dims" optional. The command line also accepts a few builtin names in place of
a file, see `load_channel` and `load_state`.
"""

from dataclasses import dataclass
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from chandisc.errors import DomainError, InterchangeError
from chandisc.qmat.channels import (
    QuantumChannel,
    amplitude_damping_channel,
    depolarizing_channel,
    identity_channel,
    replacer_channel,
)
from chandisc.qmat.states import DensityOperator, PureStateVector, basis_state, maximally_mixed

WITNESS_DECIMALS = 10


def encode_complex_array(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def decode_complex_array(data, ndim: int) -> np.ndarray:
    try:
        raw = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise InterchangeError(f"expected nested [re, im] pairs: {e}") from e
    if raw.ndim != ndim + 1 or raw.shape[-1] != 2:
        raise InterchangeError(f"expected a {ndim}-dimensional array of [re, im] pairs, got shape {raw.shape}")
    if not np.all(np.isfinite(raw)):
        raise InterchangeError("complex entries must be finite")
    return raw[..., 0] + 1j * raw[..., 1]


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    name: str
    dim_in: int
    dim_out: int
    kraus: np.ndarray

    @classmethod
    def from_channel(cls, name: str, channel: QuantumChannel) -> "ChannelSpec":
        return cls(name, channel.dim_in, channel.dim_out, channel.kraus)

    @classmethod
    def from_json(cls, data) -> "ChannelSpec":
        if not isinstance(data, dict):
            raise InterchangeError("channel spec must be a JSON object")
        missing = {"dim_in", "dim_out", "kraus"} - data.keys()
        if missing:
            raise InterchangeError(f"channel spec is missing {sorted(missing)}")
        dim_in, dim_out = data["dim_in"], data["dim_out"]
        if not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in (dim_in, dim_out)):
            raise InterchangeError(f"channel dimensions must be positive integers, got {dim_in}, {dim_out}")
        kraus = decode_complex_array(data["kraus"], 3)
        return cls(str(data.get("name", "channel")), dim_in, dim_out, kraus)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dim_in": self.dim_in,
            "dim_out": self.dim_out,
            "kraus": encode_complex_array(self.kraus),
        }

    def to_channel(self) -> QuantumChannel:
        try:
            return QuantumChannel(self.kraus, (self.dim_in,), (self.dim_out,))
        except DomainError as e:
            raise InterchangeError(f"channel {self.name!r} rejected: {e}") from e


def encode_state(rho: DensityOperator) -> dict:
    return {"dims": list(rho.dims), "matrix": encode_complex_array(rho.data)}


def decode_state(data) -> DensityOperator:
    if not isinstance(data, dict) or "matrix" not in data:
        raise InterchangeError("state must be a JSON object with a 'matrix' entry")
    matrix = decode_complex_array(data["matrix"], 2)
    try:
        return DensityOperator.from_array(matrix, data.get("dims"))
    except (TypeError, ValueError) as e:
        raise InterchangeError(f"state rejected: {e}") from e


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise InterchangeError(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise InterchangeError(f"{path} is not valid JSON: {e}") from e


def _parameter(source: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise InterchangeError(f"bad parameter in {source!r}") from e
    if not math.isfinite(value):
        raise InterchangeError(f"bad parameter in {source!r}")
    return value


def builtin_state(name: str) -> DensityOperator | None:
    match name:
        case "zero":
            return basis_state(0, 2).density()
        case "one":
            return basis_state(1, 2).density()
        case "plus":
            return PureStateVector(np.ones(2), (2,), normalize=True).density()
        case "mixed":
            return maximally_mixed(2)
    return None


def builtin_channel(source: str) -> QuantumChannel | None:
    """identity, replacer[:state], depolarizing:p and amplitude-damping:g, all on a qubit."""
    name, _, arg = source.partition(":")
    try:
        match name:
            case "identity":
                return identity_channel(2)
            case "replacer":
                tau = builtin_state(arg or "mixed")
                if tau is None:
                    raise InterchangeError(f"unknown replacement state in {source!r}")
                return replacer_channel(tau, 2)
            case "depolarizing":
                return depolarizing_channel(_parameter(source, arg), 2)
            case "amplitude-damping":
                return amplitude_damping_channel(_parameter(source, arg))
    except InterchangeError:
        raise
    except DomainError as e:
        raise InterchangeError(f"{source!r}: {e}") from e
    return None


def load_channel(source: str) -> QuantumChannel:
    return builtin_channel(source) or ChannelSpec.from_json(_read_json(source)).to_channel()


def load_state(source: str) -> DensityOperator:
    state = builtin_state(source)
    return state if state is not None else decode_state(_read_json(source))


def witness_hash(witness: PureStateVector) -> str:
    """Short digest of a witness, stable under rounding noise below WITNESS_DECIMALS.

    Adding a complex zero turns negative zeros positive before hashing.
    """
    rounded = np.round(witness.amplitudes, WITNESS_DECIMALS) + (0.0 + 0.0j)
    digest = hashlib.sha256(np.ascontiguousarray(rounded).tobytes())
    digest.update(json.dumps(list(witness.dims)).encode())
    return digest.hexdigest()[:16]
