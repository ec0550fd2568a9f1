"""Dense statevector simulation of the gate list.

Amplitudes live in one flat array indexed by basis state, with qubit k at
bit position k.  Gates act in place through reshaped views: a one-qubit
gate on qubit q sees the array as (blocks, 2, 2^q) and mixes the two
middle slices; RZZ is diagonal and only multiplies phases.  Nothing ever
renormalizes, so global phase and accumulated rounding stay visible.

Single precision (complex64) is the default and costs 2^(n+3) bytes;
double costs 2^(n+4).  Requests over the memory budget raise
``CapacityError`` up front, naming the required bytes.
"""

from __future__ import annotations

import cmath
import enum
import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import CircuitIR, GateOp
from .errors import CapacityError, StateError, ValidationError
from .problem import WmcInstance, cut_values_range, index_to_bitstring
from .rng import derive_rng

DEFAULT_MEMORY_BUDGET = 4 << 30  # bytes, overridable via LRQBENCH_MEMORY_BYTES
_EXPECTATION_CHUNK = 1 << 16


class Precision(enum.Enum):
    FP32 = "fp32"
    FP64 = "fp64"

    @classmethod
    def coerce(cls, value: "Precision | str") -> "Precision":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"unknown precision {value!r}") from None

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.complex64 if self is Precision.FP32 else np.complex128)

    @property
    def bytes_per_amplitude(self) -> int:
        return self.dtype.itemsize


def state_bytes(num_qubits: int, precision: Precision) -> int:
    return precision.bytes_per_amplitude << num_qubits


def memory_budget_bytes(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    return int(os.environ.get("LRQBENCH_MEMORY_BYTES", DEFAULT_MEMORY_BUDGET))


def check_memory(num_qubits: int, precision: Precision, budget: int | None = None) -> None:
    need = state_bytes(num_qubits, precision)
    limit = memory_budget_bytes(budget)
    if need > limit:
        raise CapacityError(
            f"statevector for {num_qubits} qubits at {precision.value} needs "
            f"{need} bytes ({need / (1 << 30):.1f} GiB), budget is {limit} bytes"
        )


@dataclass
class StateVector:
    num_qubits: int
    amps: np.ndarray

    @property
    def precision(self) -> Precision:
        return Precision.FP32 if self.amps.dtype == np.complex64 else Precision.FP64

    def norm_squared(self) -> float:
        return float(np.real(np.vdot(self.amps, self.amps)))

    def norm_tolerance(self) -> float:
        """Allowed drift of the squared norm: 10 * 2^n * machine epsilon."""
        eps = np.finfo(self.amps.real.dtype).eps
        return 10.0 * (1 << self.num_qubits) * float(eps)

    def probabilities(self) -> np.ndarray:
        amps = self.amps.astype(np.complex128, copy=False)
        return (amps.real**2 + amps.imag**2).astype(np.float64)


def zero_state(
    num_qubits: int,
    precision: Precision | str = Precision.FP32,
    memory_budget: int | None = None,
) -> StateVector:
    precision = Precision.coerce(precision)
    if num_qubits < 1:
        raise ValidationError(f"need at least one qubit, got {num_qubits}")
    check_memory(num_qubits, precision, memory_budget)
    amps = np.zeros(1 << num_qubits, dtype=precision.dtype)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def init_plus_state(
    num_qubits: int,
    precision: Precision | str = Precision.FP32,
    memory_budget: int | None = None,
) -> StateVector:
    """Uniform superposition with amplitude 2^(-n/2) everywhere."""
    sv = zero_state(num_qubits, precision, memory_budget)
    sv.amps[:] = sv.amps.dtype.type(1.0 / math.sqrt(1 << num_qubits))
    return sv


# ---------------------------------------------------------------------------
# gate kernels (operate on raw amplitude arrays; used by the sharded engine too)


def _h_kernel(amps: np.ndarray, q: int) -> None:
    inv = amps.dtype.type(1.0 / math.sqrt(2.0))
    v = amps.reshape(-1, 2, 1 << q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = (a0 + a1) * inv
    v[:, 1, :] = (a0 - a1) * inv


def _rx_kernel(amps: np.ndarray, theta: float, q: int) -> None:
    c = amps.dtype.type(math.cos(theta / 2.0))
    s = amps.dtype.type(-1j * math.sin(theta / 2.0))
    v = amps.reshape(-1, 2, 1 << q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = c * a0 + s * a1
    v[:, 1, :] = s * a0 + c * a1


def _rzz_kernel(amps: np.ndarray, theta: float, qa: int, qb: int) -> None:
    i, j = (qa, qb) if qa < qb else (qb, qa)
    equal = amps.dtype.type(cmath.exp(-0.5j * theta))
    differ = amps.dtype.type(cmath.exp(0.5j * theta))
    v = amps.reshape(-1, 2, 1 << (j - i - 1), 2, 1 << i)
    v[:, 0, :, 0, :] *= equal
    v[:, 1, :, 1, :] *= equal
    v[:, 0, :, 1, :] *= differ
    v[:, 1, :, 0, :] *= differ


def _apply_gate_kernel(amps: np.ndarray, gate: GateOp, qubits: tuple[int, ...]) -> None:
    if gate.kind == "H":
        _h_kernel(amps, qubits[0])
    elif gate.kind == "RX":
        _rx_kernel(amps, gate.theta, qubits[0])
    elif gate.kind == "RZZ":
        _rzz_kernel(amps, gate.theta, qubits[0], qubits[1])
    else:  # pragma: no cover - GateOp validation rejects this earlier
        raise ValidationError(f"unknown gate kind {gate.kind!r}")


def _check_qubit(sv: StateVector, q: int) -> None:
    if not 0 <= q < sv.num_qubits:
        raise ValidationError(f"qubit {q} out of range for {sv.num_qubits} qubits")


def apply_h(sv: StateVector, q: int) -> None:
    _check_qubit(sv, q)
    _h_kernel(sv.amps, q)


def apply_rx(sv: StateVector, theta: float, q: int) -> None:
    _check_qubit(sv, q)
    _rx_kernel(sv.amps, theta, q)


def apply_rzz(sv: StateVector, theta: float, qa: int, qb: int) -> None:
    _check_qubit(sv, qa)
    _check_qubit(sv, qb)
    if qa == qb:
        raise ValidationError("RZZ qubits must differ")
    _rzz_kernel(sv.amps, theta, qa, qb)


def apply_gate(sv: StateVector, gate: GateOp) -> None:
    for q in gate.qubits:
        _check_qubit(sv, q)
    _apply_gate_kernel(sv.amps, gate, gate.qubits)


def run_circuit(
    circuit: CircuitIR,
    precision: Precision | str = Precision.FP32,
    memory_budget: int | None = None,
) -> StateVector:
    """Evolve |0...0> through the full gate list (the IR includes its H layer)."""
    sv = zero_state(circuit.num_qubits, precision, memory_budget)
    for gate in circuit.gates:
        _apply_gate_kernel(sv.amps, gate, gate.qubits)
    return sv


# ---------------------------------------------------------------------------
# observables and sampling


def expected_r_from_probs(probs: np.ndarray, inst: WmcInstance) -> float:
    """Expected approximation ratio of an explicit basis-state distribution."""
    if probs.size != 1 << inst.num_vertices:
        raise ValidationError(
            f"distribution over {probs.size} states does not match n={inst.num_vertices}"
        )
    if inst.optimal_cut is None:
        raise StateError("instance has no optimal cut; solve it first")
    total = 0.0
    for lo in range(0, probs.size, _EXPECTATION_CHUNK):
        hi = min(lo + _EXPECTATION_CHUNK, probs.size)
        total += float(probs[lo:hi] @ cut_values_range(inst, lo, hi))
    return total / inst.optimal_cut.value


def exact_expected_r(sv: StateVector, inst: WmcInstance) -> float:
    """Expected approximation ratio of the full distribution, no sampling."""
    if inst.num_vertices != sv.num_qubits:
        raise ValidationError(
            f"instance has {inst.num_vertices} vertices, state has {sv.num_qubits} qubits"
        )
    return expected_r_from_probs(sv.probabilities(), inst)


@dataclass(eq=False)
class ShotSet:
    """Measurement outcomes as basis indices, tagged with their provenance."""

    num_qubits: int
    indices: np.ndarray
    rng_seed: int | None
    source: str

    def __len__(self) -> int:
        return int(self.indices.size)

    def bitstrings(self) -> list[str]:
        return [index_to_bitstring(int(z), self.num_qubits) for z in self.indices]


def draw_indices(probs: np.ndarray, n_shots: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draw over an unnormalized probability vector."""
    if n_shots < 1:
        raise ValidationError(f"shot count must be positive, got {n_shots}")
    cdf = np.cumsum(probs)
    if cdf[-1] <= 0.0:
        raise ValidationError("statevector has zero norm, nothing to sample")
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(n_shots), side="right")
    return np.minimum(idx, cdf.size - 1).astype(np.uint64)


def sample(sv: StateVector, n_shots: int, rng_seed: int) -> ShotSet:
    """Draw basis states by inverse-CDF over |amplitude|^2.

    The CDF is renormalized in double precision, so single-precision
    norm drift does not bias the draw.  Same seed, same shots.
    """
    idx = draw_indices(sv.probabilities(), n_shots, derive_rng(rng_seed, "shots", 0))
    return ShotSet(sv.num_qubits, idx, int(rng_seed), "noiseless")


# ---------------------------------------------------------------------------
# binary statevector dump

_MAGIC = b"LQSV"
_HEADER = struct.Struct("<4sBBH")  # magic, format version, float bytes, num_qubits


def save_statevector(sv: StateVector, path: str | Path) -> None:
    """Write little-endian interleaved re/im pairs behind a small header."""
    float_bytes = sv.precision.bytes_per_amplitude // 2
    code = "<c8" if sv.precision is Precision.FP32 else "<c16"
    payload = np.ascontiguousarray(sv.amps, dtype=code).tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, 1, float_bytes, sv.num_qubits))
        fh.write(payload)


def load_statevector(path: str | Path) -> StateVector:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValidationError(f"{path} is not a statevector dump (truncated header)")
    magic, version, float_bytes, num_qubits = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != 1:
        raise ValidationError(f"{path} is not a statevector dump (bad magic/version)")
    if float_bytes == 4:
        precision = Precision.FP32
    elif float_bytes == 8:
        precision = Precision.FP64
    else:
        raise ValidationError(f"{path} has unsupported float width {float_bytes}")
    code = "<c8" if precision is Precision.FP32 else "<c16"
    amps = np.frombuffer(raw, dtype=code, offset=_HEADER.size)
    if amps.size != 1 << num_qubits:
        raise ValidationError(
            f"{path} payload has {amps.size} amplitudes, expected {1 << num_qubits}"
        )
    return StateVector(num_qubits, amps.astype(precision.dtype))
