"""Two-qubit depolarizing noise via Monte Carlo Pauli trajectories.

Every RZZ gate is followed by a depolarizing channel on its qubit pair:
with probability epsilon the pair is replaced by the maximally mixed
state, ``rho -> (1 - eps) rho + eps I/4``.  Unraveled into trajectories,
that means: after the ideal gate, with probability 15 eps / 16 apply one
of the 15 non-identity two-qubit Paulis uniformly at random.  Averaging
|amplitude|^2 over trajectories recovers the channel.

Noise strength aggregates as eps_acc = N_2q * eps, and the overlap ratio

    r_ovl = (r_noisy - r_random) / (r_ideal - r_random)

is expected to decay as 2^(-k0 * eps_acc); ``fit_k0`` recovers k0 by a
least-squares line through the origin on -log2(r_ovl) versus eps_acc,
dropping non-positive overlaps (their count is reported).

Each trajectory draws from its own derived stream, so runs are
reproducible and trajectory order or thread count cannot change results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import CircuitIR
from .engine import (
    Precision,
    ShotSet,
    StateVector,
    _apply_gate_kernel,
    check_memory,
    draw_indices,
    expected_r_from_probs,
)
from .errors import FitError, ValidationError
from .problem import WmcInstance
from .rng import derive_rng

_PAULI_BRANCH = 15.0 / 16.0


@dataclass(frozen=True)
class DepolarizingConfig:
    """Channel strength, trajectory count, and the seed all streams derive from."""

    epsilon: float
    trajectories: int = 1
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValidationError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.trajectories < 1:
            raise ValidationError(f"need at least one trajectory, got {self.trajectories}")


def epsilon_accumulated(n_2q: int, epsilon: float) -> float:
    """Total accumulated error of a circuit: two-qubit gate count times epsilon."""
    return n_2q * epsilon


# ---------------------------------------------------------------------------
# Pauli kernels


def _x_kernel(amps: np.ndarray, q: int) -> None:
    v = amps.reshape(-1, 2, 1 << q)
    tmp = v[:, 0, :].copy()
    v[:, 0, :] = v[:, 1, :]
    v[:, 1, :] = tmp


def _y_kernel(amps: np.ndarray, q: int) -> None:
    v = amps.reshape(-1, 2, 1 << q)
    tmp = v[:, 0, :].copy()
    v[:, 0, :] = -1j * v[:, 1, :]
    v[:, 1, :] = 1j * tmp


def _z_kernel(amps: np.ndarray, q: int) -> None:
    v = amps.reshape(-1, 2, 1 << q)
    v[:, 1, :] *= -1


_PAULI_KERNELS = (None, _x_kernel, _y_kernel, _z_kernel)


def _apply_pauli_pair(amps: np.ndarray, code: int, qa: int, qb: int) -> None:
    """Apply the two-qubit Pauli numbered 1..15 (base-4 digits, 0 meaning I)."""
    pa, pb = divmod(code, 4)
    if pa:
        _PAULI_KERNELS[pa](amps, qa)
    if pb:
        _PAULI_KERNELS[pb](amps, qb)


# ---------------------------------------------------------------------------
# trajectories


def _rzz_count(circuit: CircuitIR) -> int:
    return sum(1 for g in circuit.gates if g.kind == "RZZ")


def _run_trajectory(
    circuit: CircuitIR,
    cfg: DepolarizingConfig,
    trajectory: int,
    dtype: np.dtype,
) -> np.ndarray:
    amps = np.zeros(1 << circuit.num_qubits, dtype=dtype)
    amps[0] = 1.0
    if cfg.epsilon > 0.0:
        rng = derive_rng(cfg.rng_seed, "trajectory", trajectory)
        n_rzz = _rzz_count(circuit)
        fire = rng.random(n_rzz) < _PAULI_BRANCH * cfg.epsilon
        codes = rng.integers(1, 16, size=n_rzz)
        k = 0
        for gate in circuit.gates:
            _apply_gate_kernel(amps, gate, gate.qubits)
            if gate.kind == "RZZ":
                if fire[k]:
                    _apply_pauli_pair(amps, int(codes[k]), gate.qubits[0], gate.qubits[1])
                k += 1
    else:
        for gate in circuit.gates:
            _apply_gate_kernel(amps, gate, gate.qubits)
    return amps


def _trajectory_probs(args) -> np.ndarray:
    circuit, cfg, t, dtype = args
    amps = _run_trajectory(circuit, cfg, t, dtype)
    return StateVector(circuit.num_qubits, amps).probabilities()


def _iter_trajectory_probs(circuit, cfg, precision, memory_budget, threads):
    precision = Precision.coerce(precision)
    check_memory(circuit.num_qubits, precision, memory_budget)
    jobs = [(circuit, cfg, t, precision.dtype) for t in range(cfg.trajectories)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            yield from pool.map(_trajectory_probs, jobs)
    else:
        for job in jobs:
            yield _trajectory_probs(job)


def run_noisy_ensemble(
    circuit: CircuitIR,
    cfg: DepolarizingConfig,
    shots_per_trajectory: int,
    precision: Precision | str = Precision.FP32,
    memory_budget: int | None = None,
    threads: int = 1,
) -> ShotSet:
    """Sample every trajectory and pool the shots in trajectory order.

    Trajectory t samples with the stream ("shots", t) derived from the
    config seed; at epsilon 0 with one trajectory this reproduces the
    noiseless ``sample`` byte for byte.
    """
    if shots_per_trajectory < 1:
        raise ValidationError(f"shot count must be positive, got {shots_per_trajectory}")
    pooled = []
    for t, probs in enumerate(
        _iter_trajectory_probs(circuit, cfg, precision, memory_budget, threads)
    ):
        rng = derive_rng(cfg.rng_seed, "shots", t)
        pooled.append(draw_indices(probs, shots_per_trajectory, rng))
    return ShotSet(
        num_qubits=circuit.num_qubits,
        indices=np.concatenate(pooled),
        rng_seed=cfg.rng_seed,
        source=f"noisy(epsilon={cfg.epsilon:g}, trajectories={cfg.trajectories})",
    )


def noisy_expected_probs(
    circuit: CircuitIR,
    cfg: DepolarizingConfig,
    precision: Precision | str = Precision.FP32,
    memory_budget: int | None = None,
    threads: int = 1,
) -> np.ndarray:
    """Trajectory-averaged basis-state distribution (channel average)."""
    acc = np.zeros(1 << circuit.num_qubits)
    for probs in _iter_trajectory_probs(circuit, cfg, precision, memory_budget, threads):
        acc += probs
    return acc / cfg.trajectories


def noisy_expected_r(
    circuit: CircuitIR,
    inst: WmcInstance,
    cfg: DepolarizingConfig,
    precision: Precision | str = Precision.FP32,
    memory_budget: int | None = None,
    threads: int = 1,
) -> float:
    """Mean approximation ratio under noise, exact per trajectory (no shots)."""
    probs = noisy_expected_probs(circuit, cfg, precision, memory_budget, threads)
    return expected_r_from_probs(probs, inst)


# ---------------------------------------------------------------------------
# overlap ratio and decay fit


def r_overlap(r_qpu: float, r_random: float, r_ideal: float) -> float:
    """Where a measured ratio sits between the random and ideal baselines."""
    denom = r_ideal - r_random
    if denom == 0.0:
        raise ValidationError("overlap undefined: ideal and random baselines coincide")
    return (r_qpu - r_random) / denom


@dataclass(frozen=True)
class NoiseFit:
    """Origin-constrained fit of -log2(r_ovl) against accumulated error."""

    k0: float
    r_squared: float
    n_excluded: int
    points: tuple[tuple[float, float], ...]


def fit_k0(points) -> NoiseFit:
    """Fit r_ovl = 2^(-k0 * eps_acc) to (eps_acc, r_ovl) pairs.

    Points with r_ovl <= 0 carry no information for the log fit and are
    excluded (counted in ``n_excluded``).  A single positive point pins
    the line exactly.
    """
    pts = [(float(x), float(r)) for x, r in points]
    included = [(x, r) for x, r in pts if r > 0.0]
    n_excluded = len(pts) - len(included)
    if not included:
        raise FitError("no points with positive overlap ratio to fit")
    x = np.array([p[0] for p in included])
    y = -np.log2(np.array([p[1] for p in included]))
    sxx = float(x @ x)
    if sxx == 0.0:
        raise FitError("all usable points sit at zero accumulated error")
    k0 = float(x @ y) / sxx
    residuals = y - k0 * x
    ss_res = float(residuals @ residuals)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot > 0.0:
        r_squared = 1.0 - ss_res / ss_tot
    else:
        r_squared = 1.0 if ss_res < 1e-24 else 0.0
    return NoiseFit(
        k0=k0, r_squared=r_squared, n_excluded=n_excluded, points=tuple(included)
    )


def predict_r_overlap(k0: float, n_2q: int, epsilon: float) -> float:
    """Modelled overlap ratio 2^(-k0 * N_2q * epsilon)."""
    if k0 <= 0.0:
        raise ValidationError(f"decay constant must be positive, got {k0}")
    if n_2q < 0:
        raise ValidationError(f"two-qubit gate count must be non-negative, got {n_2q}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError(f"epsilon must lie in [0, 1], got {epsilon}")
    return float(2.0 ** (-k0 * epsilon_accumulated(n_2q, epsilon)))
