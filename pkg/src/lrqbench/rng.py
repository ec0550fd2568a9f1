"""Deterministic random-stream derivation.

Every random draw in the package comes from a Philox counter-based
generator keyed by a numpy ``SeedSequence``.  A stream is identified by
the user seed plus a spawn key ``(stream code, *indices)``; the same
``(seed, stream, indices)`` triple therefore yields the same draws on
every platform and in any execution order.  Parallel work (trajectories,
resampling repeats) gets one derived stream per unit, so results do not
depend on scheduling.

Stream codes are frozen; adding new ones is fine, renumbering is not.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

_MASK64 = (1 << 64) - 1

_STREAMS = {
    "instance": 0,   # edge weights, one stream per (seed, n)
    "shots": 1,      # measurement sampling, index = trajectory id
    "trajectory": 2, # noise-channel draws, index = trajectory id
    "uniform": 3,    # uniform bitstring pools
    "resample": 4,   # mean-of-means subsampling, index = repeat id
    "classify": 5,   # per-pool sub-seeds inside classification
    "sweep": 6,      # benchmark sweeps
    "ideal": 7,      # sampled (non-exact) ideal baselines
}


def _seed_sequence(seed: int, stream: str, indices: tuple[int, ...]) -> np.random.SeedSequence:
    if stream not in _STREAMS:
        raise ValidationError(f"unknown rng stream {stream!r}")
    return np.random.SeedSequence(
        entropy=int(seed) & _MASK64,
        spawn_key=(_STREAMS[stream], *indices),
    )


def derive_rng(seed: int, stream: str, *indices: int) -> np.random.Generator:
    """Return a Generator for the named stream derived from ``seed``."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, stream, indices)))


def derive_seed(seed: int, stream: str, *indices: int) -> int:
    """Collapse a derived stream to a plain 64-bit seed (for nested configs)."""
    return int(_seed_sequence(seed, stream, indices).generate_state(1, np.uint64)[0])
