"""Resampling statistics and performance-regime classification.

Few-shot hardware runs are judged against two baselines built from large
pools of per-shot approximation ratios.  ``mean_of_means`` repeatedly
subsamples n_s values from a pool (without replacement by default) and
reports the grand mean and standard deviation of the subsample means,
i.e. the spread a fresh n_s-shot experiment would show.  The random
baseline plus three of its sigmas forms the threshold below which a run
is indistinguishable from uniform guessing; the noiseless grand mean
minus/plus three sigmas bounds where an ideal device would land.

The classifier compares the raw mean of the measured ratios against
those bounds: at or above the noiseless lower bound is noise-tolerant
(flagged when it even exceeds the upper bound), above the random
threshold is the transition regime, anything else is random.  Without a
noiseless pool only the last two verdicts are reachable and the report
says so.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .engine import ShotSet
from .errors import ValidationError
from .problem import WmcInstance
from .rng import derive_rng, derive_seed


@dataclass(frozen=True)
class ResampleConfig:
    subsample_size: int
    repeats: int = 100
    rng_seed: int = 0
    replacement: bool = False

    def __post_init__(self) -> None:
        if self.subsample_size < 1:
            raise ValidationError(f"subsample size must be positive, got {self.subsample_size}")
        if self.repeats < 1:
            raise ValidationError(f"repeat count must be positive, got {self.repeats}")


@dataclass(frozen=True)
class MeanOfMeans:
    grand_mean: float
    sigma: float
    subsample_means: np.ndarray


def mean_of_means(pool, cfg: ResampleConfig) -> MeanOfMeans:
    """Grand mean and sigma of repeated n_s-subsample means of the pool.

    Each repeat draws from its own derived stream, so repeats could run
    in any order (or in parallel) without changing the outcome.
    """
    values = np.asarray(pool, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValidationError("empty pool")
    if not cfg.replacement and values.size < cfg.subsample_size:
        raise ValidationError(
            f"pool of {values.size} too small for subsamples of "
            f"{cfg.subsample_size} without replacement"
        )
    means = np.empty(cfg.repeats)
    for i in range(cfg.repeats):
        rng = derive_rng(cfg.rng_seed, "resample", i)
        idx = rng.choice(values.size, size=cfg.subsample_size, replace=cfg.replacement)
        means[i] = values[idx].mean()
    sigma = float(means.std(ddof=1)) if cfg.repeats > 1 else 0.0
    return MeanOfMeans(grand_mean=float(means.mean()), sigma=sigma, subsample_means=means)


def random_threshold(random_pool, cfg: ResampleConfig) -> float:
    """Upper edge of the random regime: grand mean plus three sigma."""
    mom = mean_of_means(random_pool, cfg)
    return mom.grand_mean + 3.0 * mom.sigma


class Regime(enum.Enum):
    NOISE_TOLERANT = "noise_tolerant"
    TRANSITION = "transition"
    RANDOM = "random"


@dataclass(frozen=True)
class RegimeReport:
    verdict: Regime
    qpu_mean_r: float
    qpu_shots: int
    random_grand_mean: float
    random_sigma: float
    random_threshold: float
    random_pool_size: int
    noiseless_grand_mean: float | None
    noiseless_sigma: float | None
    noiseless_lower: float | None
    noiseless_upper: float | None
    noiseless_pool_size: int | None
    above_ideal: bool
    noiseless_unavailable: bool
    subsample_size: int
    repeats: int
    rng_seed: int
    replacement: bool

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["verdict"] = self.verdict.value
        return out


def classify(
    qpu_r_values,
    random_pool,
    cfg: ResampleConfig,
    noiseless_pool=None,
) -> RegimeReport:
    """Place the measured run in the noise-tolerant / transition / random regime.

    The measured side enters as its raw mean; only the baselines are
    resampled.  The two pools use sub-seeds derived from the config seed
    so their subsampling streams never collide.
    """
    qpu = np.asarray(qpu_r_values, dtype=np.float64).ravel()
    if qpu.size == 0:
        raise ValidationError("no measured ratios to classify")
    qpu_mean = float(qpu.mean())

    rand_mom = mean_of_means(
        random_pool, replace(cfg, rng_seed=derive_seed(cfg.rng_seed, "classify", 0))
    )
    threshold = rand_mom.grand_mean + 3.0 * rand_mom.sigma

    nl_mom = None
    nl_lower = nl_upper = None
    if noiseless_pool is not None:
        nl_mom = mean_of_means(
            noiseless_pool, replace(cfg, rng_seed=derive_seed(cfg.rng_seed, "classify", 1))
        )
        nl_lower = nl_mom.grand_mean - 3.0 * nl_mom.sigma
        nl_upper = nl_mom.grand_mean + 3.0 * nl_mom.sigma

    above_ideal = False
    if nl_mom is not None and qpu_mean >= nl_lower:
        verdict = Regime.NOISE_TOLERANT
        above_ideal = qpu_mean > nl_upper
    elif qpu_mean > threshold:
        verdict = Regime.TRANSITION
    else:
        verdict = Regime.RANDOM

    return RegimeReport(
        verdict=verdict,
        qpu_mean_r=qpu_mean,
        qpu_shots=int(qpu.size),
        random_grand_mean=rand_mom.grand_mean,
        random_sigma=rand_mom.sigma,
        random_threshold=threshold,
        random_pool_size=int(np.asarray(random_pool).size),
        noiseless_grand_mean=None if nl_mom is None else nl_mom.grand_mean,
        noiseless_sigma=None if nl_mom is None else nl_mom.sigma,
        noiseless_lower=nl_lower,
        noiseless_upper=nl_upper,
        noiseless_pool_size=None if noiseless_pool is None else int(np.asarray(noiseless_pool).size),
        above_ideal=above_ideal,
        noiseless_unavailable=noiseless_pool is None,
        subsample_size=cfg.subsample_size,
        repeats=cfg.repeats,
        rng_seed=cfg.rng_seed,
        replacement=cfg.replacement,
    )


# ---------------------------------------------------------------------------
# presentation helpers


KDE_GRID_POINTS = 512


def silverman_bandwidth(values: np.ndarray) -> float:
    """Rule-of-thumb bandwidth 0.9 * min(std, IQR/1.34) * n^(-1/5)."""
    n = values.size
    std = float(values.std(ddof=1))
    q75, q25 = np.percentile(values, [75.0, 25.0])
    iqr = float(q75 - q25)
    scale = min(s for s in (std, iqr / 1.34) if s > 0.0) if max(std, iqr) > 0.0 else 0.0
    if scale <= 0.0:
        # degenerate sample (all values equal): any narrow kernel will do
        scale = max(1.0, abs(float(values[0]))) * 1e-9
    return 0.9 * scale * n ** (-0.2)


def kde_curve(
    values, bandwidth: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian kernel density on a 512-point grid spanning the data.

    Presentation-only: the grid runs from min - 3h to max + 3h.  Returns
    (grid, density).
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size < 2:
        raise ValidationError("density estimate needs at least two values")
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if h <= 0.0:
        raise ValidationError(f"bandwidth must be positive, got {h}")
    grid = np.linspace(x.min() - 3.0 * h, x.max() + 3.0 * h, KDE_GRID_POINTS)
    z = (grid[:, None] - x[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (x.size * h * np.sqrt(2.0 * np.pi))
    return grid, density


def uniform_sampler(inst: WmcInstance, n_shots: int, rng_seed: int) -> ShotSet:
    """Uniform random assignments, the model of a fully depolarized device."""
    if n_shots < 1:
        raise ValidationError(f"shot count must be positive, got {n_shots}")
    rng = derive_rng(rng_seed, "uniform", 0)
    indices = rng.integers(0, 1 << inst.num_vertices, size=n_shots, dtype=np.uint64)
    return ShotSet(
        num_qubits=inst.num_vertices,
        indices=indices,
        rng_seed=int(rng_seed),
        source="uniform",
    )
