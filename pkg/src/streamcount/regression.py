"""Least-squares fits of the overlap-sum model and the two overhead models.

Both overhead forms are linear in their parameters once the stream count is
pushed through the log transform, so every fit here is an exact linear
least-squares solve on transformed features; no iterative curve fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import RankDeficiencyError, TooFewObservationsError, ValidationError, ZeroVarianceError

DEFAULT_SEED = 42
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class Observation:
    features: tuple[float, ...]
    target: float

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(float(v) for v in self.features))
        values = self.features + (float(self.target),)
        if not all(math.isfinite(v) for v in values):
            raise ValidationError(f"non-finite observation: {self}")


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.75
    shuffle: bool = True
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")


class Metrics(NamedTuple):
    # None when the split has zero target variance (R^2 undefined)
    r_squared: float | None
    mse: float
    rmse: float


@dataclass
class FitReport:
    model: str
    coefficients: dict[str, float]
    train_metrics: Metrics
    test_metrics: Metrics
    seed: int
    n_train: int
    n_test: int

    def coef_vector(self) -> np.ndarray:
        return np.array(list(self.coefficients.values()))

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "coefficients": dict(self.coefficients),
            "train": self.train_metrics._asdict(),
            "test": self.test_metrics._asdict(),
            "seed": self.seed,
            "n_train": self.n_train,
            "n_test": self.n_test,
        }


def _round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def train_test_split(data: Sequence, cfg: SplitConfig = SplitConfig()) -> tuple[list, list]:
    """Deterministic train/test partition.

    The train split takes ``round(train_fraction * len(data))`` items (half
    rounded away from zero), clamped so that neither split is empty. The
    permutation comes from a generator seeded with ``cfg.seed`` alone.
    """
    data = list(data)
    m = len(data)
    if m < 4:
        raise TooFewObservationsError(f"need at least 4 observations to split, got {m}")
    n_train = min(max(_round_half_away(cfg.train_fraction * m), 1), m - 1)
    if cfg.shuffle:
        order = np.random.default_rng(cfg.seed).permutation(m)
    else:
        order = np.arange(m)
    train = [data[i] for i in order[:n_train]]
    test = [data[i] for i in order[n_train:]]
    return train, test


def _design(observations: Sequence[Observation]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([o.features for o in observations], dtype=float)
    y = np.array([o.target for o in observations], dtype=float)
    return X, y


def fit_least_squares(observations: Sequence[Observation]) -> np.ndarray:
    """Coefficient vector minimizing the sum of squared residuals.

    Columns are scaled to unit norm before an SVD-based solve; the rank check
    compares singular values of the scaled design, so features of very
    different magnitude (sizes near 1e8 next to an intercept) are fine.
    """
    if not observations:
        raise TooFewObservationsError("no observations")
    X, y = _design(observations)
    m, k = X.shape
    if m < k:
        raise TooFewObservationsError(f"{m} observations for {k} coefficients")
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0.0):
        raise RankDeficiencyError("design matrix has an all-zero column")
    Xs = X / norms
    coef, _, _, sv = np.linalg.lstsq(Xs, y, rcond=None)
    if sv.min() < RANK_RTOL * sv.max():
        raise RankDeficiencyError(
            f"design matrix is rank deficient (singular value ratio {sv.min() / sv.max():.3e})"
        )
    return coef / norms


def metrics(predicted: Sequence[float], actual: Sequence[float]) -> Metrics:
    """R^2, MSE and RMSE of ``predicted`` against ``actual``.

    Raises ZeroVarianceError when every actual value is equal.
    """
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or a.ndim != 1 or a.size == 0:
        raise ValidationError("predicted and actual must be equal-length, nonempty 1-D sequences")
    resid = a - p
    ss_res = float(resid @ resid)
    mse = ss_res / a.size
    dev = a - a.mean()
    ss_tot = float(dev @ dev)
    if ss_tot == 0.0:
        raise ZeroVarianceError("actual values have zero variance; R-squared is undefined")
    return Metrics(1.0 - ss_res / ss_tot, mse, math.sqrt(mse))


def _split_metrics(predicted: np.ndarray, actual: np.ndarray) -> Metrics:
    try:
        return metrics(predicted, actual)
    except ZeroVarianceError:
        mse = float(np.mean((actual - predicted) ** 2))
        return Metrics(None, mse, math.sqrt(mse))


# Feature maps: (raw inputs) -> features for the linear solve.

def sum_features(slae_size: float) -> tuple[float, float]:
    return (float(slae_size), 1.0)


def small_features(slae_size: float, n: float) -> tuple[float, float, float]:
    return (float(slae_size), math.log10(n), 1.0)


def big_features(slae_size: float, n: float) -> tuple[float, float, float]:
    # log2(n ** (4/3)) == (4/3) * log2(n)
    lg = 4.0 / 3.0 * math.log2(n)
    return (slae_size * lg, lg, 1.0)


def _fit(name, names, feature_map, rows, cfg: SplitConfig) -> FitReport:
    observations = [Observation(feature_map(*r[:-1]), r[-1]) for r in rows]
    train, test = train_test_split(observations, cfg)
    coef = fit_least_squares(train)
    Xtr, ytr = _design(train)
    Xte, yte = _design(test)
    return FitReport(
        model=name,
        coefficients=dict(zip(names, (float(c) for c in coef))),
        train_metrics=_split_metrics(Xtr @ coef, ytr),
        test_metrics=_split_metrics(Xte @ coef, yte),
        seed=cfg.seed,
        n_train=len(train),
        n_test=len(test),
    )


def fit_sum_model(rows: Sequence[tuple[int, float]], cfg: SplitConfig = SplitConfig()) -> FitReport:
    """Fit ``sum = a * size + b`` from ``(slae_size, sum_ms)`` rows."""
    return _fit("sum", ("a", "b"), sum_features, rows, cfg)


def fit_overhead_small(rows: Sequence[tuple[int, int, float]], cfg: SplitConfig = SplitConfig()) -> FitReport:
    """Fit ``a * size + b * log10(n) + c`` from ``(slae_size, n, overhead_ms)`` rows."""
    _check_streams(rows)
    return _fit("overhead_small", ("a", "b", "c"), small_features, rows, cfg)


def fit_overhead_big(rows: Sequence[tuple[int, int, float]], cfg: SplitConfig = SplitConfig()) -> FitReport:
    """Fit ``(a * size + b) * log2(n ** (4/3)) + c`` from ``(slae_size, n, overhead_ms)`` rows."""
    _check_streams(rows)
    return _fit("overhead_big", ("a", "b", "c"), big_features, rows, cfg)


def _check_streams(rows):
    for r in rows:
        if r[1] < 1:
            raise ValidationError(f"num_streams must be >= 1, got {r[1]}")


def sum_model(slae_size: float, a: float, b: float) -> float:
    return a * slae_size + b


def overhead_small_model(slae_size: float, n: float, a: float, b: float, c: float) -> float:
    return a * slae_size + b * math.log10(n) + c


def overhead_big_model(slae_size: float, n: float, a: float, b: float, c: float) -> float:
    return (a * slae_size + b) * (4.0 / 3.0 * math.log2(n)) + c
