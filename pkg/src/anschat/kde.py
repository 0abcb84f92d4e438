"""Gaussian kernel density estimation with cross-validated bandwidth selection.

The estimator places an isotropic normal kernel of scale ``bandwidth`` on each
stored point::

    p(x) = 1 / (n * (2 pi s^2)^(d/2)) * sum_i exp(-|x - y_i|^2 / (2 s^2))

Cluster sizes here are in the low thousands, so evaluation is a direct
O(n) sum per query; there is no tree acceleration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyCluster,
    NonPositiveBandwidth,
    TooFewPoints,
)

LOG_FLOOR = -1e12
SIGMA_REF_FLOOR = 1e-6
_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class KdeModel:
    points: np.ndarray
    bandwidth: float

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.size


@dataclass(frozen=True)
class BandwidthConfig:
    grid_size: int = 10
    folds: int = 3
    grid_lo_factor: float = 0.1
    grid_hi_factor: float = 10.0
    rng_seed: int = 0
    log_floor: float = LOG_FLOOR

    def __post_init__(self):
        if self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if not 0 < self.grid_lo_factor < self.grid_hi_factor:
            raise ValueError("need 0 < grid_lo_factor < grid_hi_factor")


def _as_points(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        if points.ndim != 2:
            raise DimensionMismatch("points must be a 2-D array")
        if points.shape[0] == 0:
            raise EmptyCluster("cannot fit a density to zero points")
        return np.array(points, dtype=float)
    points = [list(np.atleast_1d(p)) for p in points]
    if not points:
        raise EmptyCluster("cannot fit a density to zero points")
    dims = {len(p) for p in points}
    if len(dims) != 1:
        raise DimensionMismatch(f"points have mixed dimensions {sorted(dims)}")
    arr = np.array(points, dtype=float)
    if arr.shape[1] == 0:
        raise DimensionMismatch("points must have at least one dimension")
    return arr


def fit_kde(points, bandwidth: float) -> KdeModel:
    arr = _as_points(points)
    if not (isinstance(bandwidth, (int, float, np.floating)) and math.isfinite(bandwidth) and bandwidth > 0):
        raise NonPositiveBandwidth(f"bandwidth must be a positive finite number, got {bandwidth!r}")
    arr.setflags(write=False)
    return KdeModel(points=arr, bandwidth=float(bandwidth))


def _queries(model: KdeModel, x) -> np.ndarray:
    X = np.asarray(x, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.dim:
        raise DimensionMismatch(f"expected vectors of length {model.dim}, got shape {np.shape(x)}")
    return X


def squared_distances(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Exact pairwise squared Euclidean distances, shape (len(X), len(Y))."""
    out = np.empty((X.shape[0], Y.shape[0]))
    for start in range(0, X.shape[0], _CHUNK):
        diff = X[start:start + _CHUNK, None, :] - Y[None, :, :]
        out[start:start + _CHUNK] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def _log_norm(n: int, d: int, sigma: float) -> float:
    return math.log(n) + 0.5 * d * math.log(2.0 * math.pi * sigma * sigma)


def log_density_from_sq(sq: np.ndarray, sigma: float, d: int, floor: float = LOG_FLOOR) -> np.ndarray:
    """Log-density of each row given its squared distances to the n kernel centres."""
    a = sq / (-2.0 * sigma * sigma)
    peak = a.max(axis=1)
    with np.errstate(invalid="ignore", over="ignore"):
        lse = peak + np.log(np.exp(a - peak[:, None]).sum(axis=1))
    out = lse - _log_norm(sq.shape[1], d, sigma)
    out = np.where(np.isnan(out), floor, out)
    return np.maximum(out, floor)


def density_many(model: KdeModel, X) -> np.ndarray:
    X = _queries(model, X)
    sq = squared_distances(X, model.points)
    s2 = model.bandwidth ** 2
    norm = model.size * (2.0 * math.pi * s2) ** (model.dim / 2.0)
    return np.exp(-sq / (2.0 * s2)).sum(axis=1) / norm


def density(model: KdeModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("density expects a single vector")
    return float(density_many(model, x)[0])


def log_density_many(model: KdeModel, X, floor: float = LOG_FLOOR) -> np.ndarray:
    X = _queries(model, X)
    return log_density_from_sq(squared_distances(X, model.points), model.bandwidth, model.dim, floor)


def log_density(model: KdeModel, x, floor: float = LOG_FLOOR) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("log_density expects a single vector")
    return float(log_density_many(model, x, floor)[0])


def reference_bandwidth(points) -> float:
    """Silverman-style rule of thumb: mean per-dimension sample std times (4/((d+2)n))^(1/(d+4))."""
    arr = _as_points(points)
    n, d = arr.shape
    spread = float(arr.std(axis=0, ddof=1).mean()) if n > 1 else 0.0
    sigma = spread * (4.0 / ((d + 2) * n)) ** (1.0 / (d + 4))
    return max(sigma, SIGMA_REF_FLOOR)


def bandwidth_grid(points, config: BandwidthConfig = BandwidthConfig()) -> np.ndarray:
    ref = reference_bandwidth(points)
    return np.geomspace(config.grid_lo_factor * ref, config.grid_hi_factor * ref, config.grid_size)


def fold_indices(n: int, folds: int, rng_seed: int) -> list[np.ndarray]:
    perm = np.random.default_rng(rng_seed).permutation(n)
    return np.array_split(perm, folds)


def cv_scores(points, grid, config: BandwidthConfig = BandwidthConfig()) -> np.ndarray:
    """Mean held-out log-density for every bandwidth in *grid* (folds averaged with equal weight)."""
    arr = _as_points(points)
    n, d = arr.shape
    scores = np.zeros(len(grid))
    for held in fold_indices(n, config.folds, config.rng_seed):
        mask = np.ones(n, dtype=bool)
        mask[held] = False
        sq = squared_distances(arr[held], arr[mask])
        for k, sigma in enumerate(grid):
            scores[k] += log_density_from_sq(sq, float(sigma), d, config.log_floor).mean()
    return scores / config.folds


def select_bandwidth(points, config: BandwidthConfig = BandwidthConfig()) -> float:
    arr = _as_points(points)
    if arr.shape[0] < config.folds:
        raise TooFewPoints(f"need at least {config.folds} points for {config.folds}-fold CV, got {arr.shape[0]}")
    grid = bandwidth_grid(arr, config)
    if len(grid) == 1:
        return float(grid[0])
    scores = cv_scores(arr, grid, config)
    best = 0
    for k in range(1, len(grid)):
        if scores[k] > scores[best]:
            best = k
    return float(grid[best])
