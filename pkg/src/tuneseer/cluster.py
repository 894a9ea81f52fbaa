"""k-means++ classification of feature vectors.

Features are standardized (per-feature z-score over the training set) before
clustering by default, since raw dimension counts span 2-50 while skew spans
roughly +-2; without scaling, Euclidean distance degenerates to dimension
binning.  Scaling can be disabled to test the unscaled reading.

Fitting runs several k-means++ seedings and keeps the lowest-inertia model.
Lloyd iterations stop when the largest centroid displacement drops below a
tolerance; empty clusters are re-seeded to the point currently farthest from
its assigned centroid, which keeps the inertia sequence non-increasing.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .sampling import make_rng

log = logging.getLogger(__name__)

DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class FeatureScaler:
    """Per-feature affine map to zero mean, unit spread."""

    means: np.ndarray
    stds: np.ndarray

    @classmethod
    def fit(cls, points: np.ndarray) -> "FeatureScaler":
        means = points.mean(axis=0)
        stds = points.std(axis=0)
        stds = np.where(stds == 0.0, 1.0, stds)
        return cls(means=means, stds=stds)

    @classmethod
    def identity(cls, d: int) -> "FeatureScaler":
        return cls(means=np.zeros(d), stds=np.ones(d))

    def transform(self, points: np.ndarray) -> np.ndarray:
        return (points - self.means) / self.stds

    def inverse(self, points: np.ndarray) -> np.ndarray:
        return points * self.stds + self.means


@dataclass(frozen=True)
class ClusterModel:
    """Fitted model: centroids live in scaled space."""

    k: int
    centroids: np.ndarray
    scaler: FeatureScaler
    inertia: float

    def classify(self, point) -> int:
        """Index of the nearest centroid in scaled space; ties break to the
        lowest index."""
        z = self.scaler.transform(np.atleast_2d(np.asarray(point, dtype=float)))
        d2 = ((z[:, None, :] - self.centroids[None, :, :]) ** 2).sum(axis=2)
        return int(np.argmin(d2[0]))

    def classify_all(self, points: np.ndarray) -> np.ndarray:
        z = self.scaler.transform(np.asarray(points, dtype=float))
        d2 = ((z[:, None, :] - self.centroids[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d2, axis=1)

    def to_json(self) -> str:
        return json.dumps(
            {
                "k": self.k,
                "centroids": self.centroids.tolist(),
                "scaler": {
                    "means": self.scaler.means.tolist(),
                    "stds": self.scaler.stds.tolist(),
                },
                "inertia": self.inertia,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "ClusterModel":
        raw = json.loads(text)
        return cls(
            k=int(raw["k"]),
            centroids=np.asarray(raw["centroids"], dtype=float),
            scaler=FeatureScaler(
                means=np.asarray(raw["scaler"]["means"], dtype=float),
                stds=np.asarray(raw["scaler"]["stds"], dtype=float),
            ),
            inertia=float(raw["inertia"]),
        )


def _pairwise_sq(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def kmeanspp_seed(
    points: np.ndarray, k: int, rng: np.random.Generator
) -> np.ndarray:
    """D^2-weighted seeding: first centroid uniform, each next one chosen
    with probability proportional to squared distance from the chosen set.

    k larger than the point count is clamped down with a warning."""
    n = points.shape[0]
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    if k > n:
        log.warning("k=%d exceeds point count %d; clamping", k, n)
        k = n
    chosen = [int(rng.integers(0, n))]
    d2 = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(0, n))  # all remaining mass on duplicates
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total))
            idx = min(idx, n - 1)
        chosen.append(idx)
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return points[chosen].copy()


def lloyd(
    points: np.ndarray,
    centroids: np.ndarray,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
):
    """Alternate assignment and centroid updates.

    Returns (centroids, labels, inertia, inertia_history); the history has
    one entry per assignment and is non-increasing.
    """
    if centroids.shape[0] == 0:
        raise ContractError("need at least one initial centroid")
    centroids = centroids.copy()
    k = centroids.shape[0]
    history = []
    labels = None
    for _ in range(max_iter):
        d2 = _pairwise_sq(points, centroids)
        labels = np.argmin(d2, axis=1)
        point_d2 = d2[np.arange(points.shape[0]), labels]
        for c in range(k):
            if not np.any(labels == c):
                far = int(np.argmax(point_d2))
                centroids[c] = points[far]
                labels[far] = c
                point_d2[far] = 0.0
        history.append(float(point_d2.sum()))
        new_centroids = np.stack(
            [points[labels == c].mean(axis=0) for c in range(k)]
        )
        shift = float(np.max(np.abs(new_centroids - centroids)))
        centroids = new_centroids
        if shift < tol:
            break
    d2 = _pairwise_sq(points, centroids)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(points.shape[0]), labels].sum())
    history.append(inertia)
    return centroids, labels, inertia, history


def fit(
    points,
    k: int,
    seed: int = 0,
    scale: bool = True,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> ClusterModel:
    """Best-of-restarts k-means++ fit on (n, d) feature rows."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ContractError("fit needs a non-empty (n, d) array")
    n = points.shape[0]
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    k = min(k, n)
    scaler = FeatureScaler.fit(points) if scale else FeatureScaler.identity(
        points.shape[1]
    )
    z = scaler.transform(points)
    rng = make_rng(seed)
    best = None
    for _ in range(restarts):
        init = kmeanspp_seed(z, k, rng)
        centroids, _, inertia, _ = lloyd(z, init, max_iter=max_iter, tol=tol)
        if best is None or inertia < best[1]:
            best = (centroids, inertia)
    return ClusterModel(k=k, centroids=best[0], scaler=scaler, inertia=best[1])
