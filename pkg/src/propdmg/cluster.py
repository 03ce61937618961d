"""K-means (k-means++ seeding, Lloyd iterations) and centroid-based class balancing."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, DataError, NumericError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    iterations_run: int
    inertia_history: tuple = ()


def kmeans_fit(points, k: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-4) -> KMeansResult:
    """Cluster ``points`` (n x d) into ``k`` groups.

    Stops when the relative inertia change drops below ``tol`` or after
    ``max_iter`` Lloyd iterations.  A cluster that goes empty is reseeded with
    the point farthest from its current centroid.  Returned centroids are the
    means of the returned assignments, clipped into their points' bounding box
    to absorb rounding.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("points must be a 2-D array")
    n = X.shape[0]
    if k < 1:
        raise ConfigError("k must be at least 1")
    if k > n:
        raise ConfigError(f"k={k} exceeds the number of points ({n})")
    if not np.isfinite(X).all():
        raise DataError("points contain non-finite values")

    rng = np.random.default_rng(seed)
    seeds = _kernels.kmeanspp(X, k, rng.random(k))
    centroids = X[seeds].copy()
    labels = _kernels.assign(X, centroids)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        labels = _reseed_empty(X, labels, centroids, k)
        centroids, counts, inertia = _kernels.update(X, labels, k)
        history.append(inertia)
        if len(history) > 1:
            prev = history[-2]
            if inertia > prev * (1.0 + 1e-12) + 1e-300:
                raise NumericError(f"k-means inertia increased at iteration {it}: {prev} -> {inertia}")
            if prev == 0.0 or (prev - inertia) / prev < tol:
                break
        new_labels = _kernels.assign(X, centroids)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return KMeansResult(centroids, labels, float(history[-1]), it, tuple(history))


def _reseed_empty(X, labels, centroids, k):
    counts = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return labels
    labels = labels.copy()
    d2 = ((X - centroids[labels]) ** 2).sum(axis=1)
    for c in empty:
        # take the farthest point from a cluster that can spare it
        order = np.argsort(-d2, kind="stable")
        for i in order:
            if counts[labels[i]] > 1:
                counts[labels[i]] -= 1
                labels[i] = c
                counts[c] = 1
                d2[i] = 0.0
                break
    return labels


def balance_classes(features_by_class: dict, target_count: int, seed: int = 0, **kmeans_kw) -> dict:
    """Replace every class larger than ``target_count`` by that many k-means centroids.

    Smaller classes pass through unchanged.  Keys (labels) are preserved.
    """
    out = {}
    for i, (label, X) in enumerate(sorted(features_by_class.items(), key=lambda kv: str(kv[0]))):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] == 0:
            raise DataError(f"class {label!r} is empty")
        if X.shape[0] <= target_count:
            out[label] = X
            continue
        res = kmeans_fit(X, target_count, seed=seed + i, **kmeans_kw)
        log.debug("balanced class %r: %d -> %d rows in %d iterations", label, X.shape[0], target_count, res.iterations_run)
        out[label] = res.centroids
    return {label: out[label] for label in features_by_class}
