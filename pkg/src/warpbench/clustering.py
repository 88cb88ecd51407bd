"""k-means with elastic barycenter averaging, plus clustering evaluation.

The assignment step picks the nearest centroid under the configured
elastic measure (ties break toward the lowest centroid index); the update
step averages each cluster with the matching barycenter method.  Inertia
is measured after every assignment sweep and the loop stops when it
settles within ``eps`` or after ``max_iters`` sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map
from .averaging import arithmetic_mean, dba, shape_dba
from .data import Dataset, TimeSeries
from .distances import DistanceConfig

__all__ = ["ClusteringResult", "kmeans_eba", "adjusted_rand_index"]

_COHERENT = {"euclidean": "mean", "dtw": "dba", "shapedtw": "shapedba"}


@dataclass
class ClusteringResult:
    centroids: list[TimeSeries]
    assignments: np.ndarray
    inertia: float
    iterations: int
    converged: bool
    inertia_trace: list[float] = field(default_factory=list)


def _assign(samples, centroids, distance, threads=1):
    """Nearest centroid per sample; returns (assignments, min distances)."""
    n = len(samples)
    rows = parallel_map(
        lambda s: [distance(s, c) for c in centroids], samples, threads
    )
    dists = np.array(rows)
    assignments = dists.argmin(axis=1)  # argmin takes the lowest index on ties
    return assignments, dists[np.arange(n), assignments], dists


def _update_centroid(members, method, reach, previous, avg_iters):
    if method == "mean":
        return arithmetic_mean(members).series
    if method == "dba":
        return dba(members, init=previous, max_iters=avg_iters).series
    return shape_dba(members, reach, init=previous, max_iters=avg_iters).series


def kmeans_eba(dataset, k: int, distance: DistanceConfig | None = None,
               averaging: str = "dba", max_iters: int = 50, eps: float = 1e-6,
               seed: int = 0, avg_iters: int = 10, threads: int = 1) -> ClusteringResult:
    """k-means over time series with an elastic distance/averaging pair.

    Valid pairs: euclidean+mean, dtw+dba, shapedtw+shapedba.  Initial
    centroids are k distinct samples drawn with the seeded generator, so
    identical seeds and inputs reproduce bit-identical results.  Barycenter
    updates warm-start from the previous centroid, which keeps the inertia
    trace non-increasing.  Empty clusters are re-seeded with the sample
    currently farthest from its centroid.  ``threads`` parallelizes the
    assignment step without changing any result.
    """
    samples = list(dataset.samples) if isinstance(dataset, Dataset) else [
        s if isinstance(s, TimeSeries) else TimeSeries(s) for s in dataset
    ]
    n = len(samples)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    if distance is None:
        distance = DistanceConfig(kind="dtw")
    if _COHERENT.get(distance.kind) != averaging:
        raise ValueError(
            f"distance {distance.kind!r} must be paired with averaging "
            f"{_COHERENT.get(distance.kind)!r}, got {averaging!r}"
        )

    rng = np.random.default_rng(seed)
    centroids = [samples[i] for i in rng.choice(n, size=k, replace=False)]

    trace: list[float] = []
    previous_inertia = math.inf
    converged = False
    sweeps = 0
    assignments = np.zeros(n, dtype=np.int64)
    while sweeps < max_iters:
        assignments, mins, _ = _assign(samples, centroids, distance, threads)
        inertia = float(mins.sum())
        trace.append(inertia)
        sweeps += 1
        if abs(inertia - previous_inertia) < eps:
            converged = True
            break
        previous_inertia = inertia

        new_centroids = []
        for j in range(k):
            members = [samples[i] for i in range(n) if assignments[i] == j]
            if members:
                new_centroids.append(
                    _update_centroid(members, averaging, distance.reach, centroids[j], avg_iters)
                )
            else:
                new_centroids.append(None)
        empty = [j for j, c in enumerate(new_centroids) if c is None]
        if empty:
            order = np.argsort(-mins, kind="stable")
            taken = 0
            for j in empty:
                new_centroids[j] = samples[order[taken]]
                taken += 1
        centroids = new_centroids
    else:
        # budget exhausted after an update: refresh state so the returned
        # inertia matches the returned centroids and assignments
        assignments, mins, _ = _assign(samples, centroids, distance, threads)
        trace.append(float(mins.sum()))

    return ClusteringResult(
        centroids=centroids,
        assignments=assignments,
        inertia=trace[-1],
        iterations=sweeps,
        converged=converged,
        inertia_trace=trace,
    )


def adjusted_rand_index(y, yhat) -> float:
    """Rand index corrected for chance over all sample pairs.

    1 means identical partitions (up to label names), around 0 random
    agreement; the minimum is -0.5.  Degenerate cases where correction
    leaves a zero denominator count as perfect agreement.
    """
    a = np.asarray(y).ravel()
    b = np.asarray(yhat).ravel()
    if len(a) != len(b):
        raise ValueError("labelings must have equal length")
    n = len(a)
    if n < 2:
        raise ValueError("need at least two samples")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    contingency = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(contingency, (ai, bi), 1)

    def comb2(v):
        return v * (v - 1) / 2.0

    index = comb2(contingency).sum()
    sum_rows = comb2(contingency.sum(axis=1)).sum()
    sum_cols = comb2(contingency.sum(axis=0)).sum()
    expected = sum_rows * sum_cols / comb2(n)
    max_index = 0.5 * (sum_rows + sum_cols)
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))
