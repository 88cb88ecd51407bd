"""Prototype computation and weighted synthetic-sample dataset extension.

Barycenter iterations (DBA and ShapeDBA) refine a prototype by aligning
it to every series in the group, replacing each prototype timestamp by
the mean of its aligned values.  The tracked objective is the summed
alignment cost of the accepted prototype; an update that would worsen it
is discarded, so the trace is non-increasing in every run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map
from .data import Dataset, TimeSeries
from .distances import dtw, dtw_cost, shape_dtw

__all__ = [
    "Prototype",
    "NeighborWeights",
    "arithmetic_mean",
    "dba",
    "shape_dba",
    "neighbor_weights",
    "weighted_shape_dba",
    "extend_dataset",
    "medoid_index",
]

DEFAULT_MAX_ITERS = 30


@dataclass
class Prototype:
    """A barycenter series plus provenance and convergence diagnostics."""

    series: TimeSeries
    label: float | None = None
    provenance: list[tuple[int, float]] | None = None
    objective_trace: list[float] | None = None
    iterations: int = 0
    converged: bool = True

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else float("nan")


@dataclass(frozen=True)
class NeighborWeights:
    """DTW-nearest neighbors of a reference with similarity weights.

    weights[i] = exp(ln(0.5) * d_i / d_NN), so the nearest neighbor gets
    exactly 0.5 and weights decay with distance; the reference itself is
    implicitly weighted 1.
    """

    ref_index: int
    neighbor_indices: np.ndarray
    dtw_distances: np.ndarray
    weights: np.ndarray
    d_nn: float


def _series_list(group) -> list[TimeSeries]:
    if isinstance(group, Dataset):
        return list(group.samples)
    return [s if isinstance(s, TimeSeries) else TimeSeries(s) for s in group]


def _check_group(group: list[TimeSeries]) -> None:
    if not group:
        raise ValueError("cannot average an empty set of series")
    channels = {s.channels for s in group}
    if len(channels) != 1:
        raise ValueError("all series must share a channel count")


def arithmetic_mean(group) -> Prototype:
    """Per-timestamp, per-channel mean of equal-shape series."""
    series = _series_list(group)
    _check_group(series)
    shapes = {s.values.shape for s in series}
    if len(shapes) != 1:
        raise ValueError("arithmetic mean requires equal-length series")
    mean = np.mean([s.values for s in series], axis=0)
    return Prototype(
        TimeSeries(mean),
        provenance=[(i, 1.0) for i in range(len(series))],
        objective_trace=[],
    )


def medoid_index(group, distance=dtw_cost) -> int:
    """Index of the series minimizing its summed distance to the others."""
    series = _series_list(group)
    _check_group(series)
    best, best_cost = 0, np.inf
    for i, s in enumerate(series):
        total = sum(distance(s, t) for j, t in enumerate(series) if j != i)
        if total < best_cost:
            best, best_cost = i, total
    return best


def _resolve_init(group: list[TimeSeries], init, seed) -> TimeSeries:
    if init is not None:
        return init if isinstance(init, TimeSeries) else TimeSeries(init)
    if seed is not None:
        rng = np.random.default_rng(seed)
        return group[int(rng.integers(len(group)))]
    return group[medoid_index(group)]


def _barycenter_loop(group, align, init, max_iters, tol, weights=None):
    """Shared DBA/ShapeDBA iteration.

    ``align(p, x)`` returns (cost, path) with the prototype as first
    argument.  One alignment pass per iteration serves both the objective
    of the current prototype and the next update.
    """
    series = _series_list(group)
    _check_group(series)
    w = np.ones(len(series)) if weights is None else np.asarray(weights, dtype=np.float64)
    if len(w) != len(series) or np.any(w <= 0):
        raise ValueError("weights must be positive and one per series")
    proto = _resolve_init(series, init, None).values.copy()
    if any(s.channels != proto.shape[1] for s in series):
        raise ValueError("init channel count must match the group")

    trace: list[float] = []
    converged = False
    iterations = 0
    for _ in range(max_iters):
        sums = np.zeros_like(proto)
        counts = np.zeros(proto.shape[0])
        objective = 0.0
        for wi, s in zip(w, series):
            cost, path = align(TimeSeries(proto), s)
            objective += wi * cost
            i, j = path.indices()
            np.add.at(sums, i, wi * s.values[j])
            np.add.at(counts, i, wi)
        if tol is None:
            tol = 1e-6 * max(objective, 1.0)
        if trace and trace[-1] - objective < 0:
            # A re-alignment made things worse (possible for ShapeDTW,
            # impossible for DTW): discard the last update and stop.
            converged = True
            proto = previous
            break
        trace.append(objective)
        if len(trace) > 1 and trace[-2] - trace[-1] < tol:
            converged = True
            break
        # every prototype timestamp has at least the path-endpoint associate
        previous = proto
        proto = sums / counts[:, None]
        iterations += 1
    else:
        if iterations:
            # budget spent right after an update: score it so the trace
            # matches the returned prototype, rejecting any worsening
            objective = sum(
                wi * align(TimeSeries(proto), s)[0] for wi, s in zip(w, series)
            )
            if trace and objective > trace[-1]:
                proto = previous
            else:
                trace.append(objective)
    return TimeSeries(proto), trace, iterations, converged


def dba(group, init=None, max_iters: int = DEFAULT_MAX_ITERS, tol: float | None = None, seed=None) -> Prototype:
    """DTW Barycenter Averaging.

    Starts from ``init`` if given, else a seeded random member, else the
    DTW medoid.  Stops when the summed DTW cost improves by less than
    ``tol`` (default 1e-6 of the starting objective) or after
    ``max_iters`` sweeps; the objective never increases across the trace.
    """
    series = _series_list(group)
    _check_group(series)
    start = _resolve_init(series, init, seed)
    ts, trace, iters, conv = _barycenter_loop(series, dtw, start, max_iters, tol)
    return Prototype(ts, provenance=[(i, 1.0) for i in range(len(series))],
                     objective_trace=trace, iterations=iters, converged=conv)


def shape_dba(group, reach: int, init=None, max_iters: int = DEFAULT_MAX_ITERS,
              tol: float | None = None, seed=None) -> Prototype:
    """ShapeDTW Barycenter Averaging; reach=0 reproduces dba exactly."""
    series = _series_list(group)
    _check_group(series)
    start = _resolve_init(series, init, seed)
    align = lambda p, x: shape_dtw(p, x, reach)
    ts, trace, iters, conv = _barycenter_loop(series, align, start, max_iters, tol)
    return Prototype(ts, provenance=[(i, 1.0) for i in range(len(series))],
                     objective_trace=trace, iterations=iters, converged=conv)


def neighbor_weights(ref, pool, n_neighbors: int, ref_index: int = -1,
                     threads: int = 1) -> NeighborWeights:
    """DTW-nearest neighbors of ``ref`` in ``pool`` with decay weights.

    Ties in distance break toward the lowest pool index.  d_NN is the
    smallest neighbor distance; a neighbor at that distance weighs 0.5
    and one at distance zero weighs 1.
    """
    series = _series_list(pool)
    if not 1 <= n_neighbors <= len(series):
        raise ValueError(f"need 1 <= N <= pool size, got N={n_neighbors}, pool={len(series)}")
    ref_ts = ref if isinstance(ref, TimeSeries) else TimeSeries(ref)
    dists = np.array(parallel_map(lambda s: dtw_cost(ref_ts, s), series, threads))
    order = np.argsort(dists, kind="stable")[:n_neighbors]
    chosen = dists[order]
    d_nn = float(chosen.min())
    if d_nn > 0:
        ratios = chosen / d_nn
    else:
        ratios = np.where(chosen == 0.0, 0.0, np.inf)
    weights = np.exp(np.log(0.5) * ratios)
    return NeighborWeights(ref_index, order, chosen, weights, d_nn)


def weighted_shape_dba(ref, neighbors, weights, reach: int,
                       max_iters: int = DEFAULT_MAX_ITERS, tol: float | None = None) -> Prototype:
    """ShapeDBA over the reference (weight 1) and its weighted neighbors.

    Each aligned value contributes value*weight and every timestamp is
    replaced by the weighted mean; initialization is the reference.
    """
    neighbor_series = _series_list(neighbors)
    w = np.asarray(weights, dtype=np.float64)
    if len(w) != len(neighbor_series):
        raise ValueError("one weight per neighbor expected")
    ref_ts = ref if isinstance(ref, TimeSeries) else TimeSeries(ref)
    group = [ref_ts] + neighbor_series
    full_w = np.concatenate(([1.0], w))
    align = lambda p, x: shape_dtw(p, x, reach)
    ts, trace, iters, conv = _barycenter_loop(group, align, ref_ts, max_iters, tol, weights=full_w)
    prov = [(-1, 1.0)] + [(i, float(wi)) for i, wi in enumerate(w)]
    return Prototype(ts, provenance=prov, objective_trace=trace, iterations=iters, converged=conv)


def _normalized_label_weights(weights: np.ndarray) -> np.ndarray:
    """Min-max normalize then rescale to sum one (a convex combination)."""
    lo, hi = weights.min(), weights.max()
    if hi == lo:
        return np.full(len(weights), 1.0 / len(weights))
    shifted = (weights - lo) / (hi - lo)
    return shifted / shifted.sum()


def extend_dataset(dataset: Dataset, n_neighbors: int, reach: int, seed=None,
                   max_iters: int = DEFAULT_MAX_ITERS, tol: float | None = None,
                   threads: int = 1) -> Dataset:
    """Double a real-labeled dataset with weighted ShapeDBA synthetics.

    For every reference sample, a synthetic one is averaged from the
    reference plus its N DTW-nearest neighbors; the synthetic score is
    the convex combination of the contributing labels under min-max
    normalized weights.  The procedure is deterministic; ``seed`` is
    echoed by callers for reproducibility bookkeeping only.
    """
    if dataset.labels is None:
        raise ValueError("extend_dataset needs a dataset with real-valued labels")
    if n_neighbors < 1:
        raise ValueError("need at least one neighbor")
    if len(dataset) < n_neighbors + 1:
        raise ValueError("dataset too small for the requested neighborhood")
    labels = np.asarray(dataset.labels, dtype=np.float64)
    new_samples: list[TimeSeries] = []
    new_labels: list[float] = []
    for i, ref in enumerate(dataset.samples):
        pool_idx = [j for j in range(len(dataset)) if j != i]
        pool = [dataset.samples[j] for j in pool_idx]
        nw = neighbor_weights(ref, pool, n_neighbors, ref_index=i, threads=threads)
        chosen = [pool[k] for k in nw.neighbor_indices]
        proto = weighted_shape_dba(ref, chosen, nw.weights, reach, max_iters, tol)
        contributing = np.concatenate(
            ([labels[i]], labels[[pool_idx[k] for k in nw.neighbor_indices]])
        )
        bar_w = _normalized_label_weights(np.concatenate(([1.0], nw.weights)))
        new_samples.append(proto.series)
        new_labels.append(float(bar_w @ contributing))
    return Dataset(
        dataset.samples + new_samples,
        labels=np.concatenate((labels, np.array(new_labels))),
        name=dataset.name,
    )
