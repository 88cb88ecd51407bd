"""Elastic similarity measures between time series.

Euclidean, DTW (with warping path), SoftDTW, MSM and ShapeDTW.  DTW-family
costs follow the dynamic-programming convention: accumulated sum of squared
per-timestamp channel differences along the optimal admissible path, with
no final root (``dtw_rooted`` exposes the rooted value).  Backtracking
tie-breaks are deterministic: diagonal first, then up (t1-1), then left
(t2-1), so identical inputs always yield identical paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = [
    "WarpingPath",
    "DistanceConfig",
    "euclidean",
    "dtw",
    "dtw_cost",
    "dtw_rooted",
    "soft_dtw",
    "soft_min",
    "msm",
    "shape_dtw",
]


@dataclass(frozen=True)
class WarpingPath:
    """An admissible alignment between two series, as 1-based index pairs.

    Admissibility: starts at (1, 1), ends at (L1, L2), each step increases
    t1 and/or t2 by exactly one, and the length lies in
    [max(L1, L2), L1 + L2 - 1].  Violations raise at construction.
    """

    pairs: np.ndarray
    shape: tuple[int, int]

    def __post_init__(self):
        p = np.asarray(self.pairs, dtype=np.int64)
        if p.ndim != 2 or p.shape[1] != 2:
            raise ValueError("pairs must be an (L_pi, 2) index array")
        l1, l2 = self.shape
        if tuple(p[0]) != (1, 1) or tuple(p[-1]) != (l1, l2):
            raise ValueError(f"path must run from (1,1) to ({l1},{l2})")
        steps = np.diff(p, axis=0)
        if steps.size and (steps.min() < 0 or steps.max() > 1 or np.any(steps.sum(axis=1) == 0)):
            raise ValueError("each path step must advance t1 and/or t2 by exactly one")
        if not (max(l1, l2) <= len(p) <= l1 + l2 - 1):
            raise ValueError("path length outside [max(L1,L2), L1+L2-1]")
        p.flags.writeable = False
        object.__setattr__(self, "pairs", p)

    def __len__(self) -> int:
        return len(self.pairs)

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        """0-based index arrays (into the first and second series)."""
        return self.pairs[:, 0] - 1, self.pairs[:, 1] - 1


@dataclass(frozen=True)
class DistanceConfig:
    """A distance choice plus its hyperparameters, usable as a callable."""

    kind: str = "dtw"
    gamma: float = 1.0
    msm_cost: float = 1.0
    reach: int = 15

    KINDS = ("euclidean", "dtw", "softdtw", "msm", "shapedtw")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown distance kind {self.kind!r}, expected one of {self.KINDS}")
        if self.kind == "softdtw" and self.gamma <= 0:
            raise ValueError("softdtw requires gamma > 0")
        if self.kind == "msm" and self.msm_cost < 0:
            raise ValueError("msm requires a nonnegative cost penalty")
        if self.kind == "shapedtw" and self.reach < 0:
            raise ValueError("shapedtw requires reach >= 0")

    def __call__(self, x, y) -> float:
        if self.kind == "euclidean":
            return euclidean(x, y)
        if self.kind == "dtw":
            return dtw(x, y)[0]
        if self.kind == "softdtw":
            return soft_dtw(x, y, self.gamma)
        if self.kind == "msm":
            return msm(x, y, self.msm_cost)
        return shape_dtw(x, y, self.reach)[0]


def _values(x) -> np.ndarray:
    return x.values if hasattr(x, "values") else np.atleast_2d(np.asarray(x, dtype=np.float64).T).T


def _check_channels(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"channel mismatch: {a.shape[1]} vs {b.shape[1]}")


def _sq_cost_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(L1, L2) matrix of channel-summed squared differences."""
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijm,ijm->ij", diff, diff)


@njit(cache=True, nogil=True)
def _accumulate(cost: np.ndarray) -> np.ndarray:
    """Accumulated DP matrix; cell (i, j) is padded by one row/column."""
    l1, l2 = cost.shape
    acc = np.full((l1 + 1, l2 + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, l1 + 1):
        for j in range(1, l2 + 1):
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = cost[i - 1, j - 1] + best
    return acc


@njit(cache=True, nogil=True)
def _backtrack(acc: np.ndarray) -> np.ndarray:
    """Recover one optimal path from the DP matrix (1-based pairs).

    Ties prefer the diagonal predecessor, then up, then left.
    """
    i = acc.shape[0] - 1
    j = acc.shape[1] - 1
    rev = np.empty((i + j - 1, 2), dtype=np.int64)
    n = 0
    while i > 1 or j > 1:
        rev[n, 0] = i
        rev[n, 1] = j
        n += 1
        diag = acc[i - 1, j - 1] if (i > 1 and j > 1) else np.inf
        up = acc[i - 1, j] if i > 1 else np.inf
        left = acc[i, j - 1] if j > 1 else np.inf
        if diag <= up and diag <= left:
            i -= 1
            j -= 1
        elif up <= left:
            i -= 1
        else:
            j -= 1
    rev[n, 0] = 1
    rev[n, 1] = 1
    n += 1
    return rev[:n][::-1].copy()


@njit(cache=True, nogil=True)
def _soft_accumulate(cost: np.ndarray, gamma: float) -> float:
    l1, l2 = cost.shape
    acc = np.full((l1 + 1, l2 + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, l1 + 1):
        for j in range(1, l2 + 1):
            a = acc[i - 1, j - 1]
            b = acc[i - 1, j]
            c = acc[i, j - 1]
            m = min(a, min(b, c))
            if m == np.inf:
                soft = np.inf
            else:
                s = np.exp(-(a - m) / gamma) + np.exp(-(b - m) / gamma) + np.exp(-(c - m) / gamma)
                soft = m - gamma * np.log(s)
            acc[i, j] = cost[i - 1, j - 1] + soft
    return acc[l1, l2]


@njit(cache=True, nogil=True)
def _msm_split_cost(new: float, prev: float, other: float, c: float) -> float:
    if prev <= new <= other or prev >= new >= other:
        return c
    return c + min(abs(new - prev), abs(new - other))


@njit(cache=True, nogil=True)
def _msm_channel(x: np.ndarray, y: np.ndarray, c: float) -> float:
    n = x.shape[0]
    d = np.empty((n, n))
    d[0, 0] = abs(x[0] - y[0])
    for t in range(1, n):
        d[t, 0] = d[t - 1, 0] + _msm_split_cost(x[t], x[t - 1], y[0], c)
        d[0, t] = d[0, t - 1] + _msm_split_cost(y[t], y[t - 1], x[0], c)
    for i in range(1, n):
        for j in range(1, n):
            move = d[i - 1, j - 1] + abs(x[i] - y[j])
            split = d[i - 1, j] + _msm_split_cost(x[i], x[i - 1], y[j], c)
            merge = d[i, j - 1] + _msm_split_cost(y[j], y[j - 1], x[i], c)
            d[i, j] = min(move, min(split, merge))
    return d[n - 1, n - 1]


def euclidean(x, y) -> float:
    """Euclidean distance between equal-shape series (sqrt of summed squares)."""
    a, b = _values(x), _values(y)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def dtw(x, y) -> tuple[float, WarpingPath]:
    """DTW cost and one optimal warping path.

    Cost is the accumulated squared difference along the optimal path
    (q=2, no final root); lengths may differ, channels must match.
    """
    a, b = _values(x), _values(y)
    _check_channels(a, b)
    acc = _accumulate(_sq_cost_matrix(a, b))
    path = WarpingPath(_backtrack(acc), (a.shape[0], b.shape[0]))
    return float(acc[-1, -1]), path


def dtw_cost(x, y) -> float:
    """DTW cost only (skips backtracking)."""
    a, b = _values(x), _values(y)
    _check_channels(a, b)
    return float(_accumulate(_sq_cost_matrix(a, b))[-1, -1])


def dtw_rooted(x, y) -> float:
    """Square root of the DTW cost (the q=2 rooted form)."""
    return float(np.sqrt(dtw_cost(x, y)))


def soft_min(values, gamma: float) -> float:
    """Smoothed minimum -gamma*log(sum(exp(-v/gamma))), evaluated stably."""
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    v = np.asarray(values, dtype=np.float64)
    m = v.min()
    if not np.isfinite(m):
        return float(m)
    return float(m - gamma * np.log(np.sum(np.exp(-(v - m) / gamma))))


def soft_dtw(x, y, gamma: float) -> float:
    """SoftDTW: the DTW recursion with min replaced by soft_min.

    May fall below the hard DTW cost (and below zero for x == y);
    converges to the DTW cost as gamma tends to 0+.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    a, b = _values(x), _values(y)
    _check_channels(a, b)
    return float(_soft_accumulate(_sq_cost_matrix(a, b), gamma))


def msm(x, y, c: float) -> float:
    """Move-Split-Merge distance, summed over channels.

    Moves cost the absolute difference of the matched values; splits and
    merges cost c plus how far the inserted value falls outside the
    bracketing pair.  Restricted to equal-length series.
    """
    if c < 0:
        raise ValueError(f"msm cost penalty must be >= 0, got {c}")
    a, b = _values(x), _values(y)
    _check_channels(a, b)
    if a.shape[0] != b.shape[0]:
        raise ValueError("msm requires equal-length series; resample first")
    total = 0.0
    for m in range(a.shape[1]):
        total += _msm_channel(np.ascontiguousarray(a[:, m]), np.ascontiguousarray(b[:, m]), c)
    return float(total)


def _edge_pad(a: np.ndarray, reach: int) -> np.ndarray:
    return np.pad(a, ((reach, reach), (0, 0)), mode="edge")


def shape_dtw(x, y, reach: int) -> tuple[float, WarpingPath]:
    """ShapeDTW with the identity descriptor over a (2*reach+1) window.

    The alignment path is the DTW optimum over a windowed cost matrix:
    the pairwise squared-difference matrix of the edge-padded series,
    accumulated over the 2*reach+1 diagonal offsets of the window.  The
    returned cost re-reads the original series along that path, so
    reach=0 degenerates to plain DTW bit-for-bit.
    """
    if reach < 0:
        raise ValueError(f"reach must be >= 0, got {reach}")
    a, b = _values(x), _values(y)
    _check_channels(a, b)
    if a.shape[0] != b.shape[0]:
        raise ValueError("shape_dtw requires equal-length series; resample first")
    n = a.shape[0]
    padded = _sq_cost_matrix(_edge_pad(a, reach), _edge_pad(b, reach))
    windowed = np.zeros((n, n))
    for d in range(2 * reach + 1):
        windowed += padded[d : d + n, d : d + n]
    acc = _accumulate(windowed)
    path = WarpingPath(_backtrack(acc), (n, n))
    i, j = path.indices()
    original = padded[reach : reach + n, reach : reach + n]
    cost = 0.0
    for v in original[i, j]:
        cost += v  # sequential accumulation matches the DP bit-for-bit at reach=0
    return float(cost), path
