"""Fidelity and diversity metrics for generative evaluation.

The latent-space family (FID, precision/density, recall/coverage, APD,
ACPD, MMS, AOG) operates on externally produced feature vectors; WPD
operates on raw series through DTW warping paths.  Every randomized
metric consumes a seeded generator with a documented draw order, so runs
replay exactly: per repetition one permutation of the candidate rows,
first S rows against the next S rows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .distances import dtw

__all__ = [
    "LatentSet",
    "GaussianSummary",
    "MetricResult",
    "reference_split",
    "fid",
    "fid_from_summaries",
    "aog",
    "knn_fidelity",
    "knn_diversity",
    "apd",
    "acpd",
    "mms",
    "mms_real_reference",
    "wpd",
    "wpd_pair",
    "evaluate_generation",
]

DEFAULT_K = 5
DEFAULT_SUBSET = 20  # S_apd
DEFAULT_REPEATS = 10


@dataclass(frozen=True)
class LatentSet:
    """An (N, f) matrix of encoder features with optional integer labels."""

    vectors: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 1:
            raise ValueError("latent vectors must be an (N>=2, f>=1) matrix")
        if not np.all(np.isfinite(v)):
            raise ValueError("latent vectors must be finite")
        object.__setattr__(self, "vectors", v)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if len(lab) != len(v):
                raise ValueError("labels must align with vectors")
            object.__setattr__(self, "labels", lab)

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def features(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class GaussianSummary:
    """Mean vector and covariance matrix summarizing a latent set."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mean, dtype=np.float64).ravel()
        cov = np.asarray(self.covariance, dtype=np.float64)
        if cov.shape != (len(mu), len(mu)):
            raise ValueError("covariance must be (f, f) for an f-vector mean")
        if not np.allclose(cov, cov.T, atol=1e-9):
            raise ValueError("covariance must be symmetric")
        if np.any(np.diag(cov) < 0):
            raise ValueError("covariance diagonal must be nonnegative")
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "covariance", cov)


@dataclass
class MetricResult:
    value: float
    real_reference: float | None = None
    params: dict = field(default_factory=dict)


def _latent(v) -> LatentSet:
    return v if isinstance(v, LatentSet) else LatentSet(np.asarray(v))


def reference_split(latent, seed: int = 0) -> tuple[LatentSet, LatentSet]:
    """Seeded disjoint halves of a real latent set (ceil(N/2), floor(N/2)).

    The halves stand in for real/generated when computing a metric's
    real-reference value.
    """
    v = _latent(latent)
    if len(v) < 4:
        raise ValueError("reference split needs at least 4 vectors")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(v))
    half = (len(v) + 1) // 2
    lab = v.labels
    return (
        LatentSet(v.vectors[perm[:half]], None if lab is None else lab[perm[:half]]),
        LatentSet(v.vectors[perm[half:]], None if lab is None else lab[perm[half:]]),
    )


def summarize(latent) -> GaussianSummary:
    """Empirical mean and covariance (regularized when f >= N)."""
    v = _latent(latent)
    mean = v.vectors.mean(axis=0)
    cov = np.cov(v.vectors, rowvar=False)
    cov = np.atleast_2d(cov)
    if v.features >= len(v):
        warnings.warn("f >= N gives a singular covariance; regularizing", stacklevel=2)
        cov = cov + 1e-10 * np.eye(v.features)
    return GaussianSummary(mean, cov)


def _sym_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    if np.any(vals < -1e-10):
        raise ValueError(f"matrix has negative eigenvalue {vals.min():.3e}; not a covariance")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid_from_summaries(a: GaussianSummary, b: GaussianSummary) -> float:
    """Squared Gaussian Frechet distance between two summaries.

    trace(S1 + S2 - 2*(S1 S2)^(1/2)) + ||mu1 - mu2||^2, with the cross
    term evaluated through the symmetric product sqrt(S1) S2 sqrt(S1).
    """
    root_a = _sym_sqrt(a.covariance)
    cross = _sym_sqrt(root_a @ b.covariance @ root_a)
    mean_term = float(np.sum((a.mean - b.mean) ** 2))
    trace_term = float(np.trace(a.covariance) + np.trace(b.covariance) - 2.0 * np.trace(cross))
    return mean_term + trace_term


def fid(real, generated) -> float:
    """Squared Frechet distance between Gaussian summaries of two latent sets.

    Reported in the squared form (mean term plus trace term); symmetric,
    and zero iff the summaries coincide.
    """
    a, b = _latent(real), _latent(generated)
    if a.features != b.features:
        raise ValueError("latent sets must share the feature dimension")
    return fid_from_summaries(summarize(a), summarize(b))


def aog(true_labels, predicted_labels) -> float:
    """Fraction of generated samples whose conditioning label is recovered."""
    t = np.asarray(true_labels).ravel()
    p = np.asarray(predicted_labels).ravel()
    if len(t) != len(p):
        raise ValueError("label vectors must have equal length")
    if len(t) == 0:
        raise ValueError("need at least one label")
    return float(np.mean(t == p))


def _knn_radii(vectors: np.ndarray, k: int) -> np.ndarray:
    """Distance from each row to its k-th nearest neighbor (self excluded)."""
    d = cdist(vectors, vectors)
    np.fill_diagonal(d, np.inf)
    return np.partition(d, k - 1, axis=1)[:, k - 1]


def knn_fidelity(real, generated, k: int = DEFAULT_K) -> dict[str, float]:
    """Improved precision and density against real k-NN balls.

    precision: fraction of generated points inside at least one real ball;
    density: ball memberships per generated point, scaled by 1/k (expected
    value 1 for identical distributions, range [0, N/k]).
    """
    a, b = _latent(real), _latent(generated)
    if k >= len(a):
        raise ValueError(f"need k < N, got k={k}, N={len(a)}")
    radii = _knn_radii(a.vectors, k)
    between = cdist(a.vectors, b.vectors)  # (N, G)
    inside = between <= radii[:, None]
    precision = float(inside.any(axis=0).mean())
    density = float(inside.sum() / (k * len(b)))
    return {"precision": precision, "density": density}


def knn_diversity(real, generated, k: int = DEFAULT_K) -> dict[str, float]:
    """Recall and coverage; recall uses generated balls, coverage real balls."""
    a, b = _latent(real), _latent(generated)
    if k >= min(len(a), len(b)):
        raise ValueError(f"need k < min(N, G), got k={k}")
    between = cdist(a.vectors, b.vectors)  # (N, G)
    gen_radii = _knn_radii(b.vectors, k)
    recall = float((between <= gen_radii[None, :]).any(axis=1).mean())
    real_radii = _knn_radii(a.vectors, k)
    coverage = float((between <= real_radii[:, None]).any(axis=1).mean())
    return {"recall": recall, "coverage": coverage}


def _paired_subset_mean(vectors: np.ndarray, subset: int, rng) -> float:
    perm = rng.permutation(len(vectors))
    first = vectors[perm[:subset]]
    second = vectors[perm[subset : 2 * subset]]
    return float(np.mean(np.sqrt(np.sum((first - second) ** 2, axis=1))))


def apd(latent, subset: int = DEFAULT_SUBSET, repeats: int = DEFAULT_REPEATS,
        seed: int = 0) -> float:
    """Average pairwise distance between two disjoint random subsets.

    Each of the ``repeats`` seeded experiments permutes the rows once and
    pairs the first ``subset`` rows with the next ``subset`` row-wise.
    """
    v = _latent(latent)
    if 2 * subset > len(v):
        raise ValueError(f"need 2*S <= N, got S={subset}, N={len(v)}")
    rng = np.random.default_rng(seed)
    return float(np.mean([_paired_subset_mean(v.vectors, subset, rng) for _ in range(repeats)]))


def acpd(latent, subset: int = DEFAULT_SUBSET, repeats: int = DEFAULT_REPEATS,
         seed: int = 0) -> float:
    """APD averaged per class (labels required).

    Per class the subset size shrinks to min(S, class_size // 2); classes
    with fewer than 4 members are skipped with a warning.  Classes are
    visited in sorted label order, each drawing its own permutation from
    the shared generator.
    """
    v = _latent(latent)
    if v.labels is None:
        raise ValueError("acpd requires labels")
    classes = np.unique(v.labels)
    usable = []
    for c in classes:
        members = v.vectors[v.labels == c]
        if len(members) < 4:
            warnings.warn(f"class {c!r} has fewer than 4 members; skipped", stacklevel=2)
            continue
        usable.append(members)
    if not usable:
        raise ValueError("no class has enough members for acpd")
    rng = np.random.default_rng(seed)
    per_rep = []
    for _ in range(repeats):
        vals = [
            _paired_subset_mean(members, min(subset, len(members) // 2), rng)
            for members in usable
        ]
        per_rep.append(np.mean(vals))
    return float(np.mean(per_rep))


def mms(real, generated) -> float:
    """Mean distance from each generated vector to its nearest real vector."""
    a, b = _latent(real), _latent(generated)
    return float(cdist(b.vectors, a.vectors).min(axis=1).mean())


def mms_real_reference(real) -> float:
    """Within-set novelty floor: mean distance to the nearest other vector.

    The nearest neighbor of a point in its own set is itself, so this is
    the second-nearest rule.
    """
    a = _latent(real)
    d = cdist(a.vectors, a.vectors)
    np.fill_diagonal(d, np.inf)
    return float(d.min(axis=1).mean())


def wpd_pair(x, y) -> float:
    """Mean perpendicular deviation of the DTW path from the diagonal.

    Per path point the distance to the diagonal is sqrt(2)/2 * |t1 - t2|.
    """
    _, path = dtw(x, y)
    i, j = path.indices()
    return float(np.sqrt(2.0) / 2.0 * np.mean(np.abs(i - j)))


def wpd(series_set, subset: int, repeats: int = DEFAULT_REPEATS, seed: int = 0) -> float:
    """Warping-path diversity of a set of equal-length series.

    Repetition r permutes the set, pairs the first ``subset`` members with
    the next ``subset`` row-wise, and averages wpd_pair over the pairs;
    the result averages the repetitions.  Bounded by sqrt(2)/4 * (L + 1).
    """
    series = list(series_set)
    if 2 * subset > len(series):
        raise ValueError(f"need 2*S <= set size, got S={subset}, size={len(series)}")
    lengths = {s.values.shape[0] if hasattr(s, "values") else np.asarray(s).shape[0] for s in series}
    if len(lengths) != 1:
        raise ValueError("wpd requires equal-length series; resample first")
    rng = np.random.default_rng(seed)
    per_rep = []
    for _ in range(repeats):
        perm = rng.permutation(len(series))
        vals = [
            wpd_pair(series[perm[i]], series[perm[subset + i]]) for i in range(subset)
        ]
        per_rep.append(np.mean(vals))
    return float(np.mean(per_rep))


def evaluate_generation(real, generated, k: int = DEFAULT_K, subset: int = DEFAULT_SUBSET,
                        repeats: int = DEFAULT_REPEATS, seed: int = 0,
                        raw_real=None, raw_generated=None,
                        aog_true=None, aog_predicted=None) -> dict[str, MetricResult]:
    """Assemble the full metric report with real-reference values.

    Two-set metrics reference a seeded split of the real set; per-set
    metrics (APD, ACPD, WPD) are computed on the real and generated sets
    separately; MMS references the within-set second-nearest rule.
    """
    a, b = _latent(real), _latent(generated)
    v1, v2 = reference_split(a, seed)
    report: dict[str, MetricResult] = {}
    report["fid"] = MetricResult(fid(a, b), fid(v1, v2), {"seed": seed})

    fid_params = {"k": k, "seed": seed}
    gen_fid = knn_fidelity(a, b, k)
    ref_fid = knn_fidelity(v1, v2, k)
    for name in ("precision", "density"):
        report[name] = MetricResult(gen_fid[name], ref_fid[name], dict(fid_params))
    gen_div = knn_diversity(a, b, k)
    ref_div = knn_diversity(v1, v2, k)
    for name in ("recall", "coverage"):
        report[name] = MetricResult(gen_div[name], ref_div[name], dict(fid_params))

    sub_params = {"S": subset, "R": repeats, "seed": seed}
    report["apd"] = MetricResult(
        apd(b, subset, repeats, seed), apd(a, subset, repeats, seed), dict(sub_params)
    )
    if a.labels is not None and b.labels is not None:
        report["acpd"] = MetricResult(
            acpd(b, subset, repeats, seed), acpd(a, subset, repeats, seed), dict(sub_params)
        )
    report["mms"] = MetricResult(mms(a, b), mms_real_reference(a), {})
    if aog_true is not None and aog_predicted is not None:
        report["aog"] = MetricResult(aog(aog_true, aog_predicted), None, {})
    if raw_real is not None and raw_generated is not None:
        wpd_sub = min(subset, len(raw_real) // 2, len(raw_generated) // 2)
        report["wpd"] = MetricResult(
            wpd(raw_generated, wpd_sub, repeats, seed),
            wpd(raw_real, wpd_sub, repeats, seed),
            {"S": wpd_sub, "R": repeats, "seed": seed},
        )
    return report
