"""Multi-dataset benchmark statistics.

Ranks and the Friedman test, the Nemenyi critical difference, exact and
approximate Wilcoxon signed-rank tests, the Holm stepwise correction, a
Bayesian signed-rank posterior, and the multi-comparison matrix whose
cells depend only on the two comparates involved.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.stats import rankdata

__all__ = [
    "ResultsTable",
    "RankTable",
    "McmCell",
    "Mcm",
    "BayesianPosterior",
    "HolmResult",
    "ranks",
    "friedman",
    "nemenyi_cd",
    "wilcoxon_signed_rank",
    "holm_correct",
    "bayesian_signed_rank",
    "build_mcm",
]

EXACT_WILCOXON_LIMIT = 25

# Nemenyi critical values q_alpha for m = 2..20: studentized-range quantile
# at infinite degrees of freedom divided by sqrt(2).
NEMENYI_Q = {
    0.05: [
        1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878,
        3.101730, 3.163684, 3.218654, 3.268004, 3.312739, 3.353618, 3.391230,
        3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
    ],
    0.10: [
        1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884,
        2.854606, 2.919889, 2.977768, 3.029694, 3.076733, 3.119693, 3.159199,
        3.195743, 3.229723, 3.261461, 3.291224, 3.319233,
    ],
}


@dataclass
class ResultsTable:
    """An n-dataset by m-comparate performance matrix."""

    datasets: list[str]
    comparates: list[str]
    scores: np.ndarray
    higher_is_better: bool = True

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        n, m = len(self.datasets), len(self.comparates)
        if self.scores.shape != (n, m):
            raise ValueError(f"scores must be ({n}, {m}), got {self.scores.shape}")
        if n < 1 or m < 2:
            raise ValueError("need at least one dataset and two comparates")
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must be finite")

    def column(self, name: str) -> np.ndarray:
        return self.scores[:, self.comparates.index(name)]


@dataclass
class RankTable:
    ranks: np.ndarray
    average_ranks: np.ndarray
    comparates: list[str]


@dataclass(frozen=True)
class McmCell:
    """Pairwise statistics of a row comparate against a column comparate."""

    mean_diff: float
    wins: int
    ties: int
    losses: int
    p_value: float
    significant: bool


@dataclass
class Mcm:
    rows: list[str]
    cols: list[str]
    ordering: list[str]
    mean_scores: dict[str, float]
    cells: dict[tuple[str, str], McmCell]
    alpha: float


@dataclass
class BayesianPosterior:
    theta_left: float
    theta_equal: float
    theta_right: float
    rope: float
    samples: int


@dataclass
class HolmResult:
    reject: list[bool]
    thresholds: list[float]
    order: list[int]


def ranks(table: ResultsTable) -> RankTable:
    """Per-dataset midrank ranking (rank 1 = best) and column averages."""
    scores = table.scores if not table.higher_is_better else -table.scores
    r = np.vstack([rankdata(row, method="average") for row in scores])
    return RankTable(r, r.mean(axis=0), list(table.comparates))


def friedman(table: ResultsTable) -> tuple[float, float]:
    """Friedman chi-square over rank sums and its p-value (m-1 dof)."""
    n, m = table.scores.shape
    if n < 2:
        raise ValueError("friedman needs at least two datasets")
    rank_sums = ranks(table).ranks.sum(axis=0)
    statistic = 12.0 / (n * m * (m + 1)) * float(np.sum(rank_sums**2)) - 3.0 * n * (m + 1)
    statistic = max(statistic, 0.0)  # guard tiny negative round-off for all-tied tables
    p_value = float(stats.chi2.sf(statistic, m - 1))
    return float(statistic), p_value


def nemenyi_cd(m: int, n: int, alpha: float = 0.05) -> float:
    """Critical difference q_alpha * sqrt(m(m+1)/(6n)) for average ranks."""
    if alpha not in NEMENYI_Q:
        raise ValueError(f"alpha must be one of {sorted(NEMENYI_Q)}, got {alpha}")
    if not 2 <= m <= 20:
        raise ValueError(f"embedded critical values cover 2 <= m <= 20, got m={m}")
    if n < 1:
        raise ValueError("need at least one dataset")
    q = NEMENYI_Q[alpha][m - 2]
    return float(q * math.sqrt(m * (m + 1) / (6.0 * n)))


def _signed_ranks(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    diffs = a - b
    diffs = diffs[diffs != 0.0]
    return diffs, rankdata(np.abs(diffs), method="average")


def _exact_p(ranks_abs: np.ndarray, w: float) -> float:
    """P(min(W+, W-) <= w) over all 2^n sign assignments.

    Midranks are multiples of 1/2, so doubling them gives integers and the
    W+ distribution follows from a shift-add convolution; the tally equals
    enumerating every sign assignment without materializing 2^n patterns.
    """
    doubled = np.rint(2.0 * ranks_abs).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for d in doubled:
        counts[d:] += counts[: total + 1 - d]
    t = np.arange(total + 1)
    mask = np.minimum(t, total - t) <= 2.0 * w + 1e-9
    return float(counts[mask].sum() / 2.0 ** len(doubled))


def _normal_p(ranks_abs: np.ndarray, w: float) -> float:
    n = len(ranks_abs)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, counts = np.unique(ranks_abs, return_counts=True)
    var -= float(np.sum(counts**3 - counts)) / 48.0
    if var <= 0:
        return 1.0
    z = (w - mean + 0.5) / math.sqrt(var)
    return float(min(1.0, 2.0 * stats.norm.cdf(z)))


def wilcoxon_signed_rank(a, b, mode: str = "auto") -> float:
    """Two-sided Wilcoxon signed-rank p-value for paired samples.

    Zero differences are dropped before ranking and ties share midranks.
    The exact distribution is enumerated when the effective n is at most
    25 (or ``mode='exact'``); larger samples use the normal approximation
    with continuity correction.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape or len(a) < 1:
        raise ValueError("paired samples must be nonempty and equally long")
    diffs, r = _signed_ranks(a, b)
    if len(diffs) == 0:
        warnings.warn("all differences are zero; returning p = 1", stacklevel=2)
        return 1.0
    w_plus = float(r[diffs > 0].sum())
    w = min(w_plus, float(r.sum()) - w_plus)
    if mode == "exact" or (mode == "auto" and len(diffs) <= EXACT_WILCOXON_LIMIT):
        return _exact_p(r, w)
    if mode not in ("auto", "normal"):
        raise ValueError(f"mode must be auto, exact or normal, got {mode!r}")
    return _normal_p(r, w)


def holm_correct(p_values, alpha: float = 0.05) -> HolmResult:
    """Stepwise Holm decisions over a family of p-values.

    Sorted ascending, hypothesis v is tested against alpha/(m-v+1) and
    testing stops at the first failure, so rejections are downward-closed
    in the sorted order.  Decisions and thresholds are returned in the
    input order, with the ascending order alongside.
    """
    p = np.asarray(p_values, dtype=np.float64).ravel()
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m_hat = len(p)
    order = np.argsort(p, kind="stable")
    thresholds = np.empty(m_hat)
    reject = np.zeros(m_hat, dtype=bool)
    alive = True
    for v, idx in enumerate(order, start=1):
        thresholds[idx] = alpha / (m_hat - v + 1)
        if alive and p[idx] <= thresholds[idx]:
            reject[idx] = True
        else:
            alive = False
    return HolmResult(reject.tolist(), thresholds.tolist(), order.tolist())


def bayesian_signed_rank(z, rope: float = 0.01, prior_z0: float = 0.0,
                         prior_strength: float = 1.0, mc_samples: int = 50_000,
                         seed: int = 0) -> BayesianPosterior:
    """Dirichlet-weighted posterior over (left, rope, right) for differences.

    The difference vector is augmented with the pseudo-observation
    ``prior_z0``; each Monte Carlo draw samples weights from
    Dirichlet(prior_strength, 1, ..., 1) and accumulates the weighted
    pairwise indicator sums of z_i + z_j against (-2*rope, 2*rope).
    Sums landing exactly on a boundary count toward the rope.
    """
    if mc_samples < 1000:
        raise ValueError("use at least 1000 Monte Carlo samples")
    if rope < 0:
        raise ValueError("rope must be nonnegative")
    z = np.concatenate(([prior_z0], np.asarray(z, dtype=np.float64).ravel()))
    pair_sums = z[:, None] + z[None, :]
    mask_left = pair_sums < -2.0 * rope
    mask_right = pair_sums > 2.0 * rope
    mask_rope = ~(mask_left | mask_right)
    rng = np.random.default_rng(seed)
    alphas = np.full(len(z), 1.0)
    alphas[0] = prior_strength
    weights = rng.dirichlet(alphas, size=mc_samples)
    theta_l = np.einsum("si,ij,sj->s", weights, mask_left.astype(np.float64), weights)
    theta_r = np.einsum("si,ij,sj->s", weights, mask_right.astype(np.float64), weights)
    theta_e = np.einsum("si,ij,sj->s", weights, mask_rope.astype(np.float64), weights)
    return BayesianPosterior(
        float(theta_l.mean()), float(theta_e.mean()), float(theta_r.mean()),
        rope, mc_samples,
    )


def _pair_cell(table: ResultsTable, row: str, col: str, alpha: float) -> McmCell:
    a = table.column(row)
    b = table.column(col)
    diff = a - b
    mean_diff = float(diff.mean())
    better = diff > 0 if table.higher_is_better else diff < 0
    worse = diff < 0 if table.higher_is_better else diff > 0
    wins, losses = int(better.sum()), int(worse.sum())
    ties = len(diff) - wins - losses
    p = wilcoxon_signed_rank(a, b)
    return McmCell(mean_diff, wins, ties, losses, p, p <= alpha)


def build_mcm(table: ResultsTable, rows=None, cols=None, alpha: float = 0.05) -> Mcm:
    """Pairwise mean-difference / win-tie-loss / Wilcoxon-p grid.

    Each cell is a pure function of the two columns involved, so adding or
    removing other comparates never changes it.  Comparates are ordered by
    mean performance (best first); ``significant`` flags raw per-cell
    p-values at ``alpha`` with no family correction.
    """
    rows = list(rows) if rows is not None else list(table.comparates)
    cols = list(cols) if cols is not None else list(table.comparates)
    unknown = [c for c in rows + cols if c not in table.comparates]
    if unknown:
        raise ValueError(f"unknown comparates: {unknown}")
    means = {c: float(table.column(c).mean()) for c in table.comparates}
    sign = -1.0 if table.higher_is_better else 1.0
    ordering = sorted(table.comparates, key=lambda c: (sign * means[c], c))
    rows = sorted(rows, key=ordering.index)
    cols = sorted(cols, key=ordering.index)
    cells = {}
    for r in rows:
        for c in cols:
            if r == c:
                continue
            cells[(r, c)] = _pair_cell(table, r, c, alpha)
    return Mcm(rows, cols, ordering, means, cells, alpha)
