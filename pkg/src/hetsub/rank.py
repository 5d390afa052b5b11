"""Subspace-dimension estimation: eigengap heuristic and sign-flip parallel
analysis (FlipPA), plus the shrink-only update used across clustering rounds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = ["RankEstimate", "eigengap_rank", "flippa_rank", "adaptive_shrink"]


@dataclass
class RankEstimate:
    d_hat: int
    method: str
    singular_values: np.ndarray = field(default=None, repr=False)
    thresholds: np.ndarray = field(default=None, repr=False)
    no_signal: bool = False
    saturated: bool = False


def eigengap_rank(Yk: np.ndarray) -> RankEstimate:
    """Rank at the largest gap between consecutive eigenvalues of the sample
    covariance (1/n) Y Y'. Ties resolve to the smallest index."""
    D, n = Yk.shape
    if n < 2:
        raise ValueError("need at least 2 samples")
    s = scipy.linalg.svdvals(Yk)
    m = min(D, n)
    lam = s[:m] ** 2 / n
    gaps = np.abs(lam[:-1] - lam[1:])
    d_hat = int(np.argmax(gaps)) + 1 if len(gaps) else 1
    return RankEstimate(d_hat, "eigengap", singular_values=s)


def flippa_rank(
    Yk: np.ndarray,
    trials: int = 10,
    percentile: float = 95.0,
    rng=None,
) -> RankEstimate:
    """Sign-flip parallel analysis.

    Random +-1 matrices (fair Bernoulli over signs) scramble the low-rank
    structure while preserving entry magnitudes; the estimate is the smallest
    d whose (d+1)th data singular value falls at or below the given percentile
    of the flipped copies' (d+1)th singular values. d = 0 means no detectable
    signal; if no d qualifies the estimate saturates at min(D, n).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 < percentile <= 100:
        raise ValueError("percentile must lie in (0, 100]")
    D, n = Yk.shape
    m = min(D, n)
    rng = np.random.default_rng(rng)
    s = scipy.linalg.svdvals(Yk)
    flipped = np.empty((trials, m))
    for r in range(trials):
        M = rng.integers(0, 2, size=(D, n)) * 2 - 1
        flipped[r] = scipy.linalg.svdvals(M * Yk)
    thresholds = np.percentile(flipped, percentile, axis=0)
    below = s[:m] <= thresholds
    hits = np.flatnonzero(below)
    if len(hits) == 0:
        return RankEstimate(m, "flippa", s, thresholds, saturated=True)
    d_hat = int(hits[0])
    return RankEstimate(d_hat, "flippa", s, thresholds, no_signal=(d_hat == 0))


def adaptive_shrink(
    Y: np.ndarray,
    labels: np.ndarray,
    current: list,
    rng=None,
    trials: int = 10,
    percentile: float = 95.0,
) -> list:
    """Shrink-only rank update: per cluster, min(current, FlipPA estimate),
    floored at 1. Clusters with fewer than 2 points keep their current rank."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(rng)
    out = list(current)
    for k in range(len(current)):
        Yk = Y[:, labels == k + 1]
        if Yk.shape[1] < 2:
            continue
        est = flippa_rank(Yk, trials=trials, percentile=percentile, rng=rng)
        out[k] = min(out[k], max(est.d_hat, 1))
    return out
