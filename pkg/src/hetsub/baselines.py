"""Homoscedastic comparison methods: KSS, EKSS, TSC, raw K-means, and the
noisy-oracle reference. KSS shares the alternating scaffolding of the
heteroscedastic trial with plain PCA as the subspace step."""

from __future__ import annotations

import numpy as np

from .alpcahus import (
    _alternating_loop,
    _residuals_to_bases,
    assign_clusters,
    ensemble_labels,
    random_init,
    tips_init,
)
from .spectral import (
    kmeans,
    spectral_cluster,
    symmetrize_avg,
    threshold_top_q_rows,
)

__all__ = [
    "pca_subspace_step",
    "kss_trial",
    "ekss_ensemble",
    "tsc_cluster",
    "kmeans_cluster",
    "noisy_oracle",
]


def pca_subspace_step(Yk: np.ndarray, d_hat: int) -> np.ndarray:
    """Top-d_hat left singular vectors of the cluster submatrix."""
    D, n = Yk.shape
    if not 1 <= d_hat <= min(D, n):
        raise ValueError(f"d_hat={d_hat} out of range for {D}x{n} matrix")
    U, _, _ = np.linalg.svd(Yk, full_matrices=False)
    return U[:, :d_hat]


def kss_trial(
    Y: np.ndarray,
    K: int,
    d_hat: int,
    T2: int = 50,
    init: np.ndarray | None = None,
    rng=None,
    subspace_step=pca_subspace_step,
):
    """K-subspaces: per-cluster PCA alternated with nearest-subspace
    reassignment under the same tie rule, stopping criterion, and
    empty-cluster repair as the heteroscedastic trial.

    ``subspace_step(Yk, d)`` may be swapped out (e.g. with a stub) to test
    that the surrounding plumbing is method-agnostic.

    Returns (labels, bases, residual_trace, converged).
    """
    rng = np.random.default_rng(rng)
    if init is None:
        init = random_init(Y.shape[1], K, rng)

    def fit_cluster(k, Yk, idx, state):
        dk = max(1, min(int(d_hat), *Yk.shape))
        before = None
        if state is not None:
            resid = Yk - state @ (state.T @ Yk)
            before = float(np.sum(resid**2))
        U = subspace_step(Yk, dk)
        resid = Yk - U @ (U.T @ Yk)
        return U, U, before, float(np.sum(resid**2))

    def assignment_cost(labels, bases):
        J = _residuals_to_bases(Y, bases)
        return float(np.sum(J[labels - 1, np.arange(Y.shape[1])]))

    labels, _, bases, trace, _, _, converged, _ = _alternating_loop(
        Y, K, init, T2, fit_cluster, assignment_cost
    )
    return labels, bases, trace, converged


def ekss_ensemble(Y: np.ndarray, cfg, rng=None, subspace_step=pca_subspace_step) -> np.ndarray:
    """Ensemble KSS: B random-init KSS trials combined through the same
    co-association consensus as the heteroscedastic ensemble."""
    K = cfg.K
    d_hats = cfg.resolve_ranks(Y)
    d_hat = max(d_hats)
    q = cfg.resolve_q()

    def trial_fn(Ymat, init, trial_rng):
        return kss_trial(
            Ymat, K, d_hat, T2=cfg.T2, init=init, rng=trial_rng,
            subspace_step=subspace_step,
        )[0]

    if cfg.B == 1 and cfg.init == "tips":
        trial_rng = np.random.default_rng(cfg.seed)
        init = tips_init(Y, K, q, rng=trial_rng)
        return trial_fn(Y, init, trial_rng)
    labels, _ = ensemble_labels(Y, K, cfg.B, cfg.seed, trial_fn, q)
    return labels


def tsc_cluster(Y: np.ndarray, K: int, q: int, rng=None) -> np.ndarray:
    """Thresholded angular-similarity clustering.

    Columns are normalized to the unit sphere first so the arccos argument is
    a valid cosine; roundoff beyond 1 is clamped.
    """
    norms = np.linalg.norm(Y, axis=0)
    norms = np.where(norms == 0, 1.0, norms)
    Yn = Y / norms[None, :]
    G = np.clip(np.abs(Yn.T @ Yn), 0.0, 1.0)
    Z = np.exp(-2.0 * np.arccos(G))
    np.fill_diagonal(Z, 0.0)
    Zq = threshold_top_q_rows(Z, q)
    W = symmetrize_avg(Zq, Zq.T)
    return spectral_cluster(W, K, rng=rng)


def kmeans_cluster(Y: np.ndarray, K: int, rng=None) -> np.ndarray:
    """Plain K-means on the raw columns; included for reference, not tuned."""
    return kmeans(Y.T, K, rng=rng)


def noisy_oracle(
    Y: np.ndarray,
    true_labels: np.ndarray,
    low_noise_mask: np.ndarray,
    d_hat: int,
):
    """Reference method: PCA per true cluster on its low-noise samples only,
    then a single nearest-subspace pass over all of Y."""
    true_labels = np.asarray(true_labels)
    low_noise_mask = np.asarray(low_noise_mask, dtype=bool)
    K = int(true_labels.max())
    bases = []
    for k in range(1, K + 1):
        idx = (true_labels == k) & low_noise_mask
        if not np.any(idx):
            raise ValueError(f"cluster {k} has no low-noise samples")
        Yk = Y[:, idx]
        dk = max(1, min(int(d_hat), *Yk.shape))
        bases.append(pca_subspace_step(Yk, dk))
    labels = assign_clusters(Y, bases)
    return labels, bases
