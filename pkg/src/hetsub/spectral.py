"""Graph clustering primitives: Laplacians, spectral embedding, K-means, top-q thresholding."""

from __future__ import annotations

import numpy as np

__all__ = [
    "normalized_laplacian",
    "spectral_embedding",
    "kmeans",
    "spectral_cluster",
    "threshold_top_q_rows",
    "threshold_top_q_cols",
    "symmetrize_avg",
]


def normalized_laplacian(W: np.ndarray, symmetric: bool = False) -> np.ndarray:
    """Random-walk Laplacian I - D^{-1} W, or its symmetric counterpart
    I - D^{-1/2} W D^{-1/2} when ``symmetric=True``.

    Isolated vertices (zero degree) get D_ii := 1 so their row reduces to e_i'.
    """
    W = np.asarray(W, dtype=float)
    if np.any(W < 0):
        raise ValueError("affinity matrix must be nonnegative")
    deg = W.sum(axis=1)
    deg = np.where(deg == 0, 1.0, deg)
    n = W.shape[0]
    if symmetric:
        inv_root = 1.0 / np.sqrt(deg)
        return np.eye(n) - inv_root[:, None] * W * inv_root[None, :]
    return np.eye(n) - W / deg[:, None]


def spectral_embedding(L: np.ndarray, K: int) -> np.ndarray:
    """Rows are vertex embeddings from the K smallest-eigenvalue eigenvectors.

    The input is symmetrized as (L + L') / 2 before the eigendecomposition so
    a stable symmetric solver applies; the null-space structure is unchanged
    for the graphs of interest.
    """
    n = L.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"K={K} out of range for {n} vertices")
    Lsym = 0.5 * (L + L.T)
    _, vecs = np.linalg.eigh(Lsym)
    return vecs[:, :K]


def _kmeans_pp_centers(points, K, rng):
    n = points.shape[0]
    centers = np.empty((K, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    dist = np.sum((points - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        total = dist.sum()
        if total <= 0:
            centers[k] = points[rng.integers(n)]
        else:
            centers[k] = points[rng.choice(n, p=dist / total)]
        dist = np.minimum(dist, np.sum((points - centers[k]) ** 2, axis=1))
    return centers


def _lloyd(points, K, rng, max_iter):
    centers = _kmeans_pp_centers(points, K, rng)
    labels = np.zeros(points.shape[0], dtype=int)
    for _ in range(max_iter):
        d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        for k in range(K):
            mask = new_labels == k
            if not np.any(mask):
                # re-seed an emptied cluster with the farthest point
                far = np.argmax(d2[np.arange(len(new_labels)), new_labels])
                new_labels[far] = k
                mask = new_labels == k
            centers[k] = points[mask].mean(axis=0)
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    wcss = float(np.sum((points - centers[labels]) ** 2))
    return labels, wcss


def kmeans(
    points: np.ndarray,
    K: int,
    restarts: int = 10,
    rng=None,
    max_iter: int = 100,
) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding; best of ``restarts`` runs by
    within-cluster sum of squares. Returns labels in {1..K}.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"K={K} out of range for {n} points")
    rng = np.random.default_rng(rng)
    best_labels, best_wcss = None, np.inf
    for _ in range(restarts):
        labels, wcss = _lloyd(points, K, rng, max_iter)
        if wcss < best_wcss:
            best_labels, best_wcss = labels, wcss
    return best_labels + 1


def spectral_cluster(W: np.ndarray, K: int, rng=None) -> np.ndarray:
    """Normalized Laplacian -> spectral embedding -> K-means on embedding rows."""
    L = normalized_laplacian(W, symmetric=True)
    H = spectral_embedding(L, K)
    return kmeans(H, K, rng=rng)


def threshold_top_q_rows(A: np.ndarray, q: int) -> np.ndarray:
    """Keep the q largest-magnitude entries per row; ties favor the lowest
    column index for cross-platform determinism."""
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    if not 1 <= q <= n:
        raise ValueError(f"q={q} out of range for {n} columns")
    order = np.argsort(-np.abs(A), axis=1, kind="stable")
    keep = order[:, :q]
    out = np.zeros_like(A)
    rows = np.arange(A.shape[0])[:, None]
    out[rows, keep] = A[rows, keep]
    return out


def threshold_top_q_cols(A: np.ndarray, q: int) -> np.ndarray:
    """Column version of :func:`threshold_top_q_rows`."""
    return threshold_top_q_rows(np.asarray(A).T, q).T


def symmetrize_avg(Zr: np.ndarray, Zc: np.ndarray) -> np.ndarray:
    """Elementwise average of the row- and column-thresholded matrices."""
    Zr = np.asarray(Zr, dtype=float)
    Zc = np.asarray(Zc, dtype=float)
    if Zr.shape != Zc.shape:
        raise ValueError("shape mismatch")
    return 0.5 * (Zr + Zc)
