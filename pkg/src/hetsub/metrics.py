"""Evaluation metrics: Hungarian-matched clustering error, subspace distance,
and mean intersection-over-union."""

from __future__ import annotations

import numpy as np
import scipy.optimize

__all__ = [
    "hungarian",
    "confusion_matrix",
    "clustering_error",
    "subspace_error",
    "mean_iou",
]


def hungarian(cost: np.ndarray) -> np.ndarray:
    """Optimal assignment for a square cost matrix.

    Returns ``perm`` with ``perm[i]`` the 0-based column assigned to row i.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError("cost matrix must be square")
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=int)
    perm[rows] = cols
    return perm


def _check_label_pair(pred, truth, K):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("label vectors must have equal length")
    for name, v in (("pred", pred), ("truth", truth)):
        if v.min() < 1 or v.max() > K:
            raise ValueError(f"{name} labels must lie in 1..{K}")
    return pred, truth


def confusion_matrix(pred, truth, K: int) -> np.ndarray:
    """K x K counts; entry (a, b) counts samples with pred a+1 and truth b+1."""
    pred, truth = _check_label_pair(pred, truth, K)
    M = np.zeros((K, K), dtype=int)
    np.add.at(M, (pred - 1, truth - 1), 1)
    return M


def clustering_error(pred, truth, K: int) -> float:
    """Percent misassigned after the optimal label permutation."""
    M = confusion_matrix(pred, truth, K)
    perm = hungarian(-M.astype(float))
    matched = M[np.arange(K), perm].sum()
    return 100.0 * (1.0 - matched / len(np.asarray(pred)))


def subspace_error(U_hat: np.ndarray, U_true: np.ndarray) -> float:
    """Normalized projection distance ||P_hat - P_true||_F / sqrt(2d).

    Basis-invariant; 0 for identical subspaces, 1 for orthogonal ones.
    """
    if U_hat.shape != U_true.shape:
        raise ValueError("bases must have equal shape")
    P_hat = U_hat @ U_hat.T
    P_true = U_true @ U_true.T
    d = U_hat.shape[1]
    return float(np.linalg.norm(P_hat - P_true) / np.sqrt(2 * d))


def mean_iou(pred, truth, K: int) -> float:
    """Mean per-class intersection-over-union (percent) after Hungarian label
    matching. Classes absent from both labelings are excluded."""
    M = confusion_matrix(pred, truth, K)
    perm = hungarian(-M.astype(float))
    ious = []
    for k in range(K):
        inter = M[k, perm[k]]
        union = M[k, :].sum() + M[:, perm[k]].sum() - inter
        if union == 0:
            continue  # class absent in both, excluded
        ious.append(inter / union)
    if not ious:
        raise ValueError("no classes present")
    return 100.0 * float(np.mean(ious))
