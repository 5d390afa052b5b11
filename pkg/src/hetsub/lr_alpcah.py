"""Single-subspace heteroscedastic PCA via alternating low-rank factorization.

Minimizes, over a left factor L (D x d), coefficients R (n x d) and
per-sample noise variances nu (length n, floored at alpha):

    0.5 * || (Y - L R') diag(nu)^{-1/2} ||_F^2 + (D/2) * sum_i log(nu_i)

Each update is an exact coordinate minimizer, so the cost is nonincreasing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "FactorPair",
    "SolveResult",
    "IllConditionedSolveWarning",
    "DegenerateClusterError",
    "cost_fk",
    "update_factor_L",
    "update_factor_R",
    "update_noise",
    "svd_init",
    "orthonormal_basis",
    "lr_alpcah_solve",
]

# condition number above which the d x d normal matrix gets a ridge
_COND_LIMIT = 1e12
_RIDGE_SCALE = 1e-10


class IllConditionedSolveWarning(RuntimeWarning):
    """Raised (as a warning) when a normal-equation solve needed a ridge."""


class DegenerateClusterError(ValueError):
    """An all-zero factor has no orthonormal basis; the cluster is degenerate."""


@dataclass
class FactorPair:
    """Factorization X ~= L @ R.T with L of shape (D, d) and R of shape (n, d)."""

    L: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        if self.L.ndim != 2 or self.R.ndim != 2:
            raise ValueError("L and R must be 2-D arrays")
        if self.L.shape[1] != self.R.shape[1]:
            raise ValueError(
                f"factor rank mismatch: L has {self.L.shape[1]} columns, "
                f"R has {self.R.shape[1]}"
            )

    @property
    def rank(self) -> int:
        return self.L.shape[1]

    def product(self) -> np.ndarray:
        return self.L @ self.R.T


@dataclass
class SolveResult:
    factors: FactorPair
    nu: np.ndarray
    cost_trace: list = field(default_factory=list)
    ridge_used: bool = False


def _check_dims(Y, L=None, R=None, nu=None):
    D, n = Y.shape
    if L is not None and L.shape[0] != D:
        raise ValueError(f"L has {L.shape[0]} rows, expected {D}")
    if R is not None and R.shape[0] != n:
        raise ValueError(f"R has {R.shape[0]} rows, expected {n} (one per sample)")
    if nu is not None and len(np.atleast_1d(nu)) != n:
        raise ValueError(f"nu has length {len(np.atleast_1d(nu))}, expected {n}")


def cost_fk(Y: np.ndarray, factors: FactorPair, nu: np.ndarray) -> float:
    """Weighted factorization cost plus log-determinant noise penalty."""
    nu = np.asarray(nu, dtype=float)
    _check_dims(Y, factors.L, factors.R, nu)
    D = Y.shape[0]
    resid = Y - factors.product()
    fit = 0.5 * float(np.sum(resid**2 / nu[None, :]))
    return fit + 0.5 * D * float(np.sum(np.log(nu)))


def _solve_normal(G: np.ndarray, B: np.ndarray):
    """Solve G X = B for symmetric positive semidefinite G, with a ridge fallback.

    Returns (X, ridge_used).
    """
    d = G.shape[0]
    ridge_used = False
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        G = G + (_RIDGE_SCALE * np.trace(G) / d + np.finfo(float).tiny) * np.eye(d)
        ridge_used = True
        warnings.warn(
            "near-singular normal matrix; adding ridge", IllConditionedSolveWarning
        )
    try:
        c, low = scipy.linalg.cho_factor(G)
        X = scipy.linalg.cho_solve((c, low), B)
    except scipy.linalg.LinAlgError:
        X = np.linalg.lstsq(G, B, rcond=None)[0]
        ridge_used = True
    return X, ridge_used


def update_factor_L(
    Y: np.ndarray, R: np.ndarray, nu: np.ndarray, weighting: str = "inverse"
) -> np.ndarray:
    """Minimize the cost over L with R and nu fixed.

    ``weighting="inverse"`` uses inverse-variance weights 1/nu_i, which is the
    stationarity condition of the cost (high-noise samples down-weighted).
    ``weighting="literal"`` weights by nu_i instead; exposed for comparison
    only and not a cost minimizer.
    """
    nu = np.asarray(nu, dtype=float)
    _check_dims(Y, R=R, nu=nu)
    if weighting == "inverse":
        w = 1.0 / nu
    elif weighting == "literal":
        w = nu
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    Rw = R * w[:, None]
    G = R.T @ Rw
    M = Y @ Rw  # D x d
    X, _ = _solve_normal(G, M.T)
    return X.T


def update_factor_R(Y: np.ndarray, L: np.ndarray) -> np.ndarray:
    """Least-squares coefficients; per-column noise weights cancel."""
    _check_dims(Y, L=L)
    G = L.T @ L
    X, _ = _solve_normal(G, L.T @ Y)  # d x n
    return X.T


def update_noise(Y: np.ndarray, factors: FactorPair, alpha: float) -> np.ndarray:
    """Per-column mean squared residual, floored at alpha."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    _check_dims(Y, factors.L, factors.R)
    D = Y.shape[0]
    resid = Y - factors.product()
    return np.maximum(alpha, np.sum(resid**2, axis=0) / D)


def svd_init(Y: np.ndarray, d_hat: int) -> FactorPair:
    """Truncated-SVD split L = U sqrt(S), R = V sqrt(S); best rank-d_hat fit."""
    D, n = Y.shape
    if not 1 <= d_hat <= min(D, n):
        raise ValueError(f"d_hat={d_hat} out of range for {D}x{n} matrix")
    U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    root = np.sqrt(s[:d_hat])
    return FactorPair(U[:, :d_hat] * root[None, :], Vt[:d_hat].T * root[None, :])


def orthonormal_basis(L: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of range(L) via rank-revealing QR.

    Rank-deficient factors yield a thinner basis instead of failing, which is
    routine when the working rank is over-parameterized.
    """
    norm = np.linalg.norm(L)
    if norm == 0:
        raise DegenerateClusterError("cannot orthonormalize an all-zero factor")
    Q, Rq, _ = scipy.linalg.qr(L, mode="economic", pivoting=True)
    diag = np.abs(np.diag(Rq))
    rank = max(1, int(np.sum(diag > rel_tol * norm)))
    return Q[:, :rank]


def lr_alpcah_solve(
    Y: np.ndarray,
    d_hat: int,
    T1: int = 5,
    alpha: float = 1e-6,
    init: FactorPair | None = None,
    nu_init: np.ndarray | None = None,
    weighting: str = "inverse",
    estimate_noise: bool = True,
) -> SolveResult:
    """Run T1 rounds of alternating minimization over (L, R, nu).

    Without ``init``, starts from the truncated-SVD split with nu = 1
    (homoscedastic assumption). ``estimate_noise=False`` freezes nu at its
    initial value, reducing the method to plain alternating least squares.
    The returned cost trace has length T1 + 1 (initial cost included) and is
    nonincreasing.
    """
    D, n = Y.shape
    if not 1 <= d_hat <= min(D, n):
        raise ValueError(f"d_hat={d_hat} out of range for {D}x{n} matrix")
    if T1 < 1:
        raise ValueError("T1 must be >= 1")
    factors = svd_init(Y, d_hat) if init is None else init
    nu = np.ones(n) if nu_init is None else np.asarray(nu_init, dtype=float).copy()
    ridge = False
    trace = [cost_fk(Y, factors, nu)]
    for _ in range(T1):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", IllConditionedSolveWarning)
            L = update_factor_L(Y, factors.R, nu, weighting=weighting)
            R = update_factor_R(Y, L)
            ridge = ridge or any(
                issubclass(w.category, IllConditionedSolveWarning) for w in caught
            )
        factors = FactorPair(L, R)
        if estimate_noise:
            nu = update_noise(Y, factors, alpha)
        trace.append(cost_fk(Y, factors, nu))
    return SolveResult(factors, nu, trace, ridge_used=ridge)
