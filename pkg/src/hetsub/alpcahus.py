"""ALPCAHUS: K-subspaces alternation with heteroscedastic subspace fits and
ensemble spectral consensus.

The trial loop alternates a per-cluster LR-ALPCAH fit with nearest-subspace
reassignment. Ties in the reassignment retain the previous label, which
prevents points from cycling between equal-cost clusters and makes the cost
sequence nonincreasing with finite termination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lr_alpcah import (
    FactorPair,
    cost_fk,
    lr_alpcah_solve,
    orthonormal_basis,
    update_factor_R,
)
from .spectral import (
    spectral_cluster,
    symmetrize_avg,
    threshold_top_q_cols,
    threshold_top_q_rows,
)

__all__ = [
    "SubspaceModel",
    "TrialResult",
    "total_cost",
    "assign_clusters",
    "alpcahus_trial",
    "coassociation",
    "consensus_cluster",
    "tips_init",
    "random_init",
    "alpcahus_ensemble",
]

TIE_TOL = 1e-12


@dataclass
class SubspaceModel:
    """Per-cluster factors, per-sample noise variances, and orthonormal bases.

    ``nu`` is indexed by sample (length N); factors/bases by cluster.
    """

    factors: list
    bases: list
    nu: np.ndarray

    @property
    def K(self) -> int:
        return len(self.bases)


@dataclass
class TrialResult:
    labels: np.ndarray
    model: SubspaceModel
    cost_trace: list
    sub_traces: list = field(default_factory=list)
    rounds: int = 0
    converged: bool = False
    repairs: int = 0


def _check_labels(labels, N, K):
    labels = np.asarray(labels)
    if labels.shape != (N,):
        raise ValueError(f"labels must have length {N}")
    if labels.min() < 1 or labels.max() > K:
        raise ValueError(f"labels must lie in 1..{K}")
    return labels.astype(int)


def total_cost(Y: np.ndarray, model: SubspaceModel, labels: np.ndarray) -> float:
    """Sum of per-cluster factorization costs over the current partition."""
    labels = _check_labels(labels, Y.shape[1], model.K)
    total = 0.0
    for k in range(model.K):
        idx = labels == k + 1
        if not np.any(idx):
            continue
        total += cost_fk(Y[:, idx], model.factors[k], model.nu[idx])
    return total


def _residuals_to_bases(Y, bases):
    """K x N matrix of squared projection residuals."""
    J = np.empty((len(bases), Y.shape[1]))
    for k, U in enumerate(bases):
        resid = Y - U @ (U.T @ Y)
        J[k] = np.sum(resid**2, axis=0)
    return J


def assign_clusters(
    Y: np.ndarray,
    bases: list,
    prev: np.ndarray | None = None,
    tie_tol: float = TIE_TOL,
) -> np.ndarray:
    """Nearest-subspace labels with the anti-cycling tie rule.

    A point keeps its previous label whenever that label attains the minimum
    residual within relative ``tie_tol``; otherwise the smallest attaining
    cluster index wins.
    """
    J = _residuals_to_bases(Y, bases)
    jmin = J.min(axis=0)
    ties = J <= jmin * (1.0 + tie_tol)
    labels = np.argmax(ties, axis=0) + 1  # first True = smallest index
    if prev is not None:
        prev = _check_labels(prev, Y.shape[1], len(bases))
        keep = ties[prev - 1, np.arange(Y.shape[1])]
        labels = np.where(keep, prev, labels)
    return labels


def _repair_empty(Y, bases, labels, K):
    """Re-seed each emptied cluster with the worst-fit point overall."""
    repairs = 0
    J = None
    for k in range(1, K + 1):
        if np.any(labels == k):
            continue
        if J is None:
            J = _residuals_to_bases(Y, bases)
        own = J[labels - 1, np.arange(Y.shape[1])]
        # do not strip another singleton cluster
        counts = np.bincount(labels, minlength=K + 1)
        movable = counts[labels] > 1
        if not np.any(movable):
            continue
        own = np.where(movable, own, -np.inf)
        labels = labels.copy()
        labels[np.argmax(own)] = k
        repairs += 1
    return labels, repairs


def _alternating_loop(Y, K, init_labels, T2, fit_cluster, assignment_cost, tie_tol=TIE_TOL):
    """Shared K-subspaces scaffolding for ALPCAHUS and KSS-style trials.

    ``fit_cluster(k, Yk, idx, state)`` returns
    ``(state, U, cost_before, cost_after)`` where the costs may be None.
    ``assignment_cost(labels, bases)`` is recorded after each reassignment,
    before any empty-cluster repair (a repair restarts a cluster and is
    excluded from the monotone cost sequence).
    """
    N = Y.shape[1]
    labels = _check_labels(init_labels, N, K)
    states = [None] * K
    bases = [None] * K
    trace = []
    sub_traces = []
    repairs = 0
    rounds = 0
    converged = False
    for t2 in range(T2):
        rounds += 1
        c0s, c1s = [], []
        for k in range(K):
            idx = labels == k + 1
            states[k], bases[k], c0, c1 = fit_cluster(k, Y[:, idx], idx, states[k])
            c0s.append(c0)
            c1s.append(c1)
        sub_traces.append(list(zip(c0s, c1s)))
        if t2 == 0 and all(c is not None for c in c0s):
            trace.append(sum(c0s))
        if all(c is not None for c in c1s):
            trace.append(sum(c1s))
        new_labels = assign_clusters(Y, bases, prev=labels, tie_tol=tie_tol)
        if assignment_cost is not None:
            trace.append(assignment_cost(new_labels, bases))
        changed = not np.array_equal(new_labels, labels)
        new_labels, nrep = _repair_empty(Y, bases, new_labels, K)
        repairs += nrep
        labels = new_labels
        if not changed:
            converged = True
            break
    return labels, states, bases, trace, sub_traces, rounds, converged, repairs


def _clamp_rank(d_hat, D, n):
    return max(1, min(int(d_hat), D, n))


def alpcahus_trial(
    Y: np.ndarray,
    K: int,
    d_hats,
    T1: int = 5,
    T2: int = 50,
    alpha: float = 1e-6,
    init: np.ndarray | None = None,
    rng=None,
    weighting: str = "inverse",
    adaptive_rank: bool = False,
    flippa_trials: int = 10,
    flippa_percentile: float = 95.0,
) -> TrialResult:
    """One ALPCAHUS base clustering: LR-ALPCAH per cluster, then reassignment,
    for at most T2 rounds with early stopping when labels no longer change.

    ``d_hats`` may be a scalar or a length-K sequence of working ranks. With
    ``adaptive_rank`` the ranks are shrunk by sign-flip parallel analysis after
    the reassignment of rounds 1 and ceil(T2/2); shrink rounds may locally bump
    the cost trace and are off by default.
    """
    D, N = Y.shape
    if np.isscalar(d_hats):
        d_hats = [int(d_hats)] * K
    d_hats = [int(d) for d in d_hats]
    if len(d_hats) != K:
        raise ValueError(f"need {K} rank estimates, got {len(d_hats)}")
    rng = np.random.default_rng(rng)
    if init is None:
        init = random_init(N, K, rng)
    nu = np.ones(N)

    def fit_cluster(k, Yk, idx, state):
        dk = _clamp_rank(d_hats[k], *Yk.shape)
        if state is not None and state.rank == dk and state.L.shape[0] == D:
            warm = FactorPair(state.L, update_factor_R(Yk, state.L))
        else:
            warm = None
        res = lr_alpcah_solve(
            Yk, dk, T1=T1, alpha=alpha, init=warm,
            nu_init=nu[idx] if warm is not None else None,
            weighting=weighting,
        )
        nu[idx] = res.nu
        U = orthonormal_basis(res.factors.L)
        return res.factors, U, res.cost_trace[0], res.cost_trace[-1]

    def assignment_cost(labels, bases):
        J = _residuals_to_bases(Y, bases)
        own = J[labels - 1, np.arange(N)]
        return 0.5 * float(np.sum(own / nu)) + 0.5 * D * float(np.sum(np.log(nu)))

    shrink_rounds = {1, math.ceil(T2 / 2)}
    labels = _check_labels(init, N, K)
    states = [None] * K
    bases = [None] * K
    trace: list = []
    sub_traces: list = []
    repairs = 0
    rounds = 0
    converged = False
    for t2 in range(T2):
        rounds += 1
        round_before = 0.0
        round_after = 0.0
        round_subs = []
        for k in range(K):
            idx = labels == k + 1
            states[k], bases[k], c0, c1 = fit_cluster(k, Y[:, idx], idx, states[k])
            round_before += c0
            round_after += c1
            round_subs.append((c0, c1))
        sub_traces.append(round_subs)
        if t2 == 0:
            trace.append(round_before)
        trace.append(round_after)
        new_labels = assign_clusters(Y, bases, prev=labels)
        trace.append(assignment_cost(new_labels, bases))
        changed = not np.array_equal(new_labels, labels)
        new_labels, nrep = _repair_empty(Y, bases, new_labels, K)
        repairs += nrep
        labels = new_labels
        if adaptive_rank and (t2 + 1) in shrink_rounds:
            from .rank import adaptive_shrink

            new_d = adaptive_shrink(
                Y, labels, d_hats, rng,
                trials=flippa_trials, percentile=flippa_percentile,
            )
            for k in range(K):
                if new_d[k] != d_hats[k]:
                    states[k] = None  # rank changed: re-init from SVD next round
            d_hats = new_d
        if not changed:
            converged = True
            break
    model = SubspaceModel(factors=list(states), bases=list(bases), nu=nu)
    return TrialResult(labels, model, trace, sub_traces, rounds, converged, repairs)


def coassociation(runs: list) -> np.ndarray:
    """Fraction of runs in which each pair of samples shares a label."""
    if len(runs) == 0:
        raise ValueError("need at least one labeling")
    runs = [np.asarray(r) for r in runs]
    N = len(runs[0])
    if any(len(r) != N for r in runs):
        raise ValueError("labelings must have equal length")
    A = np.zeros((N, N))
    for r in runs:
        A += (r[:, None] == r[None, :]).astype(float)
    return A / len(runs)


def consensus_cluster(runs: list, K: int, q: int, rng=None) -> np.ndarray:
    """Co-association matrix -> row+column top-q thresholding -> average ->
    spectral clustering. Shared by the ALPCAHUS and EKSS ensembles."""
    A = coassociation(runs)
    W = symmetrize_avg(threshold_top_q_rows(A, q), threshold_top_q_cols(A, q))
    return spectral_cluster(W, K, rng=rng)


def tips_init(Y: np.ndarray, K: int, q: int, rng=None) -> np.ndarray:
    """Thresholded absolute-inner-product spectral initialization.

    The inner-product affinity has expectation independent of the per-sample
    noise variances, unlike Euclidean distances, which makes it robust for
    heteroscedastic data.
    """
    W = np.abs(Y.T @ Y)
    np.fill_diagonal(W, 0.0)
    Z = threshold_top_q_rows(W, q)
    W = symmetrize_avg(Z, Z.T)
    return spectral_cluster(W, K, rng=rng)


def random_init(N: int, K: int, rng=None) -> np.ndarray:
    """Near-balanced random partition; cluster sizes differ by at most one."""
    if N < K:
        raise ValueError("need at least K samples")
    rng = np.random.default_rng(rng)
    labels = np.empty(N, dtype=int)
    labels[rng.permutation(N)] = np.arange(N) % K + 1
    return labels


def _trial_seed(seed: int, b: int) -> int:
    return (int(seed) ^ b) & 0x7FFFFFFFFFFFFFFF


def ensemble_labels(Y, K, B, seed, trial_fn, q, rng=None):
    """Run B independent randomly initialized trials and take the spectral
    consensus of their labelings. ``trial_fn(Y, init, rng) -> labels``."""
    if B < 1:
        raise ValueError("B must be >= 1")
    N = Y.shape[1]
    runs = []
    for b in range(1, B + 1):
        trial_rng = np.random.default_rng(_trial_seed(seed, b))
        init = random_init(N, K, trial_rng)
        runs.append(np.asarray(trial_fn(Y, init, trial_rng)))
    if B == 1:
        return runs[0], runs
    final_rng = np.random.default_rng(_trial_seed(seed, 0))
    return consensus_cluster(runs, K, q, rng=final_rng), runs


def alpcahus_ensemble(Y: np.ndarray, cfg, rng=None) -> np.ndarray:
    """Full ALPCAHUS: B base clusterings plus consensus (B > 1), or a single
    TIPS- or randomly-initialized trial (B = 1). Deterministic given cfg.seed."""
    K = cfg.K
    d_hats = cfg.resolve_ranks(Y)
    q = cfg.resolve_q()

    def trial_fn(Ymat, init, trial_rng):
        return alpcahus_trial(
            Ymat, K, d_hats, T1=cfg.T1, T2=cfg.T2, alpha=cfg.alpha_noise,
            init=init, rng=trial_rng, weighting=cfg.weighting,
            adaptive_rank=cfg.adaptive_rank,
            flippa_trials=cfg.flippa_trials,
            flippa_percentile=cfg.flippa_percentile,
        ).labels

    if cfg.B == 1 and cfg.init == "tips":
        trial_rng = np.random.default_rng(_trial_seed(cfg.seed, 1))
        init = tips_init(Y, K, q, rng=trial_rng)
        return trial_fn(Y, init, trial_rng)
    labels, _ = ensemble_labels(Y, K, cfg.B, cfg.seed, trial_fn, q)
    return labels
