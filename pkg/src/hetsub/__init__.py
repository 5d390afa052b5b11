"""Heteroscedastic subspace clustering: ALPCAHUS, LR-ALPCAH, homoscedastic
baselines, rank estimation, synthetic data, metrics, and an experiment CLI."""

from .alpcahus import (
    alpcahus_ensemble,
    alpcahus_trial,
    assign_clusters,
    coassociation,
    random_init,
    tips_init,
    total_cost,
)
from .baselines import ekss_ensemble, kss_trial, noisy_oracle, tsc_cluster
from .config import ExperimentConfig
from .lr_alpcah import lr_alpcah_solve, svd_init
from .metrics import clustering_error, hungarian, mean_iou, subspace_error
from .rank import adaptive_shrink, eigengap_rank, flippa_rank
from .spectral import kmeans, spectral_cluster
from .synth import SynthConfig, gen_uos_dataset, random_subspace

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "SynthConfig",
    "adaptive_shrink",
    "alpcahus_ensemble",
    "alpcahus_trial",
    "assign_clusters",
    "clustering_error",
    "coassociation",
    "eigengap_rank",
    "ekss_ensemble",
    "flippa_rank",
    "gen_uos_dataset",
    "hungarian",
    "kmeans",
    "kss_trial",
    "lr_alpcah_solve",
    "mean_iou",
    "noisy_oracle",
    "random_init",
    "random_subspace",
    "spectral_cluster",
    "subspace_error",
    "svd_init",
    "tips_init",
    "total_cost",
    "tsc_cluster",
]
