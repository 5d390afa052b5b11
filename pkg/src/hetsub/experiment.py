"""Experiment harness: config-driven runs, trial aggregation, and the
heteroscedastic landscape sweep."""

from __future__ import annotations

import csv
import io
import math
import resource
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import alpcahus, baselines, metrics
from .config import ConfigError, ExperimentConfig
from .matio import atomic_write_text
from .synth import gen_uos_dataset

__all__ = ["RunReport", "run_experiment", "run_landscape", "landscape_csv"]


@dataclass
class RunReport:
    algorithm: str
    seed: int
    config: dict
    trial_results: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    wall_clock_s: float = 0.0
    peak_memory_mb: float = 0.0

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "config": self.config,
            "trials": self.trial_results,
            "aggregate": self.aggregate,
            "wall_clock_s": self.wall_clock_s,
            "peak_memory_mb": self.peak_memory_mb,
        }


def _trial_seed(seed: int, t: int) -> int:
    return (int(seed) * 1_000_003 + t) & 0x7FFFFFFFFFFFFFFF


def _run_algorithm(Y, cfg: ExperimentConfig, dataset=None):
    """Dispatch one clustering run. Returns (labels, cost_trace or None)."""
    alg = cfg.algorithm
    if alg == "alpcahus":
        if cfg.B == 1:
            rng = np.random.default_rng(cfg.seed ^ 1)
            ranks = cfg.resolve_ranks(Y)
            if cfg.init == "tips":
                init = alpcahus.tips_init(Y, cfg.K, cfg.resolve_q(), rng=rng)
            else:
                init = alpcahus.random_init(Y.shape[1], cfg.K, rng)
            res = alpcahus.alpcahus_trial(
                Y, cfg.K, ranks, T1=cfg.T1, T2=cfg.T2, alpha=cfg.alpha_noise,
                init=init, rng=rng, weighting=cfg.weighting,
                adaptive_rank=cfg.adaptive_rank,
                flippa_trials=cfg.flippa_trials,
                flippa_percentile=cfg.flippa_percentile,
            )
            return res.labels, res.cost_trace
        return alpcahus.alpcahus_ensemble(Y, cfg), None
    if alg == "kss":
        rng = np.random.default_rng(cfg.seed ^ 1)
        ranks = cfg.resolve_ranks(Y)
        if cfg.init == "tips":
            init = alpcahus.tips_init(Y, cfg.K, cfg.resolve_q(), rng=rng)
        else:
            init = alpcahus.random_init(Y.shape[1], cfg.K, rng)
        labels, _, trace, _ = baselines.kss_trial(
            Y, cfg.K, max(ranks), T2=cfg.T2, init=init, rng=rng
        )
        return labels, trace
    if alg == "ekss":
        return baselines.ekss_ensemble(Y, cfg), None
    if alg == "tsc":
        rng = np.random.default_rng(cfg.seed ^ 1)
        return baselines.tsc_cluster(Y, cfg.K, cfg.resolve_q(), rng=rng), None
    if alg == "kmeans":
        rng = np.random.default_rng(cfg.seed ^ 1)
        return baselines.kmeans_cluster(Y, cfg.K, rng=rng), None
    if alg == "oracle":
        if dataset is None:
            raise ConfigError("oracle requires synthetic data with ground truth")
        ranks = cfg.resolve_ranks(Y)
        labels, _ = baselines.noisy_oracle(
            Y, dataset.labels, dataset.low_noise_mask, max(ranks)
        )
        return labels, None
    raise ConfigError(f"unknown algorithm {alg!r}")


def _subspace_errors(Y, pred, dataset, K, d):
    """Post-fit PCA per predicted cluster, Hungarian-match to truth, then
    average the projection distances against the true bases."""
    M = metrics.confusion_matrix(pred, dataset.labels, K)
    perm = metrics.hungarian(-M.astype(float))
    errs = []
    for k in range(K):
        idx = pred == k + 1
        if np.sum(idx) < 1:
            continue
        Yk = Y[:, idx]
        dk = min(d, *Yk.shape)
        if dk != d:
            continue
        U_hat = baselines.pca_subspace_step(Yk, dk)
        errs.append(metrics.subspace_error(U_hat, dataset.bases[perm[k]]))
    return float(np.mean(errs)) if errs else float("nan")


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Run ``cfg.trials`` independent dataset/clustering repetitions and
    aggregate mean/median/std of each metric. Fully deterministic given the
    resolved config (timing fields excluded)."""
    cfg.validate()
    if cfg.synth is None and cfg.input_matrix is None:
        raise ConfigError("need a [synth] block or an input matrix")
    start = time.perf_counter()
    trial_rows = []
    for t in range(cfg.trials):
        seed_t = _trial_seed(cfg.seed, t)
        trial_cfg = replace(cfg, seed=seed_t, trials=1)
        trial_cfg._resolved_ranks = None
        dataset = None
        if cfg.synth is not None:
            dataset = gen_uos_dataset(cfg.synth, np.random.default_rng(seed_t))
            Y = dataset.Y
        else:
            from .matio import load_matrix

            Y = load_matrix(cfg.input_matrix)
        t0 = time.perf_counter()
        try:
            labels, trace = _run_algorithm(Y, trial_cfg, dataset)
        except Exception as exc:
            raise RuntimeError(f"trial {t} (seed {seed_t}) failed: {exc}") from exc
        elapsed = time.perf_counter() - t0
        row = {
            "trial": t,
            "seed": seed_t,
            "labels": [int(v) for v in labels],
            "elapsed_s": elapsed,
        }
        if trace is not None:
            row["cost_trace"] = [float(v) for v in trace]
        if dataset is not None:
            row["clustering_error"] = metrics.clustering_error(
                labels, dataset.labels, cfg.K
            )
            row["mean_iou"] = metrics.mean_iou(labels, dataset.labels, cfg.K)
            row["subspace_error"] = _subspace_errors(
                Y, labels, dataset, cfg.K, cfg.synth.d
            )
        elif cfg.input_labels is not None:
            from .matio import load_labels

            truth = load_labels(cfg.input_labels)
            row["clustering_error"] = metrics.clustering_error(labels, truth, cfg.K)
            row["mean_iou"] = metrics.mean_iou(labels, truth, cfg.K)
        trial_rows.append(row)
    aggregate = {}
    for key in ("clustering_error", "mean_iou", "subspace_error", "elapsed_s"):
        values = [r[key] for r in trial_rows if key in r and not math.isnan(r[key])]
        if values:
            aggregate[key] = {
                "mean": float(np.mean(values)),
                "median": float(np.median(values)),
                "std": float(np.std(values)),
            }
    peak_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return RunReport(
        algorithm=cfg.algorithm,
        seed=cfg.seed,
        config=cfg.resolved_dict(),
        trial_results=trial_rows,
        aggregate=aggregate,
        wall_clock_s=time.perf_counter() - start,
        peak_memory_mb=peak_kb / 1024.0,
    )


def run_landscape(
    cfg: ExperimentConfig,
    nu_ratios,
    n_ratios,
    algorithms=("alpcahus", "ekss"),
    jobs: int = 1,
):
    """Sweep the (nu2/nu1, N2/N1) grid; one result row per grid cell with
    mean/std clustering error per algorithm. Failed cells record NaN."""
    cfg.validate()
    if cfg.synth is None:
        raise ConfigError("landscape sweeps require a [synth] block")
    if not nu_ratios or not n_ratios:
        raise ConfigError("grid must be nonempty")
    cells = [(nr, sr) for nr in nu_ratios for sr in n_ratios]

    def run_cell(cell):
        nu_ratio, n_ratio = cell
        row = {"nu_ratio": nu_ratio, "n_ratio": n_ratio}
        for alg in algorithms:
            synth = replace(
                cfg.synth,
                nu2=cfg.synth.nu1 * nu_ratio,
                N2=max(0, int(round(cfg.synth.N1 * n_ratio))),
            )
            cell_cfg = replace(cfg, algorithm=alg, synth=synth)
            cell_cfg._resolved_ranks = None
            try:
                report = run_experiment(cell_cfg)
                agg = report.aggregate.get("clustering_error", {})
                row[f"{alg}_mean"] = agg.get("mean", float("nan"))
                row[f"{alg}_std"] = agg.get("std", float("nan"))
            except Exception:
                row[f"{alg}_mean"] = float("nan")
                row[f"{alg}_std"] = float("nan")
        return row

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(c) for c in cells]
    return rows


def landscape_csv(rows, algorithms) -> str:
    buf = io.StringIO()
    fields = ["nu_ratio", "n_ratio"]
    for alg in algorithms:
        fields += [f"{alg}_mean", f"{alg}_std"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in fields})
    return buf.getvalue()


def write_landscape_csv(path, rows, algorithms) -> None:
    atomic_write_text(path, landscape_csv(rows, algorithms))
