"""Command-line experiment harness.

Subcommands: ``synth``, ``cluster``, ``rank``, ``eval``, ``landscape``,
``report``. Exit codes: 0 success, 2 config error, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import metrics, rank as rank_mod
from .config import ALGORITHMS, ConfigError, ExperimentConfig, load_config, _parse_d_hat
from .experiment import run_experiment, run_landscape, write_landscape_csv
from .matio import (
    DataError,
    load_labels,
    load_matrix,
    save_json,
    save_labels,
    save_matrix,
)
from .synth import SynthConfig, gen_uos_dataset

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _add_experiment_flags(p):
    p.add_argument("--config", help="INI config file; CLI flags override it")
    p.add_argument("--algorithm", choices=ALGORITHMS)
    p.add_argument("--clusters", type=int, dest="K")
    p.add_argument("--subspace-dim", dest="d_hat",
                   help="working rank: int, comma list, or 'auto'")
    p.add_argument("--q", type=int)
    p.add_argument("--base-clusterings", type=int, dest="B")
    p.add_argument("--t1", type=int)
    p.add_argument("--t2", type=int)
    p.add_argument("--alpha-noise", type=float)
    p.add_argument("--flippa-percentile", type=float)
    p.add_argument("--flippa-trials", type=int)
    p.add_argument("--weighting", choices=("inverse", "literal"))
    p.add_argument("--init", choices=("random", "tips"))
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)


def _add_synth_flags(p):
    p.add_argument("--ambient-dim", type=int)
    p.add_argument("--synth-subspace-dim", type=int)
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--nu1", type=float)
    p.add_argument("--nu2", type=float)


def _build_config(args, need_synth=False) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    for attr in ("algorithm", "K", "q", "B", "T1", "T2", "alpha_noise",
                 "flippa_percentile", "flippa_trials", "weighting", "init",
                 "seed", "trials"):
        value = getattr(args, attr.lower() if attr in ("T1", "T2", "B", "K") else attr, None)
        if value is not None:
            setattr(cfg, attr, value)
    if getattr(args, "d_hat", None) is not None:
        cfg.d_hat = _parse_d_hat(args.d_hat)
    synth = cfg.synth
    synth_flags = ("ambient_dim", "synth_subspace_dim", "n1", "n2", "nu1", "nu2")
    any_synth_flag = any(getattr(args, f, None) is not None for f in synth_flags)
    if synth is None and (need_synth or (any_synth_flag and not getattr(args, "input", None))):
        synth = SynthConfig(K=cfg.K)
    if synth is not None:
        mapping = {"ambient_dim": "D", "synth_subspace_dim": "d",
                   "n1": "N1", "n2": "N2", "nu1": "nu1", "nu2": "nu2"}
        for flag in synth_flags:
            value = getattr(args, flag, None)
            if value is not None:
                setattr(synth, mapping[flag], value)
        synth.K = cfg.K
    cfg.synth = synth
    if getattr(args, "input", None):
        cfg.input_matrix = args.input
    if getattr(args, "truth", None):
        cfg.input_labels = args.truth
    return cfg.validate()


def cmd_synth(args) -> int:
    cfg = _build_config(args, need_synth=True)
    dataset = gen_uos_dataset(cfg.synth, np.random.default_rng(cfg.seed))
    save_matrix(args.out, dataset.Y)
    if args.labels_out:
        save_labels(args.labels_out, dataset.labels)
    if args.groups_out:
        save_labels(args.groups_out, dataset.noise_group)
    print(f"wrote {dataset.Y.shape[0]}x{dataset.Y.shape[1]} matrix to {args.out}")
    return 0


def _select_q(cfg, candidates):
    """Pick q from ``candidates`` by mean clustering error on held-out
    training repetitions (separate seed stream from the main run)."""
    from dataclasses import replace

    if cfg.synth is None and cfg.input_labels is None:
        raise ConfigError("--q-grid needs ground truth (synthetic data or --truth)")
    best_q, best_err = None, float("inf")
    for q in candidates:
        train = replace(cfg, q=q, trials=min(3, cfg.trials), seed=cfg.seed + 7919)
        train._resolved_ranks = None
        agg = run_experiment(train).aggregate.get("clustering_error")
        if agg is None:
            raise ConfigError("--q-grid needs ground truth to score candidates")
        if agg["mean"] < best_err:
            best_q, best_err = q, agg["mean"]
    return best_q


def cmd_cluster(args) -> int:
    cfg = _build_config(args)
    if args.input:
        cfg.input_matrix = args.input
        cfg.synth = None
    if cfg.input_matrix is None and cfg.synth is None:
        raise ConfigError("cluster needs --input or a [synth] config block")
    if args.q_grid:
        candidates = [int(tok) for tok in args.q_grid.split(",") if tok.strip()]
        if not candidates:
            raise ConfigError("--q-grid needs at least one candidate")
        cfg.q = _select_q(cfg, candidates)
        print(f"q-grid selected q={cfg.q}")
    report = run_experiment(cfg)
    if args.labels_out:
        save_labels(args.labels_out, report.trial_results[-1]["labels"])
    if args.report_out:
        save_json(args.report_out, report.to_dict())
    agg = report.aggregate.get("clustering_error")
    if agg:
        print(f"{cfg.algorithm}: mean clustering error "
              f"{agg['mean']:.2f}% (std {agg['std']:.2f}) over {cfg.trials} trial(s)")
    else:
        print(f"{cfg.algorithm}: clustering complete "
              f"({len(report.trial_results)} trial(s); no ground truth for error)")
    return 0


def cmd_rank(args) -> int:
    Y = load_matrix(args.input)
    rng = np.random.default_rng(args.seed if args.seed is not None
                                else int(os.environ.get("HETSUB_SEED", 0)))
    if args.method == "eigengap":
        est = rank_mod.eigengap_rank(Y)
    else:
        est = rank_mod.flippa_rank(
            Y, trials=args.flippa_trials or 10,
            percentile=args.flippa_percentile or 95.0, rng=rng,
        )
    print(f"{est.method}: estimated rank {est.d_hat}"
          + (" (no signal detected)" if est.no_signal else "")
          + (" (saturated at min(D, N))" if est.saturated else ""))
    if args.out:
        save_json(args.out, {
            "method": est.method,
            "d_hat": est.d_hat,
            "no_signal": est.no_signal,
            "saturated": est.saturated,
            "singular_values": [float(v) for v in est.singular_values],
        })
    return 0


def cmd_eval(args) -> int:
    pred = load_labels(args.pred)
    truth = load_labels(args.truth)
    K = args.clusters or int(max(pred.max(), truth.max()))
    err = metrics.clustering_error(pred, truth, K)
    iou = metrics.mean_iou(pred, truth, K)
    print(f"clustering error: {err:.2f}%")
    print(f"mean IOU: {iou:.2f}%")
    if args.out:
        save_json(args.out, {"clustering_error": err, "mean_iou": iou, "K": K})
    return 0


def _parse_ratio_list(raw: str):
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad ratio list {raw!r}: {exc}") from exc


def cmd_landscape(args) -> int:
    cfg = _build_config(args, need_synth=True)
    algorithms = [a.strip() for a in args.algorithms.split(",")]
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {alg!r}")
    rows = run_landscape(
        cfg,
        _parse_ratio_list(args.nu_ratios),
        _parse_ratio_list(args.n_ratios),
        algorithms=algorithms,
        jobs=args.jobs,
    )
    write_landscape_csv(args.out, rows, algorithms)
    print(f"wrote {len(rows)} grid cells to {args.out}")
    return 0


def _read_landscape_csv(path):
    with open(path) as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty CSV")
        algorithms = [f[:-5] for f in reader.fieldnames if f.endswith("_mean")]
        rows = []
        for raw in reader:
            row = {}
            for key, value in raw.items():
                try:
                    row[key] = float(value) if value not in ("", None) else float("nan")
                except ValueError:
                    raise DataError(f"{path}: bad value {value!r} in column {key}")
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows, algorithms


def cmd_report(args) -> int:
    from .figures import render_cost_traces, render_landscape_heatmaps

    wrote = []
    if args.landscape:
        rows, algorithms = _read_landscape_csv(args.landscape)
        wrote += render_landscape_heatmaps(rows, algorithms, args.outdir)
        for alg in algorithms:
            means = [r[f"{alg}_mean"] for r in rows]
            print(f"{alg}: mean error over grid "
                  f"{np.nanmean(means):.2f}% (worst cell {np.nanmax(means):.2f}%)")
    if args.run:
        with open(args.run) as fh:
            payload = json.load(fh)
        traces = {
            f"trial {t['trial']}": t["cost_trace"]
            for t in payload.get("trials", [])
            if "cost_trace" in t
        }
        if traces:
            os.makedirs(args.outdir, exist_ok=True)
            wrote.append(render_cost_traces(
                traces, os.path.join(args.outdir, "cost_traces.png")
            ))
        else:
            print("no cost traces in report (ensemble runs record labels only)")
    if not args.landscape and not args.run:
        raise ConfigError("report needs --landscape and/or --run")
    for path in wrote:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetsub",
        description="Heteroscedastic subspace clustering experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic union-of-subspaces dataset")
    _add_experiment_flags(p)
    _add_synth_flags(p)
    p.add_argument("--out", required=True, help="output matrix CSV")
    p.add_argument("--labels-out", help="ground-truth label file")
    p.add_argument("--groups-out", help="noise-group file (1 = low noise)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("cluster", help="cluster a matrix or synthetic data")
    _add_experiment_flags(p)
    _add_synth_flags(p)
    p.add_argument("--input", help="input matrix CSV (one sample per column)")
    p.add_argument("--truth", help="ground-truth labels for error reporting")
    p.add_argument("--labels-out", help="write predicted labels here")
    p.add_argument("--report-out", help="write the JSON run report here")
    p.add_argument("--q-grid", help="comma list of q candidates; pick the best "
                   "by mean error on held-out training repetitions")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("rank", help="estimate matrix rank")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=("eigengap", "flippa"), default="flippa")
    p.add_argument("--flippa-trials", type=int)
    p.add_argument("--flippa-percentile", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the estimate as JSON")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="score predicted labels against truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--clusters", type=int)
    p.add_argument("--out", help="write metrics as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("landscape", help="sweep the heteroscedastic grid")
    _add_experiment_flags(p)
    _add_synth_flags(p)
    p.add_argument("--nu-ratios", required=True, help="comma list of nu2/nu1")
    p.add_argument("--n-ratios", required=True, help="comma list of N2/N1")
    p.add_argument("--algorithms", default="alpcahus,ekss")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("report", help="render figures from run artifacts")
    p.add_argument("--landscape", help="landscape CSV to render as heatmaps")
    p.add_argument("--run", help="JSON run report with cost traces")
    p.add_argument("--outdir", default=".", help="directory for figures")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # e.g. mismatched label vectors handed to the metrics
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
