"""Experiment configuration: defaults, validation, and INI-style config files.

Config files are flat key-value text parsed with :mod:`configparser`, with one
section per sub-config::

    [experiment]
    algorithm = alpcahus
    clusters = 2
    subspace_dim = 3        ; scalar, comma list, or "auto"
    base_clusterings = 32
    seed = 0
    trials = 20

    [synth]
    ambient_dim = 100
    subspace_dim = 3
    n1 = 6
    n2 = 6
    nu1 = 0.1
    nu2 = 0.1

    [data]
    matrix = samples.csv
    labels = labels.txt
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, asdict

import numpy as np

from .synth import SynthConfig

__all__ = ["ConfigError", "ExperimentConfig", "ALGORITHMS"]

ALGORITHMS = ("alpcahus", "kss", "ekss", "tsc", "kmeans", "oracle")

SEED_ENV_VAR = "HETSUB_SEED"


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (CLI exit code 2)."""


@dataclass
class ExperimentConfig:
    algorithm: str = "alpcahus"
    K: int = 2
    d_hat: object = 3  # int, per-cluster list of ints, or "auto"
    q: int | None = None  # None -> max working rank
    B: int = 1
    T1: int = 5
    T2: int | None = None  # None -> 3 if B > 1 else 50
    alpha_noise: float = 1e-6
    flippa_percentile: float = 95.0
    flippa_trials: int = 10
    weighting: str = "inverse"
    init: str = "tips"  # initialization for B = 1 trials
    seed: int | None = None
    trials: int = 1
    synth: SynthConfig | None = None
    input_matrix: str | None = None
    input_labels: str | None = None
    adaptive_rank: bool = False
    _resolved_ranks: list = field(default=None, repr=False, compare=False)

    def validate(self) -> "ExperimentConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.K < 1:
            raise ConfigError("clusters must be >= 1")
        if self.B < 1:
            raise ConfigError("base_clusterings must be >= 1")
        if self.T1 < 1:
            raise ConfigError("t1 must be >= 1")
        if self.T2 is None:
            self.T2 = 3 if self.B > 1 else 50
        if self.T2 < 1:
            raise ConfigError("t2 must be >= 1")
        if self.alpha_noise <= 0:
            raise ConfigError("alpha_noise must be positive")
        if not 0 < self.flippa_percentile <= 100:
            raise ConfigError("flippa_percentile must lie in (0, 100]")
        if self.weighting not in ("inverse", "literal"):
            raise ConfigError("weighting must be 'inverse' or 'literal'")
        if self.init not in ("random", "tips"):
            raise ConfigError("init must be 'random' or 'tips'")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if isinstance(self.d_hat, str):
            if self.d_hat != "auto":
                raise ConfigError(f"subspace_dim must be int, list, or 'auto'")
            if self.algorithm in ("tsc", "kmeans"):
                raise ConfigError(f"subspace_dim='auto' not supported for {self.algorithm}")
            self.adaptive_rank = True
        elif isinstance(self.d_hat, (list, tuple)):
            self.d_hat = [int(d) for d in self.d_hat]
            if len(self.d_hat) != self.K:
                raise ConfigError(f"need {self.K} subspace dims, got {len(self.d_hat)}")
            if any(d < 1 for d in self.d_hat):
                raise ConfigError("subspace dims must be positive")
        else:
            self.d_hat = int(self.d_hat)
            if self.d_hat < 1:
                raise ConfigError("subspace_dim must be positive")
        if self.q is not None and self.q < 1:
            raise ConfigError("q must be >= 1")
        if self.seed is None:
            env = os.environ.get(SEED_ENV_VAR)
            if env is not None:
                try:
                    self.seed = int(env)
                except ValueError as exc:
                    raise ConfigError(f"{SEED_ENV_VAR} must be an integer") from exc
            else:
                self.seed = 0
        if self.synth is not None:
            try:
                self.synth.validate()
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        return self

    def resolve_ranks(self, Y: np.ndarray) -> list:
        """Working ranks per cluster. 'auto' starts over-parameterized from a
        sign-flip estimate on the pooled data and enables adaptive shrinking."""
        if isinstance(self.d_hat, str):  # "auto"
            from .rank import flippa_rank

            rng = np.random.default_rng((self.seed or 0) ^ 0x5EED)
            est = flippa_rank(
                Y, trials=self.flippa_trials,
                percentile=self.flippa_percentile, rng=rng,
            )
            d0 = max(1, min(est.d_hat, min(Y.shape) - 1))
            ranks = [d0] * self.K
        elif isinstance(self.d_hat, list):
            ranks = list(self.d_hat)
        else:
            ranks = [self.d_hat] * self.K
        self._resolved_ranks = ranks
        return ranks

    def resolve_q(self) -> int:
        if self.q is not None:
            return self.q
        ranks = self._resolved_ranks
        if ranks is None:
            if isinstance(self.d_hat, list):
                ranks = self.d_hat
            elif isinstance(self.d_hat, int):
                ranks = [self.d_hat]
            else:
                raise ConfigError("q unresolved: call resolve_ranks first with d_hat='auto'")
        return max(ranks)

    def resolved_dict(self) -> dict:
        out = asdict(self)
        out.pop("_resolved_ranks", None)
        if self.synth is not None:
            out["synth"] = asdict(self.synth)
        return out


def _get(parser, section, key, conv, default):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _parse_d_hat(raw: str):
    raw = raw.strip()
    if raw == "auto":
        return "auto"
    if "," in raw:
        return [int(tok) for tok in raw.split(",")]
    return int(raw)


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def load_config(path: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    cfg = ExperimentConfig()
    if parser.has_section("experiment"):
        s = "experiment"
        cfg.algorithm = _get(parser, s, "algorithm", str, cfg.algorithm)
        cfg.K = _get(parser, s, "clusters", int, cfg.K)
        cfg.d_hat = _get(parser, s, "subspace_dim", _parse_d_hat, cfg.d_hat)
        cfg.q = _get(parser, s, "q", int, cfg.q)
        cfg.B = _get(parser, s, "base_clusterings", int, cfg.B)
        cfg.T1 = _get(parser, s, "t1", int, cfg.T1)
        cfg.T2 = _get(parser, s, "t2", int, cfg.T2)
        cfg.alpha_noise = _get(parser, s, "alpha_noise", float, cfg.alpha_noise)
        cfg.flippa_percentile = _get(parser, s, "flippa_percentile", float, cfg.flippa_percentile)
        cfg.flippa_trials = _get(parser, s, "flippa_trials", int, cfg.flippa_trials)
        cfg.weighting = _get(parser, s, "weighting", str, cfg.weighting)
        cfg.init = _get(parser, s, "init", str, cfg.init)
        cfg.seed = _get(parser, s, "seed", int, cfg.seed)
        cfg.trials = _get(parser, s, "trials", int, cfg.trials)
        cfg.adaptive_rank = _get(parser, s, "adaptive_rank", _parse_bool, cfg.adaptive_rank)
    if parser.has_section("synth"):
        s = "synth"
        sc = SynthConfig()
        sc.D = _get(parser, s, "ambient_dim", int, sc.D)
        sc.K = _get(parser, s, "clusters", int, cfg.K)
        sc.d = _get(parser, s, "subspace_dim", int, sc.d)
        sc.N1 = _get(parser, s, "n1", int, sc.N1)
        sc.N2 = _get(parser, s, "n2", int, sc.N2)
        sc.nu1 = _get(parser, s, "nu1", float, sc.nu1)
        sc.nu2 = _get(parser, s, "nu2", float, sc.nu2)
        cfg.synth = sc
    if parser.has_section("data"):
        cfg.input_matrix = _get(parser, "data", "matrix", str, None)
        cfg.input_labels = _get(parser, "data", "labels", str, None)
    return cfg
