"""Convergence / RMSE experiment over many independent realizations.

Realization ``r`` (1-based) uses seed ``base + r``.  The reference cross
entropy is one long Monte Carlo evaluation of ``-ln P_X[Y_1^n] / n`` drawn
from a dedicated child seed of ``base`` and shared by every realization.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import StructuralError
from .estimators import ESTIMATORS, PrefixEvaluation, check_grid, evaluate_prefixes, sample_pair
from .hmm import HmmModel, cross_entropy_mc, derive_seed
from .svgplot import Plot

REFERENCE_KEY = 2**31 - 1
DEFAULT_GRID = tuple(2**k for k in range(10, 18))

TRACE_HEADER = ["estimator", "N", "value"]
RMSE_HEADER = ["estimator", "N", "realizations", "mean", "rmse", "reference"]
WORDLEN_HEADER = ["N", "mean_max_word_length", "mean_ratio_to_lnN", "max_ratio_to_lnN"]
REFERENCE_HEADER = ["quantity", "n", "value"]


def fmt(v: float) -> str:
    """12 significant digits; ``inf``/``-inf``/``nan`` spelled out."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(float(v), ".12g")


@dataclass
class ExperimentConfig:
    model_x: HmmModel
    model_y: HmmModel
    grid: tuple[int, ...] = DEFAULT_GRID
    realizations: int = 32
    reference_n: int = 2**20
    estimators: tuple[str, ...] = ("mZM", "ZM", "LM")
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        self.grid = check_grid(self.grid)
        self.estimators = tuple(self.estimators)
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise StructuralError(f"unknown estimator(s): {sorted(unknown)}")
        if self.realizations < 1:
            raise StructuralError("realizations must be at least 1")
        if self.reference_n < self.grid[-1]:
            raise StructuralError("reference_n must be at least max(grid)")
        if self.model_x.alphabet != self.model_y.alphabet:
            raise StructuralError("model_x and model_y use different alphabets")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    references: dict[str, float]
    cross_entropy_ref: float
    entropy_ref: float | None
    runs: list[PrefixEvaluation] = field(default_factory=list)

    def estimates(self, estimator: str) -> np.ndarray:
        """Array of shape (realizations, len(grid))."""
        return np.array([run.values[estimator] for run in self.runs], dtype=float)

    def rmse(self, estimator: str) -> np.ndarray:
        # inf - inf (both sides infinite) yields nan, reported as such
        with np.errstate(invalid="ignore"):
            err = self.estimates(estimator) - self.references[estimator]
            return np.sqrt(np.mean(err**2, axis=0))

    def mean(self, estimator: str) -> np.ndarray:
        return np.mean(self.estimates(estimator), axis=0)

    def word_ratios(self) -> np.ndarray:
        """Max mZM word length over ``ln N``, shape (realizations, len(grid))."""
        words = np.array([run.max_mzm_word for run in self.runs], dtype=float)
        return words / np.log(np.asarray(self.config.grid, dtype=float))[None, :]


def _run_one(args) -> PrefixEvaluation:
    model_y, model_x, grid, estimators, seed = args
    y, x = sample_pair(model_y, model_x, grid[-1], seed)
    return evaluate_prefixes(y, x, grid, estimators)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    ref_seed = derive_seed(config.seed, REFERENCE_KEY)
    hc = cross_entropy_mc(config.model_x, config.model_y, config.reference_n, ref_seed)
    h = None
    if {"LZ78", "KL"} & set(config.estimators):
        # same seed, hence the same Y realization
        h = cross_entropy_mc(config.model_y, config.model_y, config.reference_n, ref_seed)
    refs = {}
    for e in config.estimators:
        refs[e] = h if e == "LZ78" else (hc - h if e == "KL" else hc)
    tasks = [
        (config.model_y, config.model_x, config.grid, config.estimators, config.seed + r)
        for r in range(1, config.realizations + 1)
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            runs = list(pool.map(_run_one, tasks))
    else:
        runs = [_run_one(t) for t in tasks]
    return ExperimentResult(config, refs, hc, h, runs)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, int, np.floating, np.integer)) else v for v in row])
    return buf.getvalue()


def trace_csv(result: ExperimentResult) -> str:
    first = result.runs[0]
    rows = [
        (e, N, float(v))
        for e in result.config.estimators
        for N, v in zip(result.config.grid, first.values[e])
    ]
    return _csv(TRACE_HEADER, rows)


def rmse_csv(result: ExperimentResult) -> str:
    cfg = result.config
    rows = []
    for e in cfg.estimators:
        rmse, mean = result.rmse(e), result.mean(e)
        for i, N in enumerate(cfg.grid):
            rows.append((e, N, cfg.realizations, float(mean[i]), float(rmse[i]), float(result.references[e])))
    return _csv(RMSE_HEADER, rows)


def wordlen_csv(result: ExperimentResult) -> str:
    ratios = result.word_ratios()
    words = np.array([run.max_mzm_word for run in result.runs], dtype=float)
    rows = [
        (N, float(words[:, i].mean()), float(ratios[:, i].mean()), float(ratios[:, i].max()))
        for i, N in enumerate(result.config.grid)
    ]
    return _csv(WORDLEN_HEADER, rows)


def reference_csv(result: ExperimentResult) -> str:
    n = result.config.reference_n
    rows = [("cross_entropy", n, result.cross_entropy_ref)]
    if result.entropy_ref is not None:
        rows.append(("entropy", n, result.entropy_ref))
    return _csv(REFERENCE_HEADER, rows)


def trace_plot(result: ExperimentResult) -> Plot:
    plot = Plot("Single-realization estimates", "N", "nats / symbol", xlog=True)
    first = result.runs[0]
    for e in result.config.estimators:
        plot.add(e, result.config.grid, first.values[e])
    plot.hlines.append((f"reference {result.cross_entropy_ref:.4f}", result.cross_entropy_ref))
    return plot


def rmse_plot(result: ExperimentResult) -> Plot:
    plot = Plot(f"RMSE over {result.config.realizations} realizations", "N", "RMSE", xlog=True, ylog=True)
    for e in result.config.estimators:
        plot.add(e, result.config.grid, result.rmse(e))
    return plot


def write_outputs(result: ExperimentResult, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "trace.csv": trace_csv(result),
        "rmse.csv": rmse_csv(result),
        "wordlen.csv": wordlen_csv(result),
        "reference.csv": reference_csv(result),
        "trace.svg": trace_plot(result).render(),
        "rmse.svg": rmse_plot(result).render(),
    }
    paths = {}
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        paths[name] = path
    return paths
