"""Entropy, cross entropy and KL divergence rate estimators (nats per symbol).

``math.inf`` is the sentinel for an infinite estimate.  No estimator is
bias-corrected, smoothed or clamped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import StructuralError
from .hmm import HmmModel, derive_seed, sample
from .index import SubstringIndex, build_index
from .parsers import longest_match, lz78_parse, mzm_parse, zm_parse
from .symbols import SymbolSequence

ESTIMATORS = ("mZM", "ZM", "LM", "LZ78", "KL")

# Child-seed keys used to split one realization seed into the Y and X streams.
STREAM_Y = 0
STREAM_X = 1


def _check_n(N: int) -> None:
    if N < 2:
        raise StructuralError(f"estimators need N >= 2, got N={N}")


def mzm_rate(c: int, N: int) -> float:
    """``c ln N / (N - c)``; infinite when every symbol starts a word."""
    _check_n(N)
    if c >= N:
        return math.inf
    return c * math.log(N) / (N - c)


def zm_rate(c: int, N: int) -> float:
    _check_n(N)
    return c * math.log(N) / N


def lm_rate(match_length: int, N: int) -> float:
    _check_n(N)
    if match_length == 0:
        return math.inf
    return math.log(N) / match_length


def lz78_rate(c: int, N: int) -> float:
    """``c ln c / N``, the compression-ratio form of the LZ78 entropy estimate."""
    _check_n(N)
    return c * math.log(c) / N


def kl_rate(cross: float, entropy: float) -> float:
    if math.isinf(cross):
        return math.inf
    return cross - entropy


def q_mzm(y: SymbolSequence, x: SymbolSequence, index: SubstringIndex | None = None) -> float:
    _check_n(len(y))
    return mzm_rate(mzm_parse(y, x, index).c, len(y))


def q_zm(y: SymbolSequence, x: SymbolSequence, index: SubstringIndex | None = None) -> float:
    _check_n(len(y))
    return zm_rate(zm_parse(y, x, index).c, len(y))


def q_lm(y: SymbolSequence, x: SymbolSequence, N: int | None = None, index: SubstringIndex | None = None) -> float:
    """``ln N / Lambda_N(y, x)``; ``N`` defaults to ``|y|`` and the index covers ``x_1^N``."""
    N = len(y) if N is None else N
    _check_n(N)
    return lm_rate(longest_match(y, x, N, index), N)


def h_lz78(y: SymbolSequence) -> float:
    _check_n(len(y))
    return lz78_rate(lz78_parse(y).c, len(y))


def d_kl(y: SymbolSequence, x: SymbolSequence) -> float:
    """mZM cross entropy minus LZ78 entropy of ``y``.  May be negative at finite N."""
    return kl_rate(q_mzm(y, x), h_lz78(y))


@dataclass(frozen=True)
class EstimateTrace:
    estimator: str
    grid: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise StructuralError("grid and values differ in length")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise StructuralError("grid must be strictly increasing")


@dataclass
class PrefixEvaluation:
    """Estimates at each prefix length of one realization pair."""

    grid: tuple[int, ...]
    values: dict[str, list[float]]
    max_mzm_word: list[int]


def check_grid(grid: Iterable[int]) -> tuple[int, ...]:
    grid = tuple(int(n) for n in grid)
    if not grid:
        raise StructuralError("grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise StructuralError("grid must be strictly increasing")
    if grid[0] < 2:
        raise StructuralError("grid lengths must be at least 2")
    return grid


def evaluate_prefixes(
    y: SymbolSequence, x: SymbolSequence, grid: Sequence[int], estimators: Sequence[str] = ESTIMATORS
) -> PrefixEvaluation:
    """Evaluate estimators on the prefixes ``(y_1^N, x_1^N)`` for every ``N`` in ``grid``.

    One index, at most one mZM parse and one ZM parse per ``N``.
    """
    grid = check_grid(grid)
    unknown = set(estimators) - set(ESTIMATORS)
    if unknown:
        raise StructuralError(f"unknown estimator(s): {sorted(unknown)}")
    if grid[-1] > min(len(y), len(x)):
        raise StructuralError("grid exceeds the realization length")
    values: dict[str, list[float]] = {e: [] for e in estimators}
    max_word = []
    for N in grid:
        yN, xN = y[:N], x[:N]
        idx = build_index(xN)
        # always parsed: the max word length is tracked for every run
        pm = mzm_parse(yN, xN, idx)
        max_word.append(pm.max_word_length())
        q = mzm_rate(pm.c, N)
        h = lz78_rate(lz78_parse(yN).c, N) if {"LZ78", "KL"} & set(estimators) else None
        for e in estimators:
            if e == "mZM":
                values[e].append(q)
            elif e == "ZM":
                values[e].append(zm_rate(zm_parse(yN, xN, idx).c, N))
            elif e == "LM":
                values[e].append(lm_rate(longest_match(yN, xN, N, idx), N))
            elif e == "LZ78":
                values[e].append(h)
            elif e == "KL":
                values[e].append(kl_rate(q, h))
    return PrefixEvaluation(grid, values, max_word)


def sample_pair(model_y: HmmModel, model_x: HmmModel, N: int, seed: int) -> tuple[SymbolSequence, SymbolSequence]:
    """Independent realizations ``(Y_1^N, X_1^N)`` from one realization seed."""
    y = sample(model_y, N, derive_seed(seed, STREAM_Y))
    x = sample(model_x, N, derive_seed(seed, STREAM_X))
    return y, x


def trace(model_y: HmmModel, model_x: HmmModel, grid: Sequence[int], estimator: str, seed: int) -> EstimateTrace:
    """Single-realization convergence trace: one pair of length ``max(grid)``, evaluated on prefixes."""
    grid = check_grid(grid)
    y, x = sample_pair(model_y, model_x, grid[-1], seed)
    ev = evaluate_prefixes(y, x, grid, [estimator])
    return EstimateTrace(estimator, grid, tuple(ev.values[estimator]))
