"""Finite-size pressure of a pair of laws and the diagnostics built on it.

    q_l(alpha) = ln sum_{a in A^l} P_X[a]^(-alpha) P_Y[a]

``q_l(alpha) / l`` at the largest affordable ``l`` is reported as the working
estimate of the limsup pressure, together with the drift between the two
largest lengths.  It is an estimate, not the limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import AlphabetMismatchError, BudgetExceededError, StructuralError
from .hmm import HmmModel, iter_log_marginals

ENUMERATION_BUDGET = 2**24
NONDEGENERACY_TOL = 1e-6


def _check_pair(model_x: HmmModel, model_y: HmmModel, ell: int) -> None:
    if model_x.alphabet != model_y.alphabet:
        raise AlphabetMismatchError("models are defined over different alphabets")
    if ell < 1:
        raise StructuralError("string length must be at least 1")
    size = model_x.alphabet.size**ell
    if size > ENUMERATION_BUDGET:
        raise BudgetExceededError(
            f"|A|^l = {model_x.alphabet.size}^{ell} exceeds the enumeration budget of 2^24 strings"
        )


def _tilted_terms(lx: np.ndarray, ly: np.ndarray, alpha: float) -> np.ndarray:
    """Log of ``P_X^(-alpha) P_Y`` per string, with the zero-probability cases made explicit."""
    out = np.full(lx.shape, -np.inf)
    live = np.isfinite(ly)
    both = live & np.isfinite(lx)
    out[both] = -alpha * lx[both] + ly[both]
    x_zero = live & ~np.isfinite(lx)
    if np.any(x_zero):
        if alpha > 0:
            out[x_zero] = np.inf
        elif alpha == 0:
            out[x_zero] = ly[x_zero]
    return out


def q_ell_many(model_x: HmmModel, model_y: HmmModel, ell: int, alphas: Sequence[float]) -> np.ndarray:
    """``q_l`` at several alphas from a single enumeration of ``A^l``.

    Chunks are reduced by log-sum-exp and combined in lexicographic order, so
    results do not depend on chunking.
    """
    _check_pair(model_x, model_y, ell)
    alphas = [float(a) for a in alphas]
    acc = np.full(len(alphas), -np.inf)
    chunks = zip(iter_log_marginals(model_x, ell), iter_log_marginals(model_y, ell))
    for lx, ly in chunks:
        for i, alpha in enumerate(alphas):
            terms = _tilted_terms(lx, ly, alpha)
            if np.any(terms == np.inf):
                acc[i] = np.inf
            elif acc[i] != np.inf:
                acc[i] = np.logaddexp(acc[i], logsumexp(terms))
    return acc


def q_ell(model_x: HmmModel, model_y: HmmModel, ell: int, alpha: float) -> float:
    return float(q_ell_many(model_x, model_y, ell, [alpha])[0])


@dataclass
class PressureRow:
    alpha: float
    lengths: tuple[int, ...]
    values: tuple[float, ...]
    per_symbol: tuple[float, ...]
    drift: float

    @property
    def estimate(self) -> float:
        """Largest-length per-symbol value."""
        return self.per_symbol[-1]


@dataclass
class PressureCurve:
    alphas: tuple[float, ...]
    lengths: tuple[int, ...]
    values: np.ndarray  # shape (len(alphas), len(lengths))

    @property
    def per_symbol(self) -> np.ndarray:
        return self.values / np.asarray(self.lengths, dtype=float)[None, :]

    def rows(self):
        """(alpha, ell, q, q_per_symbol) tuples in alpha-major order."""
        per = self.per_symbol
        for i, a in enumerate(self.alphas):
            for j, ell in enumerate(self.lengths):
                yield a, ell, float(self.values[i, j]), float(per[i, j])


def pressure_curve(model_x: HmmModel, model_y: HmmModel, alphas: Sequence[float], lengths: Sequence[int]) -> PressureCurve:
    lengths = tuple(int(l) for l in lengths)
    alphas = tuple(float(a) for a in alphas)
    values = np.empty((len(alphas), len(lengths)))
    for j, ell in enumerate(lengths):
        values[:, j] = q_ell_many(model_x, model_y, ell, alphas)
    return PressureCurve(alphas, lengths, values)


def pressure_per_symbol(model_x: HmmModel, model_y: HmmModel, alpha: float, lengths: Sequence[int]) -> PressureRow:
    """``q_l(alpha)/l`` for each length plus the drift ``|q_L/L - q_{L-1}/(L-1)|`` at the largest ``L``."""
    lengths = tuple(sorted(int(l) for l in lengths))
    if not lengths:
        raise StructuralError("need at least one length")
    values = [q_ell(model_x, model_y, ell, alpha) for ell in lengths]
    per = [v / ell for v, ell in zip(values, lengths)]
    top = lengths[-1]
    if top >= 2:
        prev = per[-2] if len(lengths) >= 2 and lengths[-2] == top - 1 else q_ell(model_x, model_y, top - 1, alpha) / (top - 1)
        drift = abs(per[-1] - prev)
    else:
        drift = math.nan
    return PressureRow(float(alpha), lengths, tuple(values), tuple(per), drift)


def nondegeneracy(model_x: HmmModel, model_y: HmmModel, ell: int) -> tuple[float, str]:
    """``q_l(-1)/l`` and the verdict ``"nondegenerate"`` iff it is below ``-1e-6``."""
    value = q_ell(model_x, model_y, ell, -1.0) / ell
    verdict = "nondegenerate" if value < -NONDEGENERACY_TOL else "degenerate"
    return value, verdict


def left_derivative_estimate(model_x: HmmModel, model_y: HmmModel, h: float = 0.01, ell: int = 16) -> float:
    """Secant ``(q_l(0) - q_l(-h)) / (h l)`` as a proxy for the left derivative at 0.

    Two error sources: truncation at finite ``l`` (O(1/l) boundary terms)
    and the finite secant step ``h`` (biased low by convexity).
    """
    if not 0 < h <= 1:
        raise StructuralError("secant step h must lie in (0, 1]")
    return -q_ell(model_x, model_y, ell, -h) / (h * ell)


def markov_pressure(P_x, P_y, alpha: float, tol: float = 1e-14, max_iter: int = 100_000) -> float:
    """``ln`` of the spectral radius of ``M_st = P_Y(s,t) P_X(s,t)^(-alpha)`` by power iteration.

    For observed Markov chains this is the limit of ``q_l(alpha)/l``.  Power
    iteration runs on ``I + M`` so periodic chains converge too.
    """
    P_x = np.asarray(P_x, dtype=float)
    P_y = np.asarray(P_y, dtype=float)
    if P_x.shape != P_y.shape:
        raise StructuralError("transition matrices differ in shape")
    M = np.zeros_like(P_y)
    live = P_y > 0
    pos = live & (P_x > 0)
    M[pos] = P_y[pos] * P_x[pos] ** (-alpha)
    if np.any(live & (P_x == 0)):
        if alpha > 0:
            return math.inf
        if alpha == 0:
            M[live & (P_x == 0)] = P_y[live & (P_x == 0)]
    B = M + np.eye(M.shape[0])
    v = np.ones(M.shape[0]) / M.shape[0]
    rho = 0.0
    for _ in range(max_iter):
        w = B @ v
        new_rho = float(w.sum() / v.sum())
        v = w / w.sum()
        if abs(new_rho - rho) <= tol * new_rho:
            rho = new_rho
            break
        rho = new_rho
    return math.log(rho - 1.0)
