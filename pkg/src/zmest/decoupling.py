"""Empirical checks of the decoupling inequalities at a finite horizon.

    upper:  P[ab]  <= e^k P[a] P[b]                      for all a, b
    lower:  P[a xi b] >= e^-k P[a] P[b]  for some |xi| <= tau, for all a, b

Every pair with ``|a| + |b| <= L`` (both nonempty) and ``P[a] P[b] > 0`` is
enumerated.  A fitted certificate is evidence at horizon ``L`` only, not a
proof that the inequalities hold for all lengths.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import BudgetExceededError, ContractViolation, FitError, StructuralError
from .hmm import HmmModel, derive_seed, log_marginal, log_marginal_table, sample
from .parsers import waiting_time
from .symbols import SymbolSequence

SLACK = 1e-9
K_RESOLUTION = 1e-3
ENUMERATION_BUDGET = 2**24


def _tables(model: HmmModel, max_len: int) -> list[np.ndarray]:
    if model.alphabet.size**max_len > ENUMERATION_BUDGET:
        raise BudgetExceededError(
            f"|A|^{max_len} = {model.alphabet.size}^{max_len} exceeds the enumeration budget of 2^24 strings"
        )
    return [np.zeros(1)] + [log_marginal_table(model, n) for n in range(1, max_len + 1)]


def _decode(code: int, length: int, model: HmmModel) -> str:
    A = model.alphabet.size
    digits = []
    for _ in range(length):
        code, d = divmod(code, A)
        digits.append(d)
    return SymbolSequence(model.alphabet, digits[::-1]).to_text()


@dataclass
class CheckResult:
    ok: bool
    worst: float
    witness: tuple[str, str] | None


def _upper_stat(LP, A, L):
    worst, witness = -math.inf, None
    for m in range(1, L):
        for n in range(1, L - m + 1):
            base = LP[m][:, None] + LP[n][None, :]
            with np.errstate(invalid="ignore"):
                ratio = LP[m + n].reshape(A**m, A**n) - base
            ratio[~np.isfinite(base)] = -np.inf
            i = int(np.argmax(ratio))
            if ratio.flat[i] > worst:
                worst = float(ratio.flat[i])
                witness = (m, i // A**n, n, i % A**n)
    return worst, witness


def _lower_stat(LP, A, L, tau):
    worst, witness = math.inf, None
    for m in range(1, L):
        for n in range(1, L - m + 1):
            best = np.full((A**m, A**n), -np.inf)
            for j in range(tau + 1):
                joined = LP[m + j + n].reshape(A**m, A**j, A**n).max(axis=1)
                np.maximum(best, joined, out=best)
            base = LP[m][:, None] + LP[n][None, :]
            with np.errstate(invalid="ignore"):
                gap = best - base
            gap[~np.isfinite(base)] = np.inf
            i = int(np.argmin(gap))
            if gap.flat[i] < worst:
                worst = float(gap.flat[i])
                witness = (m, i // A**n, n, i % A**n)
    return worst, witness


def _witness_strings(model, w):
    if w is None:
        return None
    m, a, n, b = w
    return _decode(a, m, model), _decode(b, n, model)


def _check_horizon(L: int) -> None:
    if L < 2:
        raise StructuralError("horizon L must be at least 2")


def check_upper(model: HmmModel, k: float, L: int) -> CheckResult:
    """Largest ``ln(P[ab] / (P[a]P[b]))`` over the horizon, and whether it is ``<= k``."""
    _check_horizon(L)
    LP = _tables(model, L)
    worst, w = _upper_stat(LP, model.alphabet.size, L)
    return CheckResult(worst <= k + SLACK, worst, _witness_strings(model, w))


def check_lower(model: HmmModel, k: float, tau: int, L: int) -> CheckResult:
    """Smallest ``max_xi ln(P[a xi b] / (P[a]P[b]))`` over the horizon, and whether it is ``>= -k``."""
    _check_horizon(L)
    if tau < 0:
        raise StructuralError("tau must be nonnegative")
    LP = _tables(model, L + tau)
    worst, w = _lower_stat(LP, model.alphabet.size, L, tau)
    return CheckResult(worst >= -k - SLACK, worst, _witness_strings(model, w))


@dataclass
class DecouplingCertificate:
    k: float
    tau: int
    L: int
    upper_ok: bool
    lower_ok: bool
    worst_upper_ratio: float
    worst_lower_gap: float
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _round_up(value: float) -> float:
    steps = math.ceil((value - SLACK) / K_RESOLUTION)
    return round(max(0, steps) * K_RESOLUTION, 12)


def fit_constants(model: HmmModel, L: int, tau_max: int = 4) -> DecouplingCertificate:
    """Smallest ``tau <= tau_max``, then smallest ``k`` on a 1e-3 grid, passing both checks at horizon ``L``."""
    _check_horizon(L)
    model.require_valid()
    LP = _tables(model, L + tau_max)
    A = model.alphabet.size
    upper, _ = _upper_stat(LP, A, L)
    best_gap = -math.inf
    for tau in range(tau_max + 1):
        gap, _ = _lower_stat(LP, A, L, tau)
        best_gap = max(best_gap, gap)
        if math.isfinite(gap):
            k = _round_up(max(upper, -gap, 0.0))
            return DecouplingCertificate(
                k=k,
                tau=tau,
                L=L,
                upper_ok=upper <= k + SLACK,
                lower_ok=gap >= -k - SLACK,
                worst_upper_ratio=upper,
                worst_lower_gap=gap,
                note=f"certificate at horizon L={L}",
            )
    raise FitError(
        f"no tau <= {tau_max} satisfies the lower bound at horizon L={L} "
        f"(best gap {best_gap}, upper ratio {upper})",
        best={"tau": tau_max, "worst_upper_ratio": upper, "worst_lower_gap": best_gap},
    )


@dataclass
class TailRow:
    r: int
    survival: float
    bound: float
    sigma: float
    flagged: bool


def tail_bound(p_a: float, k: float, tau: int, length: int, r: int) -> float:
    """``(1 - e^-k P[a]) ^ floor((r-1) / (|a| + tau))``."""
    return (1.0 - math.exp(-k) * p_a) ** ((r - 1) // (length + tau))


def waiting_time_tail_test(
    model_x: HmmModel,
    a: SymbolSequence,
    k: float,
    tau: int,
    r_grid: Sequence[int],
    trials: int,
    seed: int,
) -> list[TailRow]:
    """Monte Carlo survival ``Prob{W(a, X) > r}`` against the decoupling tail bound.

    Trial ``t`` samples ``X`` with seed ``derive_seed(seed, t)``.  A row is
    flagged when the empirical survival exceeds the bound by more than three
    binomial standard errors; only upward violations count.
    """
    r_grid = sorted(int(r) for r in r_grid)
    if not r_grid or r_grid[0] < 1:
        raise StructuralError("r_grid must contain positive integers")
    if trials < 1:
        raise StructuralError("trials must be positive")
    lp = log_marginal(model_x, a)
    if lp == -math.inf:
        raise StructuralError("P_X[a] = 0: the tail bound is degenerate")
    p_a = math.exp(lp)
    length = r_grid[-1] + len(a)
    waits = []
    for t in range(trials):
        w = waiting_time(a, sample(model_x, length, derive_seed(seed, t)))
        waits.append(math.inf if w is None else w)
    waits = np.asarray(waits, dtype=float)
    rows = []
    for r in r_grid:
        bound = tail_bound(p_a, k, tau, len(a), r)
        surv = float(np.mean(waits > r))
        sigma = math.sqrt(bound * (1.0 - bound) / trials)
        rows.append(TailRow(r, surv, bound, sigma, surv > bound + 3.0 * sigma))
    bounds = [row.bound for row in rows]
    if any(b2 > b1 for b1, b2 in zip(bounds, bounds[1:])):
        raise ContractViolation("tail bound must be nonincreasing in r")
    return rows
