"""Hidden-Markov process models: validation, sampling, marginals, ground truth.

A model is a hidden chain ``(pi, P)`` on a finite state set plus a
row-stochastic emission matrix ``R`` (states x symbols).  The law of the
observed process is

    P[x_1^n] = sum_s pi[s_1] R[s_1, x_1] P[s_1, s_2] R[s_2, x_2] ... R[s_n, x_n].

Randomness
----------
All sampling uses numpy's ``PCG64`` bit generator seeded directly with a
64-bit integer.  PCG64 and ``Generator.random`` are specified bit-for-bit by
numpy, so a ``(model, N, seed)`` triple produces the same sequence on every
platform.  The draw order is fixed: one uniform for the initial state, ``N-1``
uniforms for the transitions, then ``N`` uniforms for the emissions; every
draw is turned into a category by inverse-CDF lookup.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    AlphabetMismatchError,
    InvalidModelError,
    ReducibleChainError,
    StructuralError,
)
from .symbols import Alphabet, SymbolSequence

STOCHASTIC_TOL = 1e-12
STATIONARY_TOL = 1e-10


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministically derive an independent 64-bit seed from ``seed`` and integer keys."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *[int(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))


# --------------------------------------------------------------------------- model


@dataclass(frozen=True, eq=False)
class HmmModel:
    """Stationary hidden-Markov law.  Immutable; only shapes are checked on construction.

    Use :func:`validate` for the stochastic/stationary/irreducible/nondegenerate
    checks; operations that need a valid model call :meth:`require_valid`.
    """

    alphabet: Alphabet
    pi: np.ndarray
    P: np.ndarray
    R: np.ndarray
    name: str = field(default="", compare=False)

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float)
        P = np.array(self.P, dtype=float)
        R = np.array(self.R, dtype=float)
        if pi.ndim != 1 or pi.size == 0:
            raise StructuralError("pi must be a nonempty vector")
        S = pi.size
        if P.shape != (S, S):
            raise StructuralError(f"P must be {S}x{S} to match pi, got shape {P.shape}")
        if R.shape != (S, self.alphabet.size):
            raise StructuralError(
                f"R must be {S}x{self.alphabet.size} (states x symbols), got shape {R.shape}"
            )
        if not (np.all(np.isfinite(pi)) and np.all(np.isfinite(P)) and np.all(np.isfinite(R))):
            raise StructuralError("model entries must be finite numbers")
        for arr in (pi, P, R):
            arr.flags.writeable = False
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "R", R)

    @property
    def state_count(self) -> int:
        return self.pi.size

    @classmethod
    def iid(cls, probs, alphabet: Alphabet | None = None, name: str = "") -> "HmmModel":
        """Single hidden state emitting i.i.d. symbols with the given distribution."""
        probs = np.asarray(probs, dtype=float)
        alphabet = alphabet or Alphabet(tuple(str(i) for i in range(probs.size)))
        return cls(alphabet, [1.0], [[1.0]], [probs], name=name)

    @classmethod
    def markov(cls, P, alphabet: Alphabet | None = None, name: str = "") -> "HmmModel":
        """Observed Markov chain (``R`` is the identity, ``pi`` the stationary law)."""
        P = np.asarray(P, dtype=float)
        alphabet = alphabet or Alphabet(tuple(str(i) for i in range(P.shape[0])))
        return cls(alphabet, stationary_distribution(P), P, np.eye(P.shape[0]), name=name)

    @cached_property
    def report(self) -> "ValidationReport":
        return validate(self)

    def require_valid(self, nondegenerate: bool = False) -> None:
        rep = self.report
        ok = rep.stochastic_ok and rep.stationary_ok and rep.irreducible_ok
        if nondegenerate:
            ok = ok and rep.nondegenerate_ok
        if not ok:
            raise InvalidModelError("invalid model: " + "; ".join(rep.messages), rep)

    def to_dict(self) -> dict:
        return {
            "alphabet": list(self.alphabet.symbols),
            "pi": self.pi.tolist(),
            "P": self.P.tolist(),
            "R": self.R.tolist(),
        }

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<HmmModel{label} |S|={self.state_count} |A|={self.alphabet.size}>"


@dataclass
class ValidationReport:
    stochastic_ok: bool
    stationary_ok: bool
    irreducible_ok: bool
    nondegenerate_ok: bool
    witness_n: int | None
    n_max: int
    messages: list[str]

    @property
    def ok(self) -> bool:
        return self.stochastic_ok and self.stationary_ok and self.irreducible_ok and self.nondegenerate_ok

    def to_dict(self) -> dict:
        return {
            "stochastic_ok": self.stochastic_ok,
            "stationary_ok": self.stationary_ok,
            "irreducible_ok": self.irreducible_ok,
            "nondegenerate_ok": self.nondegenerate_ok,
            "witness_n": self.witness_n,
            "n_max": self.n_max,
            "messages": list(self.messages),
        }


def _check_rows(name: str, M: np.ndarray, messages: list[str]) -> bool:
    ok = True
    for i, row in enumerate(M):
        if np.any(row < 0):
            messages.append(f"{name} row {i} has negative entries")
            ok = False
        total = float(row.sum())
        if abs(total - 1.0) > STOCHASTIC_TOL:
            messages.append(f"{name} row {i} sums to {total:.15g}, expected 1")
            ok = False
    return ok


def _strong_components(P: np.ndarray) -> np.ndarray:
    _, labels = connected_components(P > 0, directed=True, connection="strong")
    return labels


def _first_branching_length(model: HmmModel, s1: int, n_max: int) -> int | None:
    """Smallest n such that >= 2 strings of length n are possible from hidden start s1.

    While only one string is possible its continuation is unique, so tracking the
    set of hidden states compatible with that single string is enough.
    """
    P, R = model.P, model.R
    states = np.zeros(model.state_count, dtype=bool)
    states[s1] = True
    for n in range(1, n_max + 1):
        symbols = np.flatnonzero((R[states] > 0).any(axis=0))
        if symbols.size >= 2:
            return n
        if symbols.size == 0:
            return None
        c = symbols[0]
        emitting = states & (R[:, c] > 0)
        states = (P[emitting] > 0).any(axis=0)
    return None


def validate(model: HmmModel, n_max: int | None = None) -> ValidationReport:
    """Check stochasticity, stationarity, irreducibility and nondegeneracy.

    Nondegeneracy is checked per hidden start state up to ``n_max`` (default
    ``|S| * |A|``); ``witness_n`` is the first length by which every start
    state admits two distinct positive-probability strings.
    """
    messages: list[str] = []
    S, A = model.state_count, model.alphabet.size
    n_max = n_max if n_max is not None else S * A

    stochastic_ok = _check_rows("P", model.P, messages) & _check_rows("R", model.R, messages)
    if np.any(model.pi < 0):
        messages.append("pi has negative entries")
        stochastic_ok = False
    if abs(float(model.pi.sum()) - 1.0) > STOCHASTIC_TOL:
        messages.append(f"pi sums to {float(model.pi.sum()):.15g}, expected 1")
        stochastic_ok = False

    residual = float(np.max(np.abs(model.pi @ model.P - model.pi)))
    stationary_ok = residual <= STATIONARY_TOL
    if not stationary_ok:
        messages.append(f"pi is not stationary: max |pi P - pi| = {residual:.3g}")

    labels = _strong_components(model.P)
    irreducible_ok = bool(np.all(labels == labels[0]))
    if not irreducible_ok:
        others = sorted(int(s) for s in np.flatnonzero(labels != labels[0]))
        messages.append(f"hidden chain is reducible: states {others} not strongly connected to state 0")

    witness = None
    nondegenerate_ok = False
    firsts = []
    for s1 in range(S):
        if model.pi[s1] <= 0:
            continue
        firsts.append(_first_branching_length(model, s1, n_max))
    if firsts and all(f is not None for f in firsts):
        witness = max(firsts)
        nondegenerate_ok = True
    else:
        messages.append(
            f"degenerate: some start state admits a single string for every length up to n_max={n_max}"
        )
    return ValidationReport(
        stochastic_ok, stationary_ok, irreducible_ok, nondegenerate_ok, witness, n_max, messages
    )


def stationary_distribution(P) -> np.ndarray:
    """Unique stationary law of an irreducible row-stochastic matrix.

    Solves ``(P^T - I) pi = 0`` with a normalization row by least squares and
    polishes with power iteration if the residual exceeds 1e-12.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise StructuralError(f"P must be square, got shape {P.shape}")
    S = P.shape[0]
    labels = _strong_components(P)
    if not np.all(labels == labels[0]):
        unreachable = sorted(int(s) for s in np.flatnonzero(labels != labels[0]))
        raise ReducibleChainError(
            f"P is reducible: states {unreachable} are not strongly connected to state 0", unreachable
        )
    A = np.vstack([P.T - np.eye(S), np.ones((1, S))])
    b = np.zeros(S + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    for _ in range(10_000):
        if np.max(np.abs(pi @ P - pi)) <= 1e-12:
            break
        # lazy chain avoids oscillation for periodic P
        pi = 0.5 * (pi + pi @ P)
        pi /= pi.sum()
    return pi


# --------------------------------------------------------------------------- sampling


def _inverse_cdf_table(M: np.ndarray) -> np.ndarray:
    cum = np.cumsum(M, axis=-1)
    # pin the top of each CDF to exactly 1 from the last positive entry on
    for row, cum_row in zip(np.atleast_2d(M), np.atleast_2d(cum)):
        last = np.flatnonzero(row > 0)
        if last.size:
            cum_row[last[-1] :] = 1.0
    return cum


def _compose_prefix(maps: np.ndarray) -> np.ndarray:
    """Inclusive prefix composition: out[i] = maps[i] o maps[i-1] o ... o maps[0].

    Hillis-Steele scan over functions on a finite set, each stored as an
    index array; exact and equivalent to stepping the chain one draw at a time.
    """
    G = maps.copy()
    d = 1
    n = G.shape[0]
    while d < n:
        G[d:] = np.take_along_axis(G[d:], G[:-d], axis=1)
        d *= 2
    return G


def sample_states(model: HmmModel, N: int, rng: np.random.Generator) -> np.ndarray:
    S = model.state_count
    u = rng.random(N)
    s1 = int(np.searchsorted(_inverse_cdf_table(model.pi[None, :])[0], u[0], side="right"))
    if S == 1 or N == 1:
        return np.full(N, min(s1, S - 1), dtype=np.int64)
    cumP = _inverse_cdf_table(model.P)
    maps = np.empty((N - 1, S), dtype=np.int64)
    for s in range(S):
        maps[:, s] = np.searchsorted(cumP[s], u[1:], side="right")
    np.minimum(maps, S - 1, out=maps)
    G = _compose_prefix(maps)
    states = np.empty(N, dtype=np.int64)
    states[0] = s1
    states[1:] = G[:, s1]
    return states


def sample(model: HmmModel, N: int, seed: int) -> SymbolSequence:
    """Draw ``X_1^N`` from the model's stationary law with a PCG64 stream seeded by ``seed``."""
    model.require_valid()
    if N < 1:
        raise ValueError("N must be at least 1")
    rng = make_rng(seed)
    states = sample_states(model, N, rng)
    v = rng.random(N)
    cumR = _inverse_cdf_table(model.R)
    out = np.empty(N, dtype=np.int64)
    A = model.alphabet.size
    for s in range(model.state_count):
        mask = states == s
        out[mask] = np.searchsorted(cumR[s], v[mask], side="right")
    np.minimum(out, A - 1, out=out)
    return SymbolSequence(model.alphabet, out)


# --------------------------------------------------------------------------- marginals


def _check_alphabet(model: HmmModel, alphabet: Alphabet) -> None:
    if model.alphabet != alphabet:
        raise AlphabetMismatchError(
            f"alphabet mismatch: model {list(model.alphabet.symbols)} vs {list(alphabet.symbols)}"
        )


def log_marginal(model: HmmModel, x: SymbolSequence) -> float:
    """Natural log of ``P[x_1^n]``; ``-inf`` when the string is impossible.

    Forward recursion with the state vector renormalized at every step; the
    log normalizers are summed, so long sequences do not underflow.
    """
    _check_alphabet(model, x.alphabet)
    symbols = x.tolist()
    if not symbols:
        return 0.0
    R = model.R
    PR = [model.P * R[:, c][None, :] for c in range(model.alphabet.size)]
    alpha = model.pi * R[:, symbols[0]]
    total = float(alpha.sum())
    if total <= 0.0:
        return -math.inf
    logp = math.log(total)
    alpha = alpha / total
    for c in symbols[1:]:
        alpha = alpha @ PR[c]
        total = float(alpha.sum())
        if total <= 0.0:
            return -math.inf
        logp += math.log(total)
        alpha = alpha / total
    return logp


def _forward_step(mats: list[np.ndarray], vec: np.ndarray, logs: np.ndarray):
    """Extend every row by every symbol; rows stay in lexicographic order."""
    n, S = vec.shape
    new = np.stack([vec @ M for M in mats], axis=1)
    tot = new.sum(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        new_logs = logs[:, None] + np.log(tot)
        new = np.where(tot[..., None] > 0, new / tot[..., None], 0.0)
    return new.reshape(n * len(mats), S), new_logs.reshape(-1)


def iter_log_marginals(model: HmmModel, n: int, chunk_size: int = 2**16):
    """Yield ``ln P[a]`` for every ``a`` in ``A^n`` in lexicographic order, in chunks.

    The top levels of the string tree are expanded once; each block of
    prefixes then shares its forward vectors down the remaining levels, so
    the total cost is O(|A|^n |S|^2) rather than n times that.
    """
    if n < 1:
        yield np.zeros(1)
        return
    A = model.alphabet.size
    first = [np.diag(model.R[:, c]) for c in range(A)]
    rest = [model.P * model.R[:, c][None, :] for c in range(A)]
    depth = 1
    while depth < n and A ** (depth + 1) <= chunk_size:
        depth += 1
    top = n - depth
    vec = model.pi[None, :].copy()
    logs = np.zeros(1)
    for level in range(top):
        vec, logs = _forward_step(first if level == 0 else rest, vec, logs)
    block = max(1, chunk_size // A**depth)
    for start in range(0, vec.shape[0], block):
        v, lg = vec[start : start + block], logs[start : start + block]
        for level in range(top, n):
            v, lg = _forward_step(first if level == 0 else rest, v, lg)
        yield lg


def log_marginal_table(model: HmmModel, n: int) -> np.ndarray:
    """``ln P[a]`` for all ``a`` in ``A^n``; index ``a`` read as a base-``|A|`` number."""
    return np.concatenate(list(iter_log_marginals(model, n)))


def brute_force_marginal(model: HmmModel, x: SymbolSequence) -> float:
    """``P[x]`` by summing over every hidden path.  Exponential; for tests only."""
    _check_alphabet(model, x.alphabet)
    sym = x.tolist()
    total = 0.0
    for path in itertools.product(range(model.state_count), repeat=len(sym)):
        p = model.pi[path[0]] * model.R[path[0], sym[0]]
        for i in range(1, len(sym)):
            p *= model.P[path[i - 1], path[i]] * model.R[path[i], sym[i]]
        total += p
    return total


def cross_entropy_mc(model_x: HmmModel, model_y: HmmModel, n: int, seed: int) -> float:
    """Monte Carlo cross entropy rate: ``-ln P_X[Y_1^n] / n`` with ``Y ~ model_y``."""
    if model_x.alphabet != model_y.alphabet:
        raise AlphabetMismatchError("models are defined over different alphabets")
    model_x.require_valid()
    y = sample(model_y, n, seed)
    lp = log_marginal(model_x, y)
    if lp == -math.inf:
        return math.inf
    return -lp / n


# --------------------------------------------------------------------------- analytic oracles


def analytic_cross_entropy_iid(py, px) -> float:
    """``-sum_a py(a) ln px(a)`` for i.i.d. sources."""
    py = np.asarray(py, dtype=float)
    px = np.asarray(px, dtype=float)
    if py.shape != px.shape:
        raise StructuralError(f"length mismatch: {py.shape} vs {px.shape}")
    support = py > 0
    if np.any(px[support] == 0):
        return math.inf
    return float(-np.sum(py[support] * np.log(px[support])))


def analytic_cross_entropy_markov(chain_y, chain_x) -> float:
    """``-sum_{s,t} pi_Y(s) P_Y(s,t) ln P_X(s,t)`` for observed Markov chains.

    Each chain is a ``(pi, P)`` pair.
    """
    pi_y, P_y = (np.asarray(a, dtype=float) for a in chain_y)
    _, P_x = (np.asarray(a, dtype=float) for a in chain_x)
    if P_y.shape != P_x.shape or pi_y.shape[0] != P_y.shape[0]:
        raise StructuralError("chains have mismatched dimensions")
    joint = pi_y[:, None] * P_y
    support = joint > 0
    if np.any(P_x[support] == 0):
        return math.inf
    return float(-np.sum(joint[support] * np.log(P_x[support])))


# --------------------------------------------------------------------------- file format


class ModelFormatError(StructuralError):
    pass


def model_from_dict(doc: dict, name: str = "") -> HmmModel:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    missing = [k for k in ("alphabet", "pi", "P", "R") if k not in doc]
    if missing:
        raise ModelFormatError(f"model is missing field(s): {', '.join(missing)}")
    try:
        alphabet = Alphabet(tuple(doc["alphabet"]))
        return HmmModel(alphabet, doc["pi"], doc["P"], doc["R"], name=name)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"bad model field: {exc}") from exc


def load_model(path: str | Path, force: bool = False) -> HmmModel:
    """Read a model JSON file; refuse models that fail :func:`validate` unless ``force``."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from exc
    model = model_from_dict(doc, name=path.stem)
    if not force and not model.report.ok:
        raise InvalidModelError(f"{path}: " + "; ".join(model.report.messages), model.report)
    return model


def save_model(model: HmmModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n", encoding="utf-8")


_BUILTIN = {"figure2-x": "figure2_x.json", "figure2-y": "figure2_y.json"}


def builtin_model(name: str) -> HmmModel:
    """One of the committed models shipped with the package (``figure2-x``, ``figure2-y``)."""
    from importlib.resources import files

    if name not in _BUILTIN:
        raise KeyError(f"unknown builtin model {name!r}; choose from {sorted(_BUILTIN)}")
    doc = json.loads(files("zmest.models").joinpath(_BUILTIN[name]).read_text(encoding="utf-8"))
    return model_from_dict(doc, name=name)


def resolve_model(spec: str | Path, force: bool = False) -> HmmModel:
    """Load a model from a path, or by builtin name when no such file exists."""
    if str(spec) in _BUILTIN and not Path(spec).exists():
        return builtin_model(str(spec))
    return load_model(spec, force=force)
