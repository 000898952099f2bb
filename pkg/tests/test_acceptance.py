"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are collected and repeated in pytest's terminal summary, so a
plain ``pytest tests/test_acceptance.py`` shows the scoreboard.  Criteria
5, 10 and 11 share one run of the default ``zmest experiment`` command.
"""
from __future__ import annotations

import csv
import itertools
import math

import numpy as np
import pytest
from click.testing import CliRunner

from zmest.cli import main
from zmest.decoupling import fit_constants, waiting_time_tail_test
from zmest.experiment import ExperimentConfig, run_experiment
from zmest.hmm import HmmModel, analytic_cross_entropy_iid, analytic_cross_entropy_markov, log_marginal
from zmest.parsers import mzm_parse, zm_parse
from zmest.symbols import Alphabet, BINARY, SymbolSequence
from zmest.thermo import left_derivative_estimate, markov_pressure, q_ell

import naive
from conftest import random_model, seq

RESULTS: list[str] = []

P_Y = [[0.9, 0.1], [0.2, 0.8]]
P_X = [[0.6, 0.4], [0.3, 0.7]]


def verdict(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# --------------------------------------------------------------------------- 1-3


def test_01_parse_hand_traces():
    cases = [("abab", "aaaa"), ("aaaa", "aaaa"), ("bbbb", "aaaa")]
    mzm = [mzm_parse(seq(y), seq(x)).c for y, x in cases]
    zm = [zm_parse(seq(y), seq(x)).c for y, x in cases]
    verdict("1 parse hand traces", mzm == [2, 1, 4] and zm == [3, 1, 4], f"mZM c={mzm}, ZM c={zm}")


def test_02_index_oracle_equivalence():
    rng = np.random.default_rng(20240201)
    mismatches = 0
    for _ in range(200):
        A = int(rng.integers(2, 5))
        alpha = Alphabet(tuple("abcd"[:A]))
        N = int(rng.integers(1, 513))
        p = rng.dirichlet(np.ones(A) * 0.5)
        y, x = rng.choice(A, N, p=p).tolist(), rng.choice(A, N, p=p).tolist()
        Y, X = SymbolSequence(alpha, y), SymbolSequence(alpha, x)
        m, z = mzm_parse(Y, X), zm_parse(Y, X)
        mismatches += list(m.boundaries) != naive.mzm_boundaries(y, x)
        mismatches += list(z.boundaries) != naive.zm_boundaries(y, x)
    verdict("2 index-backed parses vs naive scan", mismatches == 0, f"{mismatches} mismatches over 200 pairs")


def path_sum_table(model, n):
    """P[a] for every a in A^n by summing over every hidden path, vectorized."""
    S = model.state_count
    paths = np.array(list(itertools.product(range(S), repeat=n)))
    words = np.array(list(itertools.product(range(2), repeat=n)))
    w = model.pi[paths[:, 0]][:, None] * model.R[paths[:, 0][:, None], words[:, 0][None, :]]
    for i in range(1, n):
        w = w * model.P[paths[:, i - 1], paths[:, i]][:, None] * model.R[paths[:, i][:, None], words[:, i][None, :]]
    return words, w.sum(axis=0)


def test_03_forward_vs_path_sum():
    rng = np.random.default_rng(3)
    worst_rel, worst_norm = 0.0, 0.0
    for _ in range(50):
        model = random_model(rng, int(rng.integers(1, 4)), 2, BINARY)
        for n in range(1, 9):
            words, exact = path_sum_table(model, n)
            lm = np.array([log_marginal(model, SymbolSequence(BINARY, w)) for w in words])
            worst_rel = max(worst_rel, float(np.max(np.abs(np.exp(lm) - exact) / exact)))
            worst_norm = max(worst_norm, abs(math.fsum(np.exp(lm)) - 1.0))
    verdict(
        "3 forward algorithm vs path sum",
        worst_rel <= 1e-10 and worst_norm <= 1e-9,
        f"max rel err {worst_rel:.2e} (tol 1e-10), max |sum-1| {worst_norm:.2e} (tol 1e-9)",
    )


# --------------------------------------------------------------------------- 4


def test_04_iid_consistency():
    y_model = HmmModel.iid([0.5, 0.5], BINARY)
    x_model = HmmModel.iid([0.3, 0.7], BINARY)
    target = analytic_cross_entropy_iid([0.5, 0.5], [0.3, 0.7])
    cfg = ExperimentConfig(x_model, y_model, grid=(2**10, 2**17), realizations=32, reference_n=2**17, estimators=("mZM",), seed=0)
    est = run_experiment(cfg).estimates("mZM")
    rmse = np.sqrt(np.mean((est - target) ** 2, axis=0))
    rel = abs(est[:, -1].mean() - target) / target
    ok = rel < 0.10 and rmse[1] <= 0.5 * rmse[0]
    verdict(
        "4 i.i.d. consistency",
        ok,
        f"h^c={target:.5f}, mean Q(2^17)={est[:, -1].mean():.5f} (rel {rel:.3f} < 0.10), "
        f"RMSE 2^10={rmse[0]:.4f}, 2^17={rmse[1]:.4f} (ratio {rmse[1] / rmse[0]:.3f} <= 0.5)",
    )


# --------------------------------------------------------------------------- 5, 10, 11


EXPERIMENT_ARGS = ["experiment"]  # defaults: figure2 pair, 2^10..2^17, 32 realizations, reference 2^20


@pytest.fixture(scope="module")
def figure2_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("figure2_a")
    res = CliRunner().invoke(main, ["--seed", "0", "--out-dir", str(out), *EXPERIMENT_ARGS])
    assert res.exit_code == 0, res.output
    return out


def test_05_hmp_consistency(figure2_run):
    rows = read_csv(figure2_run / "rmse.csv")
    by = {e: [r for r in rows if r["estimator"] == e] for e in ("mZM", "LM")}
    ref = float(by["mZM"][0]["reference"])
    mean = float(by["mZM"][-1]["mean"])
    rmse = [float(r["rmse"]) for r in by["mZM"]]
    inversions = sum(b > a for a, b in zip(rmse, rmse[1:]))
    lm_last = float(by["LM"][-1]["rmse"])
    rel = abs(mean - ref) / ref
    ok = rel < 0.10 and inversions <= 1 and lm_last > rmse[-1]
    verdict(
        "5 HMP consistency",
        ok,
        f"reference {ref:.5f}, mean Q(2^17)={mean:.5f} (rel {rel:.3f}), mZM RMSE {rmse[0]:.4f}->{rmse[-1]:.4f} "
        f"with {inversions} inversion(s), LM RMSE(2^17)={lm_last:.4f} > mZM",
    )


def test_10_word_length_ratio(figure2_run):
    rows = read_csv(figure2_run / "wordlen.csv")
    ratios = [float(r["mean_ratio_to_lnN"]) for r in rows]
    growth = max(ratios) / ratios[0] - 1
    verdict("10 max mZM word / ln N", growth < 0.5, f"ratios {ratios[0]:.3f}..{ratios[-1]:.3f}, max growth {growth:.1%} < 50%")


def test_11_determinism(figure2_run, tmp_path):
    res = CliRunner().invoke(main, ["--seed", "0", "--out-dir", str(tmp_path), *EXPERIMENT_ARGS])
    assert res.exit_code == 0, res.output
    names = ["trace.csv", "rmse.csv", "wordlen.csv", "reference.csv"]
    same = [(figure2_run / n).read_bytes() == (tmp_path / n).read_bytes() for n in names]
    verdict("11 byte-identical rerun", all(same), ", ".join(f"{n}={'same' if s else 'DIFF'}" for n, s in zip(names, same)))


# --------------------------------------------------------------------------- 6-9


def test_06a_pressure_at_zero():
    rng = np.random.default_rng(6)
    uniform = HmmModel.iid([0.5, 0.5], BINARY)
    pairs = [
        (uniform, uniform),
        (HmmModel.markov(P_X, BINARY), HmmModel.markov(P_Y, BINARY)),
        (random_model(rng, 3, 2, BINARY), random_model(rng, 2, 2, BINARY)),
    ]
    worst = max(abs(q_ell(mx, my, ell, 0.0)) for mx, my in pairs for ell in (1, 4, 8, 12, 16))
    verdict("6a q_l(0) = 0", worst <= 1e-12, f"max |q_l(0)| = {worst:.1e} (tol 1e-12)")


def test_06b_uniform_pressure():
    u = HmmModel.iid([0.5, 0.5], BINARY)
    worst = max(abs(q_ell(u, u, ell, -1.0) / ell + math.log(2)) for ell in (1, 3, 8, 16))
    verdict("6b uniform q_l(-1)/l = -ln 2", worst <= 1e-12, f"max deviation {worst:.1e} (tol 1e-12)")


def test_06c_markov_spectral_radius():
    mx, my = HmmModel.markov(P_X, BINARY), HmmModel.markov(P_Y, BINARY)
    parts, ok = [], True
    for alpha in (-1.0, -0.5):
        rho = markov_pressure(P_X, P_Y, alpha)
        est = q_ell(mx, my, 16, alpha) / 16
        rel = abs(est - rho) / abs(rho)
        ok &= rel < 0.01
        parts.append(f"alpha={alpha}: q16/16={est:.5f}, ln rho={rho:.5f}, rel {rel:.2%}")
    verdict("6c Markov q_16/16 vs ln rho (1%)", ok, "; ".join(parts))


def test_07_left_derivative():
    mx, my = HmmModel.markov(P_X, BINARY), HmmModel.markov(P_Y, BINARY)
    exact = analytic_cross_entropy_markov((my.pi, P_Y), (mx.pi, P_X))
    est = left_derivative_estimate(mx, my, h=0.01, ell=14)
    rel = abs(est - exact) / exact
    verdict("7 left derivative vs analytic", rel < 0.05, f"secant {est:.5f}, analytic {exact:.5f}, rel {rel:.2%} < 5%")


def test_08_decoupling_certificates():
    iid = fit_constants(HmmModel.iid([0.3, 0.7], BINARY), 10)
    chain = fit_constants(HmmModel.markov(P_Y, BINARY), 10)
    flip = fit_constants(HmmModel.markov([[0, 1], [1, 0]], BINARY), 10)
    expected = max(math.log(2.4), -math.log(0.3))
    ok = (iid.k, iid.tau) == (0.0, 0) and abs(chain.k - expected) <= 1e-3 and chain.tau == 0 and flip.tau == 1
    verdict(
        "8 decoupling certificates",
        ok,
        f"iid (k,tau)=({iid.k},{iid.tau}); chain k={chain.k} vs {expected:.4f}; periodic tau={flip.tau}",
    )


def test_09_tail_bound():
    u = HmmModel.iid([0.5, 0.5], BINARY)
    rows = waiting_time_tail_test(u, BINARY.encode("01"), 0.0, 0, [10, 20, 50], 1000, 0)
    detail = ", ".join(f"r={r.r}: {r.survival:.4f} vs {r.bound:.2e}+3*{r.sigma:.1e}" for r in rows)
    verdict("9 waiting-time tail bound", not any(r.flagged for r in rows), detail)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
