"""``zmest`` command line.

Exit codes: 0 success, 1 domain failure (invalid model, failed fit),
2 input or parse error, 3 enumeration budget exceeded.
"""
from __future__ import annotations

import functools
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import decoupling, estimators, experiment, hmm, parsers, thermo
from .errors import (
    AlphabetMismatchError,
    BudgetExceededError,
    FitError,
    InvalidModelError,
    StructuralError,
    ZmestError,
)
from .experiment import fmt
from .svgplot import Plot
from .symbols import Alphabet, write_sequence

EXIT_DOMAIN, EXIT_INPUT, EXIT_BUDGET = 1, 2, 3


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BudgetExceededError as exc:
            _fail(str(exc), EXIT_BUDGET)
        except (InvalidModelError, FitError) as exc:
            _fail(str(exc), EXIT_DOMAIN)
        except (StructuralError, AlphabetMismatchError, OSError, KeyError) as exc:
            _fail(str(exc), EXIT_INPUT)
        except ZmestError as exc:
            _fail(str(exc), EXIT_DOMAIN)

    return wrapper


def _int_list(text: str) -> list[int]:
    return [int(float(t)) for t in text.replace(" ", "").split(",") if t]


def _float_list(text: str) -> list[float]:
    """Comma list, or ``start:stop:step`` inclusive of ``stop``."""
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        n = int(round((stop - start) / step))
        return [round(start + i * step, 12) for i in range(n + 1)]
    return [float(t) for t in text.replace(" ", "").split(",") if t]


def _emit_rows(header, rows, fmt_name: str):
    if fmt_name == "json":
        click.echo(json.dumps([dict(zip(header, r)) for r in rows], indent=2, default=_json_default))
        return
    click.echo(",".join(header))
    for r in rows:
        click.echo(",".join(_cell(v) for v in r))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float, np.integer, np.floating)):
        return fmt(v)
    return str(v)


def _json_default(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    raise TypeError(type(v))


def _json_number(v: float):
    return fmt(v) if isinstance(v, float) and not math.isfinite(v) else v


@click.group()
@click.option("--seed", default=0, show_default=True, type=int, help="Base RNG seed (64-bit).")
@click.option("--jobs", default=1, show_default=True, type=int, help="Parallel realizations.")
@click.option("--out-dir", default=".", show_default=True, type=click.Path(file_okay=False))
@click.option("--format", "fmt_name", default="csv", show_default=True, type=click.Choice(["csv", "json"]))
@click.version_option(package_name="artifact")
@click.pass_context
def main(ctx, seed, jobs, out_dir, fmt_name):
    """Ziv-Merhav-type cross entropy estimation and diagnostics for hidden-Markov processes."""
    ctx.obj = {"seed": seed, "jobs": jobs, "out_dir": Path(out_dir), "format": fmt_name}


@main.command("validate")
@click.argument("model_path")
@handle_errors
def validate_cmd(model_path):
    """Check a model file; exit 0 iff every condition holds."""
    try:
        model = hmm.resolve_model(model_path, force=True)
    except hmm.ModelFormatError as exc:
        _fail(str(exc), EXIT_INPUT)
    report = model.report
    click.echo(json.dumps(report.to_dict(), indent=2))
    sys.exit(0 if report.ok else EXIT_DOMAIN)


@main.command("generate")
@click.argument("model_path")
@click.option("-n", "--length", "N", required=True, type=int)
@click.option("-o", "--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--force", is_flag=True, help="Accept models failing the nondegeneracy check.")
@click.pass_obj
@handle_errors
def generate_cmd(obj, model_path, N, out_path, force):
    """Sample a sequence of length N and write it in the text format."""
    model = hmm.resolve_model(model_path, force=force)
    write_sequence(out_path, hmm.sample(model, N, obj["seed"]))


def _read_pair(y_path, x_path, alphabet_spec, model_spec):
    y_text = Path(y_path).read_text(encoding="utf-8")
    x_text = Path(x_path).read_text(encoding="utf-8")
    if model_spec:
        alphabet = hmm.resolve_model(model_spec, force=True).alphabet
    elif alphabet_spec:
        alphabet = Alphabet(tuple(alphabet_spec.split(",")))
    else:
        tokens = set()
        for text in (y_text, x_text):
            # one symbol per character unless whitespace separates multi-character tokens
            words = text.split()
            if len(words) > 1 and any(len(t) > 1 for t in words):
                tokens.update(text.split())
            else:
                tokens.update(ch for ch in text if not ch.isspace())
        if not tokens:
            raise StructuralError("empty input sequences")
        alphabet = Alphabet(tuple(sorted(tokens)))
    return alphabet.encode(y_text), alphabet.encode(x_text)


@main.command("estimate")
@click.argument("y_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("x_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-e", "--estimators", "names", default="mZM,ZM,LM,LZ78,KL", show_default=True)
@click.option("--alphabet", default=None, help="Comma-separated symbols (default: inferred).")
@click.option("--model", "model_spec", default=None, help="Take the alphabet from this model.")
@click.option("--unchecked", is_flag=True, help="Allow |y| != |x|.")
@click.option("--dump-parse", type=click.Path(dir_okay=False), default=None, help="Write mZM/ZM parses as JSON.")
@click.pass_obj
@handle_errors
def estimate_cmd(obj, y_path, x_path, names, alphabet, model_spec, unchecked, dump_parse):
    """Estimate rates from two sequence files; one CSV row per estimator."""
    y, x = _read_pair(y_path, x_path, alphabet, model_spec)
    wanted = [n.strip() for n in names.split(",") if n.strip()]
    bad = set(wanted) - set(estimators.ESTIMATORS)
    if bad:
        raise StructuralError(f"unknown estimator(s): {sorted(bad)}")
    if len(y) != len(x) and not unchecked:
        raise StructuralError(f"length mismatch: |y|={len(y)} but |x|={len(x)} (use --unchecked)")
    N = len(y)
    if N < 2:
        raise StructuralError("need sequences of length >= 2")
    mzm = zm = lz = None
    if {"mZM", "KL"} & set(wanted):
        mzm = parsers.mzm_parse_unchecked(y, x)
    if "ZM" in wanted:
        zm = parsers.zm_parse_unchecked(y, x)
    if {"LZ78", "KL"} & set(wanted):
        lz = parsers.lz78_parse(y)
    rows = []
    for name in wanted:
        if name == "mZM":
            rows.append((name, N, mzm.c, estimators.mzm_rate(mzm.c, N)))
        elif name == "ZM":
            rows.append((name, N, zm.c, estimators.zm_rate(zm.c, N)))
        elif name == "LM":
            horizon = min(N, len(x))
            rows.append((name, horizon, None, estimators.lm_rate(parsers.longest_match(y, x, horizon), horizon)))
        elif name == "LZ78":
            rows.append((name, N, lz.c, estimators.lz78_rate(lz.c, N)))
        elif name == "KL":
            value = estimators.kl_rate(estimators.mzm_rate(mzm.c, N), estimators.lz78_rate(lz.c, N))
            rows.append((name, N, None, value))
    _emit_rows(["estimator", "N", "c", "value"], rows, obj["format"])
    if dump_parse:
        dumped = [p.to_dict() for p in (mzm, zm) if p is not None]
        Path(dump_parse).write_text(json.dumps(dumped, indent=2) + "\n", encoding="utf-8")


@main.command("experiment")
@click.option("--model-x", default="figure2-x", show_default=True, help="Model file or builtin name.")
@click.option("--model-y", default="figure2-y", show_default=True)
@click.option("--grid", "grid_text", default=None, help="Comma-separated lengths (default 2^10..2^17).")
@click.option("--realizations", default=32, show_default=True, type=int)
@click.option("--reference-n", default=2**20, show_default=True, type=int)
@click.option("-e", "--estimators", "names", default="mZM,ZM,LM", show_default=True)
@click.pass_obj
@handle_errors
def experiment_cmd(obj, model_x, model_y, grid_text, realizations, reference_n, names):
    """Traces, RMSE against a Monte Carlo reference, and word-length statistics."""
    cfg = experiment.ExperimentConfig(
        model_x=hmm.resolve_model(model_x),
        model_y=hmm.resolve_model(model_y),
        grid=tuple(_int_list(grid_text)) if grid_text else experiment.DEFAULT_GRID,
        realizations=realizations,
        reference_n=reference_n,
        estimators=tuple(n.strip() for n in names.split(",") if n.strip()),
        seed=obj["seed"],
        jobs=obj["jobs"],
    )
    result = experiment.run_experiment(cfg)
    paths = experiment.write_outputs(result, obj["out_dir"])
    click.echo(f"reference cross entropy (n={cfg.reference_n}): {fmt(result.cross_entropy_ref)}")
    for name in sorted(paths):
        click.echo(f"wrote {paths[name]}")


@main.command("pressure")
@click.argument("model_x")
@click.argument("model_y")
@click.option("--alphas", default="-2:0:0.1", show_default=True, help="List or start:stop:step.")
@click.option("--ell-max", default=16, show_default=True, type=int)
@click.option("--h", "step", default=0.01, show_default=True, type=float, help="Secant step at 0.")
@click.option("--mc-n", default=2**18, show_default=True, type=int, help="Length for the Monte Carlo cross entropy.")
@click.pass_obj
@handle_errors
def pressure_cmd(obj, model_x, model_y, alphas, ell_max, step, mc_n):
    """Tabulate q_l(alpha) for l = 1..ell-max and plot q_L(alpha)/L."""
    mx, my = hmm.resolve_model(model_x), hmm.resolve_model(model_y)
    grid = _float_list(alphas)
    curve = thermo.pressure_curve(mx, my, grid, range(1, ell_max + 1))
    out = obj["out_dir"]
    out.mkdir(parents=True, exist_ok=True)
    rows = list(curve.rows())
    header = ["alpha", "ell", "q", "q_per_symbol"]
    lines = [",".join(header)] + [",".join(_cell(v) for v in r) for r in rows]
    (out / "pressure.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    slope = thermo.left_derivative_estimate(mx, my, step, ell_max)
    mc = hmm.cross_entropy_mc(mx, my, mc_n, obj["seed"])
    plot = Plot(f"Pressure q_L(alpha)/L, L={ell_max}", "alpha", "q_L(alpha) / L")
    plot.add(f"L={ell_max}", curve.alphas, curve.per_symbol[:, -1])
    plot.notes.append(f"secant slope at 0: {slope:.4f}")
    plot.notes.append(f"Monte Carlo h^c: {mc:.4f}")
    plot.save(out / "pressure.svg")
    summary = {"ell_max": ell_max, "h": step, "left_derivative": slope, "cross_entropy_mc": _json_number(mc)}
    click.echo(json.dumps(summary, indent=2))


@main.command("decouple")
@click.argument("model_path")
@click.option("-L", "--horizon", "L", default=10, show_default=True, type=int)
@click.option("--tau-max", default=4, show_default=True, type=int)
@handle_errors
def decouple_cmd(model_path, L, tau_max):
    """Fit decoupling constants (k, tau) at a finite horizon and print the certificate."""
    model = hmm.resolve_model(model_path, force=True)
    cert = decoupling.fit_constants(model, L, tau_max)
    doc = {k: _json_number(v) for k, v in cert.to_dict().items()}
    click.echo(json.dumps(doc, indent=2))


@main.command("waiting-tail")
@click.argument("model_path")
@click.option("--word", required=True, help="The string a, in the sequence text format.")
@click.option("--k", "k", type=float, default=None, help="Decoupling k (default: fitted).")
@click.option("--tau", type=int, default=None, help="Decoupling tau (default: fitted).")
@click.option("-L", "--horizon", "L", default=10, show_default=True, type=int, help="Horizon used when fitting.")
@click.option("--r-grid", default="10,20,50", show_default=True)
@click.option("--trials", default=1000, show_default=True, type=int)
@click.pass_obj
@handle_errors
def waiting_tail_cmd(obj, model_path, word, k, tau, L, r_grid, trials):
    """Compare the empirical waiting-time survival with the decoupling tail bound."""
    model = hmm.resolve_model(model_path, force=True)
    if k is None or tau is None:
        cert = decoupling.fit_constants(model, L)
        k = cert.k if k is None else k
        tau = cert.tau if tau is None else tau
    a = model.alphabet.encode(word)
    rows = decoupling.waiting_time_tail_test(model, a, k, tau, _int_list(r_grid), trials, obj["seed"])
    table = [(r.r, r.survival, r.bound, r.sigma, r.flagged) for r in rows]
    _emit_rows(["r", "survival", "bound", "sigma", "flagged"], table, obj["format"])
    if any(r.flagged for r in rows):
        sys.exit(EXIT_DOMAIN)


if __name__ == "__main__":  # pragma: no cover
    main()
