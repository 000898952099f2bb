from __future__ import annotations

import math

import numpy as np
import pytest

from zmest.errors import StructuralError
from zmest.estimators import evaluate_prefixes, sample_pair
from zmest.experiment import (
    ExperimentConfig,
    REFERENCE_HEADER,
    RMSE_HEADER,
    TRACE_HEADER,
    WORDLEN_HEADER,
    fmt,
    rmse_csv,
    run_experiment,
    write_outputs,
)
from zmest.hmm import HmmModel, builtin_model, cross_entropy_mc, derive_seed
from zmest.parsers import PARSE_CALLS
from zmest.symbols import BINARY

UNIFORM = HmmModel.iid([0.5, 0.5], BINARY)


def small_config(**kw):
    base = dict(
        model_x=builtin_model("figure2-x"),
        model_y=builtin_model("figure2-y"),
        grid=(64, 256, 1024),
        realizations=3,
        reference_n=4096,
        seed=11,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_one_parse_per_realization_and_length():
    PARSE_CALLS.clear()
    run_experiment(small_config(estimators=("mZM", "ZM", "LM")))
    assert PARSE_CALLS["mZM"] == 3 * 3
    assert PARSE_CALLS["ZM"] == 3 * 3
    assert PARSE_CALLS["LZ78"] == 0
    PARSE_CALLS.clear()
    run_experiment(small_config(estimators=("LZ78", "KL", "mZM")))
    assert PARSE_CALLS["mZM"] == 9 and PARSE_CALLS["LZ78"] == 9 and PARSE_CALLS["ZM"] == 0


def test_single_realization_rmse_is_abs_error():
    res = run_experiment(small_config(realizations=1))
    for e in res.config.estimators:
        err = np.abs(res.estimates(e)[0] - res.references[e])
        np.testing.assert_allclose(res.rmse(e), err, rtol=1e-15)


def test_realization_seeds_and_reference():
    cfg = small_config(realizations=2, estimators=("mZM", "LZ78", "KL"))
    res = run_experiment(cfg)
    for r, run in enumerate(res.runs, start=1):
        y, x = sample_pair(cfg.model_y, cfg.model_x, cfg.grid[-1], cfg.seed + r)
        assert run.values == evaluate_prefixes(y, x, cfg.grid, cfg.estimators).values
    ref_seed = derive_seed(cfg.seed, 2**31 - 1)
    hc = cross_entropy_mc(cfg.model_x, cfg.model_y, cfg.reference_n, ref_seed)
    h = cross_entropy_mc(cfg.model_y, cfg.model_y, cfg.reference_n, ref_seed)
    assert res.references == {"mZM": hc, "LZ78": h, "KL": hc - h}


def test_uniform_pair_rmse_decreases():
    cfg = ExperimentConfig(UNIFORM, UNIFORM, grid=tuple(2**k for k in range(10, 15)), realizations=8, reference_n=2**14, estimators=("mZM",))
    res = run_experiment(cfg)
    assert res.references["mZM"] == pytest.approx(math.log(2), abs=1e-12)
    rmse = res.rmse("mZM")
    assert rmse[-1] < rmse[0]


def test_parallel_matches_serial():
    a = run_experiment(small_config(jobs=1))
    b = run_experiment(small_config(jobs=2))
    assert rmse_csv(a) == rmse_csv(b)


def test_config_validation():
    with pytest.raises(StructuralError):
        small_config(realizations=0)
    with pytest.raises(StructuralError):
        small_config(grid=(256, 64))
    with pytest.raises(StructuralError):
        small_config(reference_n=512)
    with pytest.raises(StructuralError):
        small_config(estimators=("mZM", "bogus"))


def test_outputs_and_headers(tmp_path):
    res = run_experiment(small_config(estimators=("mZM", "ZM", "LM", "LZ78", "KL")))
    paths = write_outputs(res, tmp_path)
    assert set(paths) == {"trace.csv", "rmse.csv", "wordlen.csv", "reference.csv", "trace.svg", "rmse.svg"}
    heads = {name: paths[name].read_text().splitlines()[0] for name in paths if name.endswith(".csv")}
    assert heads == {
        "trace.csv": "estimator,N,value",
        "rmse.csv": "estimator,N,realizations,mean,rmse,reference",
        "wordlen.csv": "N,mean_max_word_length,mean_ratio_to_lnN,max_ratio_to_lnN",
        "reference.csv": "quantity,n,value",
    }
    assert ",".join(TRACE_HEADER) == heads["trace.csv"]
    assert ",".join(RMSE_HEADER) == heads["rmse.csv"]
    assert ",".join(WORDLEN_HEADER) == heads["wordlen.csv"]
    assert ",".join(REFERENCE_HEADER) == heads["reference.csv"]
    assert len(paths["rmse.csv"].read_text().splitlines()) == 1 + 5 * 3
    svg = paths["rmse.svg"].read_text()
    assert svg.startswith("<?xml") and "<!-- zmest " in svg.splitlines()[1] and svg.rstrip().endswith("</svg>")


def test_fmt():
    assert fmt(math.inf) == "inf" and fmt(-math.inf) == "-inf" and fmt(math.nan) == "nan"
    assert fmt(math.log(4)) == "1.38629436112"
    assert fmt(np.int64(7)) == "7"


def test_inf_serialized(tmp_path):
    # a realization where x never contains y's symbols: every estimate is infinite
    ones = HmmModel.iid([0.0, 1.0], BINARY)
    zeros = HmmModel.iid([1.0, 0.0], BINARY)
    cfg = ExperimentConfig(zeros, ones, grid=(4, 8), realizations=1, reference_n=8, estimators=("mZM",), seed=0)
    res = run_experiment(cfg)
    assert res.cross_entropy_ref == math.inf
    text = rmse_csv(res)
    assert "inf" in text
