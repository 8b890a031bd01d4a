import json

import numpy as np
import pytest

from ksupport.data import Dataset, SyntheticSpec, synthetic_generate
from ksupport.selection import (
    GridSpec,
    accuracy,
    grid_search,
    mse,
    oracle_mse,
    run_synthetic_experiment,
    summarize,
)

SMALL = {"lasso": GridSpec("lasso", lambda_exponents=range(-2, 3)),
         "ksupport": GridSpec("ksupport", k_values=[1, 15, 40], lambda_exponents=range(-2, 3))}


def test_grid_cells():
    assert len(GridSpec("ksupport").cells(40)) == 40 * 21
    assert len(GridSpec("elastic").cells(40)) == 21 * 21
    assert GridSpec("lasso", lambda_exponents=[0, 1]).cells(5) == [{"lam": 1.0}, {"lam": 10.0}]
    with pytest.raises(ValueError):
        GridSpec("ksupport", k_values=[0]).cells(5)
    with pytest.raises(ValueError):
        GridSpec("ridge")


def test_oracle_mse_properties(rng):
    V = np.cov(rng.standard_normal((6, 50)))
    a, b = rng.standard_normal(6), rng.standard_normal(6)
    assert oracle_mse(a, b, V) == pytest.approx(oracle_mse(b, a, V), rel=1e-14)
    p = rng.permutation(6)
    assert oracle_mse(a[p], b[p], V[np.ix_(p, p)]) == pytest.approx(oracle_mse(a, b, V), rel=1e-12)
    assert oracle_mse(a, a, V) == 0.0
    assert oracle_mse([1.0, 0.0], [0.0, 0.0], np.eye(2)) == 1.0
    with pytest.raises(ValueError):
        oracle_mse(a, b, np.eye(3))


def test_mse_and_accuracy():
    ds = Dataset(np.array([[1.0], [-2.0], [0.0]]), np.array([1.0, 1.0, -1.0]), kind="binary")
    assert mse(np.array([1.0]), ds) == pytest.approx((0 + 9 + 1) / 3)
    # sign(0) is predicted as +1
    assert accuracy(np.array([1.0]), ds) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        accuracy(np.array([1.0]), Dataset(np.ones((1, 1)), np.array([0.3])))


def test_summarize():
    s = summarize([3.0], seed=0)
    assert s == {"median": 3.0, "se_bootstrap": 0.0, "sd": 0.0}
    v = np.random.default_rng(1).standard_normal(101)
    s = summarize(v, seed=5)
    assert s["median"] == np.median(v) and s["sd"] == pytest.approx(np.std(v, ddof=1))
    assert 0.05 < s["se_bootstrap"] < 0.25
    assert summarize(v, seed=5) == s


def test_grid_search_tie_prefers_more_regularisation():
    # constant zero response: every cell whose fit is 0 ties on validation error
    X = np.random.default_rng(0).standard_normal((10, 3))
    ds = Dataset(X, np.zeros(10))
    best, cells = grid_search(ds, ds, GridSpec("ksupport", k_values=[1, 2, 3],
                                               lambda_exponents=[-1, 0, 1]))
    assert best == {"k": 1, "lam": 10.0}
    assert len(cells) == 9


def test_grid_search_selects_sensible_model():
    tr, va, _, w = synthetic_generate(SyntheticSpec(seed=1))
    best, cells = grid_search(tr, va, SMALL["ksupport"])
    chosen = next(c for c in cells if c.params == best)
    assert chosen.val_error == min(c.val_error for c in cells)
    assert np.linalg.norm(chosen.w - w) < 0.5 * np.linalg.norm(w)


def test_experiment_single_rep_and_determinism(tmp_path):
    a = run_synthetic_experiment(SyntheticSpec(), SMALL, n_reps=1, master_seed=3)
    for m, r in a.methods.items():
        assert r.oracle_summary["median"] == r.oracle_mse[0]
        assert len(r.coefficients) == 1 and len(r.coefficients[0]) == 40
    b = run_synthetic_experiment(SyntheticSpec(), SMALL, n_reps=1, master_seed=3)
    assert a.to_json() == b.to_json()
    a.save(tmp_path)
    doc = json.loads((tmp_path / "report.json").read_text())
    assert set(doc["methods"]) == {"lasso", "ksupport"}
    lines = (tmp_path / "coefficients_ksupport.csv").read_text().splitlines()
    assert lines[0].split(",")[:2] == ["w1", "w2"] and len(lines) == 2
    assert "k-support" in (tmp_path / "report.txt").read_text()


@pytest.mark.slow
def test_parallel_equals_serial():
    grids = {"lasso": SMALL["lasso"]}
    a = run_synthetic_experiment(SyntheticSpec(), grids, n_reps=3, master_seed=9, n_jobs=1)
    b = run_synthetic_experiment(SyntheticSpec(), grids, n_reps=3, master_seed=9, n_jobs=2)
    assert a.to_json() == b.to_json()
    assert a.seeds == b.seeds and len(set(a.seeds)) == 3
