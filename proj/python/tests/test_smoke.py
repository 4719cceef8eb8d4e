import math

import numpy as np
import pytest

import kquad


def test_sobolev_closed_form_diagonal():
    assert kquad.periodic_sobolev_1d(1, 0.0) == pytest.approx(1 + math.pi**2 / 3, abs=1e-12)
    k = kquad.Kernel.periodic_sobolev(1, 1)
    assert k.diagonal == pytest.approx(1 + math.pi**2 / 3, abs=1e-12)


def test_gram_is_symmetric_with_unit_diagonal():
    x = np.random.default_rng(0).normal(size=(20, 3))
    g = kquad.gram(kquad.Kernel.gaussian(1.0), x)
    assert g.shape == (20, 20)
    np.testing.assert_array_equal(g, g.T)
    np.testing.assert_allclose(np.diag(g), 1.0)


def test_full_support_weights_are_uniform():
    x = np.random.default_rng(1).uniform(size=40)
    k = kquad.Kernel.periodic_sobolev(1, 1)
    w = kquad.optimal_weights(k, x, x)
    np.testing.assert_allclose(w, 1 / 40, atol=1e-8)
    assert kquad.worst_case_error(k, x, w, x) <= 1e-6


def test_compress_returns_consistent_rule():
    x = np.random.default_rng(2).normal(size=(300, 2))
    nodes, weights, idx = kquad.compress(x, "gaussian:sigma=median", method="uniform", m=20, seed=4)
    assert nodes.shape == (20, 2)
    assert weights.shape == (20,)
    np.testing.assert_array_equal(nodes, x[idx])
    again = kquad.compress(x, "gaussian:sigma=median", method="uniform", m=20, seed=4)
    np.testing.assert_array_equal(weights, again[1])
    k = kquad.make_kernel("gaussian:sigma=median", x, 4)
    err = kquad.worst_case_error(k, nodes, weights, x)
    mc = kquad.worst_case_error(k, nodes, np.full(20, 1 / 20), x)
    assert 0 <= err <= mc


def test_input_errors_are_value_errors():
    x = np.zeros((5, 1))
    with pytest.raises(ValueError):
        kquad.make_kernel("cauchy:sigma=1", x)
    with pytest.raises(kquad.InputError):
        kquad.compress(np.arange(5.0), "gaussian:sigma=1", m=6)


def test_exact_rls_trace_and_greedy():
    x = np.random.default_rng(3).normal(size=(30, 2))
    k = kquad.Kernel.gaussian(0.7)
    g = kquad.gram(k, x)
    scores = kquad.exact_rls(g, 1e-3)
    eig = np.linalg.eigvalsh(g) / 30  # spectrum of K/n
    assert scores.sum() == pytest.approx(kquad.effective_dimension(eig, 1e-3), abs=1e-8)
    sel = kquad.greedy_select(x, k, 5)
    assert len(set(sel.tolist())) == 5


def test_run_experiment(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "dataset = uniform_cube:d=1,n=128\n"
        "kernel = sobolev:s=1,d=1\n"
        "target = uniform_cube\n"
        "methods = uniform monte-carlo\n"
        "m_grid = 4, 8\n"
        "trials = 2\n"
        "seed = 1\n"
        "output = raw.csv\n"
    )
    rows = kquad.run_experiment(str(cfg), workers=2)
    assert len(rows) == 8
    assert {r["method"] for r in rows} == {"uniform", "monte-carlo"}
    assert all(r["error"] >= 0 for r in rows)
