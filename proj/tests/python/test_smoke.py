import numpy as np
import pytest

import ttoi


def rel_err(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_noiseless_recovery_and_cores():
    truth, observed = ttoi.generate_spiked([6, 5, 4, 5], [2, 2, 2], level=0.0, seed=3)
    assert np.array_equal(truth, observed)
    fit = ttoi.ttoi(observed, [2, 2, 2])
    assert rel_err(fit["estimate"], truth) < 1e-10
    shapes = [c.shape for c in fit["cores"]]
    assert shapes == [(1, 6, 2), (2, 5, 2), (2, 4, 2), (2, 5, 1)]
    assert rel_err(ttoi.contract(fit["cores"]), fit["estimate"]) < 1e-12
    assert ttoi.tt_ranks(truth) == [2, 2, 2]


def test_layout_matches_numpy_indexing():
    # A rank-one tensor built with numpy must be recovered entry for entry.
    rng = np.random.default_rng(0)
    a, b, c = rng.normal(size=4), rng.normal(size=3), rng.normal(size=5)
    x = np.einsum("i,j,k->ijk", a, b, c)
    est = ttoi.tt_svd(np.ascontiguousarray(x), [1, 1])
    assert np.allclose(est, x, atol=1e-12)


def test_iterations_do_not_increase_objective():
    _, y = ttoi.generate_spiked([8, 8, 8], [2, 2], level=2.0, seed=5)
    fit = ttoi.ttoi(y, [2, 2], t_max=4, epsilon=0.0)
    trace = fit["objective_trace"]
    assert all(b <= a + 1e-8 * np.sum(y**2) for a, b in zip(trace[1:], trace[2:]))
    assert np.array_equal(ttoi.ttoi(y, [2, 2], t_max=0)["estimate"], ttoi.tt_svd(y, [2, 2]))


def test_select_ranks():
    truth, _ = ttoi.generate_spiked([6, 6, 6], [2, 2], level=0.0, seed=8)
    ranks, score = ttoi.select_ranks(truth, [3, 3])
    assert ranks == [2, 2]
    assert np.isfinite(score)


def test_markov_pipeline():
    p = ttoi.generate_aggregatable(5, 3, [1, 1], seed=2)
    assert np.allclose(p.sum(axis=2), 1.0, atol=1e-12)
    states = ttoi.sample_trajectory(p, 5000, seed=4)
    emp = ttoi.empirical_transition(states, 5, 3)
    est = ttoi.estimate_transition(emp, [1, 1])
    assert est.min() >= 0.0
    assert np.allclose(est.sum(axis=2), 1.0, atol=1e-12)
    assert np.linalg.norm(est - p) < np.linalg.norm(emp - p)


def test_simplex_project():
    assert ttoi.simplex_project([2.0, 0.0]) == [1.0, 0.0]


def test_tensor_file_round_trip(tmp_path):
    x = np.random.default_rng(1).normal(size=(3, 4, 2))
    path = tmp_path / "x.tnsr"
    ttoi.write_tensor(path, x)
    assert np.array_equal(ttoi.read_tensor(path), x)
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(ttoi.FormatError):
        ttoi.read_tensor(path)


def test_errors_map_to_python_exceptions():
    _, y = ttoi.generate_spiked([4, 4, 4], [1, 1], level=1.0)
    with pytest.raises(ValueError):
        ttoi.ttoi(y, [2])
    y[0, 0, 0] = np.nan
    with pytest.raises(ttoi.NumericError):
        ttoi.ttoi(y, [1, 1])
