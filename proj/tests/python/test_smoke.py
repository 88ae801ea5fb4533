import math

import pytest

import clusterpool as cp


def test_apriori_params_example():
    alpha, anchor = cp.apriori_params([0.0, 2.0], [1.0, 1.0])
    assert anchor == pytest.approx(1.0)
    assert alpha == pytest.approx(1.0)


def test_shrunken_decision_limits():
    assert cp.shrunken_decision(0.0, 5.0, 2.0, 10) == 2.0
    assert cp.shrunken_decision(math.inf, 5.0, 2.0, 10) == 5.0


def test_newsvendor_solution_is_critical_quantile():
    data = [float(x) for x in range(1, 11)]
    assert cp.shrunken_solution(cp.NewsvendorCost(1, 19), 0.0, [0.0], data) == 10.0
    assert cp.shrunken_solution(cp.MseCost(), math.inf, [7.0], data) == 7.0


def test_gamma_value():
    assert cp.gamma_within_cluster_d0(0, 1, 1, 1) == pytest.approx(0.0791250043247960639, rel=1e-12)


def test_generators_and_clustering():
    samples, truth = cp.gen_two_cluster(K=200, N=5, d=2, seed=3)
    assert len(samples) == 200 and all(len(s) == 5 for s in samples)
    assert set(truth) == {0, 1}
    means = [sum(s) / len(s) for s in samples]
    ids = cp.bisect_cluster(means, 50)
    assert len(ids) == 200 and min(ids) == 0
    nv = cp.gen_newsvendor(K=30, seed=1)
    assert nv == cp.gen_newsvendor(K=30, seed=1)


def test_loo_select_alpha_returns_grid_point():
    samples = cp.gen_newsvendor(K=20, N=6, seed=2)
    atoms = [x for s in samples for x in s]
    grid = cp.default_grid()
    scores = cp.loo_scores(cp.NewsvendorCost(), samples, atoms, grid)
    alpha = cp.loo_select_alpha(cp.NewsvendorCost(), samples, atoms, grid)
    assert alpha == grid[scores.index(min(scores))]


def test_cli_exit_codes(tmp_path):
    rc, out, _ = cp.run_cli(["--help"])
    assert rc == 0 and "surface" in out
    assert cp.run_cli(["frobnicate"])[0] == 2
    cfg = tmp_path / "s.ini"
    cfg.write_text("[surface]\nn1 = 1\nd = 0, 1\n")
    rc, _, _ = cp.run_cli(["surface", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert rc == 0
    assert (tmp_path / "out" / "surface.csv").read_text().startswith("n1,d,")
