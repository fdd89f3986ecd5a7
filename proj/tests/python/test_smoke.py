import json

import numpy as np
import pytest

import _hsgd as h


def test_hard_instance_and_runner():
    obj = h.build_local_lb(H=16.0, lambda_=1.0, mu=1.0, L=8.0, zeta=2.0, sigma=0.5, Delta=1.0)
    xs = obj.known_minimizer()
    assert np.allclose(xs, [1.0, 0.25, 0.0, 0.0])
    assert obj.measure_zeta_star() == pytest.approx(4.0)

    run = h.run("local", obj, machines=2, local_steps=4, rounds=12, eta=0.05, seed=3)
    assert len(run.suboptimality_series) == 12
    assert run.output_suboptimality < obj.constants.initial_suboptimality

    again = h.run("local", obj, machines=2, local_steps=4, rounds=12, eta=0.05, seed=3)
    assert np.array_equal(run.output_point, again.output_point)


def test_reductions_are_bit_identical():
    obj = h.random_quadratic(
        dimension=5, machines=3, curv_min=0.5, curv_max=2.0, target_norm=1.0,
        zeta_rms=0.4, sigma=0.6, seed=7,
    )
    a = h.run("local", obj, machines=3, local_steps=1, rounds=8, eta=0.05, seed=1)
    b = h.run("minibatch", obj, machines=3, local_steps=1, rounds=8, eta=0.05, seed=1)
    assert np.array_equal(a.output_point, b.output_point)
    assert a.suboptimality_series == b.suboptimality_series


def test_chain_support_progress():
    obj = h.build_chain(H=9.0, lambda_=1.0, C=1.0, rounds=4)
    assert obj.q == pytest.approx((3.0 - 5.0 ** 0.5) / 2.0)
    run = h.run(
        "minibatch", obj, machines=2, local_steps=2, rounds=4, eta=0.05, seed=2,
        record_support=True,
    )
    for r, machines in enumerate(run.support_history):
        for support in machines:
            assert all(coord <= r for coord in support)
    assert h.chain_residual_lower_bound(obj, 4) > 0.0


def test_bounds_and_regions():
    params = {"H": 1, "B": 1, "sigma_star": 1, "M": 1, "K": 1, "R": 1}
    assert h.eval_bound("mbsgd_convex", params) == 2.0
    assert "local_ub_convex" in h.bound_names()
    assert h.crossover_zeta(2.0, 1.0, 4.0) == 1.0
    region = h.optimality_region("convex", {"H": 1, "B": 1, "zeta_star": 3.0, "R": 16})
    assert region == "accelerated_mb_optimal"
    with pytest.raises(ValueError):
        h.eval_bound("mbsgd_convex", {"H": 1})


def test_pipeline_roundtrip():
    features, labels = h.synth_digit_corpus(seed=5, per_digit=20, dim=10)
    proj, basis = h.pca_reduce(features, 4)
    assert proj.shape == (200, 4)
    assert np.allclose(basis.T @ basis, np.eye(4), atol=1e-8)
    obj = h.logistic_objective(proj, labels, p=0.8, seed=1)
    assert obj.known_optimal_value() is not None
    assert obj.measure_zeta_star() >= 0.0


def test_sweep_is_thread_invariant():
    config = {
        "schema_version": 1,
        "instance": {
            "family": "local_lb", "H": 16, "lambda": 1, "mu": 1, "L": 8,
            "zeta": 1.0, "sigma": 0.5, "Delta": 1.0, "M": 2,
        },
        "algorithms": [{"algo": "minibatch"}, {"algo": "local"}],
        "geometry": {"M": [2], "K": [2], "R": [6], "S": [2]},
        "stepsizes": {"values": [0.01, 0.05]},
        "replicates": 2,
        "master_seed": 4,
    }
    cells1, summary1 = h.sweep(json.dumps(config), threads=1)
    cells4, summary4 = h.sweep(json.dumps(config), threads=4)
    assert cells1 == cells4
    assert summary1 == summary4
    assert cells1.count("\n") == 1 + 2 * 2 * 2  # header + cells
