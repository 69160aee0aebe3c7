import math

import numpy as np
import pytest

from hdmr.harness import (
    NOISE_CONCENTRATIONS,
    NOISE_MEANS,
    SimConfig,
    arc_error,
    benchmark,
    meas_loglik,
    measure,
    propagate,
    run_hrdf,
    run_particle_filter,
    sample_true_noise,
    simulate_truth,
    true_noise_logpdf,
)
from hdmr.hrdf import FilterState, MeasurementModel, SystemModel, point_estimate, step
from hdmr.manifold import fibonacci_sphere, sample_vmf
from hdmr.mixture import DiracMixture
from hdmr.reapprox import ReapproxConfig

E1, E2, E3 = np.eye(3)


def test_noise_mixture_parameters():
    s5 = 1 / math.sqrt(5)
    expect = [[0, 0, 1], [0, 2 * s5, s5], [0, -2 * s5, s5], [2 * s5, 0, s5], [-2 * s5, 0, s5],
              [0, s5, 2 * s5], [0, -s5, 2 * s5]]
    np.testing.assert_allclose(NOISE_MEANS.T, expect, atol=1e-15)
    assert list(NOISE_CONCENTRATIONS) == [5, 30, 30, 30, 30, 5, 5]


def test_noise_density_normalized_and_upper_heavy():
    X = fibonacci_sphere(20000)
    total = 4 * math.pi / 20000 * np.exp(true_noise_logpdf(X)).sum()
    assert abs(total - 1) <= 1e-3
    assert true_noise_logpdf(E3) > true_noise_logpdf(-E3)
    W = sample_true_noise(5000, np.random.default_rng(0))
    np.testing.assert_allclose(np.linalg.norm(W, axis=0), 1.0, atol=1e-12)
    assert W[2].mean() > 0.5


def test_propagate_examples():
    x = np.array([0.0, 0.6, 0.8])
    np.testing.assert_allclose(propagate(x, x), x, atol=1e-15)
    np.testing.assert_allclose(propagate(E1, E2), (E1 + E2) / math.sqrt(2), atol=1e-15)
    with pytest.raises(ValueError):
        propagate(x, -x)


def test_measure_examples():
    np.testing.assert_allclose(measure(E1), [0, 0], atol=1e-15)
    np.testing.assert_allclose(measure(E2), [math.pi / 2, 0], atol=1e-15)
    np.testing.assert_allclose(measure((E1 + E3) / math.sqrt(2)), [0, math.pi / 4], atol=1e-15)
    z, pole = measure(E3, return_flag=True)
    assert pole and z[0] == 0.0 and z[1] == pytest.approx(math.pi / 2)
    assert not measure(E1, return_flag=True)[1]


def test_measurement_likelihood():
    x = np.array([0.3, 0.4, math.sqrt(0.75)])
    var = 0.01
    z = measure(x)
    assert meas_loglik(z, x, var) == pytest.approx(-math.log(2 * math.pi * var), rel=1e-14)
    # a residual of 2 pi - 0.1 is a residual of -0.1
    a = meas_loglik(z + np.array([2 * math.pi - 0.1, 0]), x, var)
    b = meas_loglik(z + np.array([-0.1, 0]), x, var)
    assert a == pytest.approx(b, rel=1e-12)
    y = np.array([0.0, 0.6, 0.8])
    ratio = math.exp(meas_loglik(z, x, var) - meas_loglik(z, y, var))
    r = np.array([measure(x)[0] - measure(y)[0], measure(x)[1] - measure(y)[1]])
    r[0] = (r[0] + math.pi) % (2 * math.pi) - math.pi
    assert ratio == pytest.approx(math.exp(0.5 * (r @ r) / var), rel=1e-9)
    with pytest.raises(ValueError):
        meas_loglik(z, x, 0.0)


def test_wrap_invariance_many_states():
    rng = np.random.default_rng(1)
    S = sample_vmf(3, E1, 1.0, 200, rng).points
    z = np.array([2.9, 0.2])
    np.testing.assert_allclose(meas_loglik(z + [2 * math.pi, 0], S, 0.05), meas_loglik(z, S, 0.05), rtol=1e-12)
    np.testing.assert_allclose(meas_loglik(z - [4 * math.pi, 0], S, 0.05), meas_loglik(z, S, 0.05), rtol=1e-12)


def test_arc_error_bounds():
    x = np.array([0.0, 0.6, 0.8])
    assert arc_error(x, x) == 0.0
    assert arc_error(x, -x) == pytest.approx(math.pi)
    assert arc_error(E1, E2) == pytest.approx(math.pi / 2)


def test_truth_is_shared_and_unit():
    cfg = SimConfig(num_runs=2, num_steps=10)
    a = simulate_truth(cfg, 1)
    b = simulate_truth(cfg, 1)
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)
    np.testing.assert_allclose(np.linalg.norm(a[1], axis=0), 1.0, atol=1e-14)
    assert not np.array_equal(simulate_truth(cfg, 0)[1], a[1])


def test_particle_filter_sanity_and_determinism():
    cfg = SimConfig(num_runs=5, meas_noise_var=1e-6)
    res = run_particle_filter(cfg, 500)
    assert res.rmse_final_rad < 0.05
    again = run_particle_filter(cfg, 500)
    assert res.per_step_errors == again.per_step_errors
    assert res.mean_runtime_ms_per_step > 0


def test_hrdf_deterministic_scenario():
    # truth and filter share one deterministic noise point; the measurement is almost exact
    noise = DiracMixture.uniform(E3[:, None])
    sys = SystemModel(propagate, noise)
    var = 1e-6
    meas = MeasurementModel(lambda z, S: meas_loglik(z, S, var))
    x = propagate(E1, np.array([0.0, 0.6, 0.8]))
    rng = np.random.default_rng(3)
    state = FilterState(DiracMixture.uniform(sample_vmf(3, x, 5.0, 5, rng).points))
    cfg = ReapproxConfig(5, seed=0)
    for t in range(30):
        x = propagate(x, E3)
        state = step(state, sys, meas, measure(x, rng.normal(0, math.sqrt(var), 2)), cfg)
    assert arc_error(point_estimate(state), x) < 0.1


def test_hrdf_runs_deterministically():
    cfg = SimConfig(num_runs=2, num_steps=4, source_size=500)
    a = run_hrdf(cfg, 10)
    b = run_hrdf(cfg, 10)
    assert a.per_step_errors == b.per_step_errors
    assert a.samples == 10 and 0 <= a.rmse_final_rad <= math.pi
    assert a.mean_runtime_ms_per_step > 0


def test_benchmark_table_has_one_row_per_pair():
    cfg = SimConfig(num_runs=2, num_steps=3, source_size=300, n_w_list=[5, 8], pf_particles_list=[20, 50])
    results, table, series = benchmark(cfg)
    assert [(r["method"], r["samples"]) for r in table] == [("hrdf", 5), ("hrdf", 8), ("pf", 20), ("pf", 50)]
    assert set(table[0]) == {"method", "samples", "rmse_rad", "runtime_ms_per_step", "runs", "steps", "seed"}
    assert series["pf"]["samples"] == [20, 50]


@pytest.mark.parametrize("kw", [dict(num_runs=0), dict(meas_noise_var=0.0), dict(n_w_list=[0]),
                                dict(seed=-1), dict(workers=0), dict(num_steps=True)])
def test_sim_config_validation(kw):
    with pytest.raises(ValueError):
        SimConfig(**kw)


def test_full_scale():
    cfg = SimConfig.full_scale()
    assert cfg.num_runs == 5000 and 1000 in cfg.n_w_list
