import numpy as np
import pytest

from rflab.data import housing_like_dataset
from rflab.ensembles import (
    EnsembleConfig,
    budget_matched_comparison,
    build_ensemble,
    ensemble_predict,
    hockey_stick_curve,
    mc_infinite_ensemble,
)
from rflab.features import sample_features
from rflab.kernels import KernelSpec
from rflab.regressors import fit_kernel_regressor, fit_rf, predict_kernel, predict_rf

from conftest import feature_config


def test_single_member_is_single_model(synth):
    cfg = EnsembleConfig(feature_config(), 1, 0.0, 4)
    models = build_ensemble(cfg, synth.X, synth.y)
    res = ensemble_predict(models, synth.X_test)
    assert np.array_equal(res.mean, predict_rf(models[0], synth.X_test))
    assert np.array_equal(res.variance, np.zeros(len(synth.X_test)))


def test_builds_are_deterministic_and_members_distinct(synth):
    cfg = EnsembleConfig(feature_config(D=30), 5, 0.0, 4)
    a = ensemble_predict(build_ensemble(cfg, synth.X, synth.y), synth.X_test)
    b = ensemble_predict(build_ensemble(cfg, synth.X, synth.y), synth.X_test)
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.variance, b.variance)
    omegas = [m.draw.omega for m in build_ensemble(cfg, synth.X, synth.y)]
    assert all(not np.array_equal(omegas[i], omegas[j]) for i in range(5) for j in range(i))


def test_identical_members_zero_variance(synth):
    m = fit_rf(sample_features(feature_config(), 1, 9), synth.X, synth.y)
    res = ensemble_predict([m] * 6, synth.X_test)
    assert np.all(res.variance == 0)


def test_member_order_drift(synth):
    models = build_ensemble(EnsembleConfig(feature_config(), 300, 0.0, 1), synth.X, synth.y)
    perm = np.random.default_rng(0).permutation(300)
    a = ensemble_predict(models, synth.X_test).mean
    b = ensemble_predict([models[i] for i in perm], synth.X_test).mean
    assert np.all(np.abs(a - b) <= 1e-12 * np.maximum(np.abs(a), 1.0))


def test_streaming_matches_batch_bitwise(synth):
    cfg = EnsembleConfig(feature_config(), 100, 0.0, 2)
    a = ensemble_predict(build_ensemble(cfg, synth.X, synth.y), synth.X_test)
    b = mc_infinite_ensemble(cfg, synth.X, synth.y, synth.X_test, batch=13)
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.variance, b.variance)


def test_split_half_variance_consistency(housing):
    fc = feature_config("softplus")
    a = mc_infinite_ensemble(EnsembleConfig(fc, 1000, 0.0, 10), housing.X, housing.y, housing.X_test)
    b = mc_infinite_ensemble(EnsembleConfig(fc, 1000, 0.0, 11), housing.X, housing.y, housing.X_test)
    assert np.mean(np.abs(a.variance / b.variance - 1)) < 0.2


def test_relu_ensemble_matches_arc_cosine_regressor():
    # M = 4000 ReLU members on a housing-style sample against the closed-form kernel
    d = housing_like_dataset(0, N=12, N_test=500)
    fc = feature_config("relu")
    reg = fit_kernel_regressor(KernelSpec.limiting(fc), d.X, d.y)
    kp = predict_kernel(reg, d.X_test)
    res = mc_infinite_ensemble(EnsembleConfig(fc, 4000, 0.0, 21), d.X, d.y, d.X_test)
    z = (res.mean - kp) / res.mc_standard_error
    assert np.mean(np.abs(z) < 5) >= 0.9
    assert np.mean(np.abs(z[:20]) < 5) >= 0.9


def test_ensemble_rejects_bad_config():
    with pytest.raises(ValueError):
        EnsembleConfig(feature_config(), 0)
    with pytest.raises(ValueError):
        EnsembleConfig(feature_config(), 3, lam=-1.0)
    with pytest.raises(ValueError):
        ensemble_predict([], np.zeros((1, 1)))


def test_budget_single_member_gap_zero(housing):
    r = budget_matched_comparison(200, 1, housing, feature_config(), 3)
    assert r["l2_gap"] == 0.0
    assert r["generalization"]["ensemble_err"] == r["generalization"]["single_err"]


def test_budget_gap_decreases_with_width(housing):
    N = housing.N
    gaps = []
    for D in (2 * N, 8 * N, 32 * N):
        g = [budget_matched_comparison(4 * D, 4, housing, feature_config(), s)["l2_gap"] for s in range(4)]
        gaps.append((np.mean(g), np.std(g, ddof=1) / 2))
    for (m0, s0), (m1, s1) in zip(gaps, gaps[1:]):
        assert m1 <= m0 + 2 * np.hypot(s0, s1)


def test_budget_indivisible():
    with pytest.raises(ValueError):
        budget_matched_comparison(10, 3, None, feature_config(), 0)


def test_hockey_stick_shape(synth):
    fc = feature_config("erf")
    rows = hockey_stick_curve([3, 6, 200, 1000], 300, synth, synth.X_test, 0.0, 5, fc)
    diff = {r["D"]: r for r in rows}
    assert np.isfinite(diff[6]["mean_abs_diff"])
    # far in the overparameterized regime the gap sits inside the MC band
    assert diff[1000]["mean_abs_diff"] < 3 * diff[1000]["member_sd"] / np.sqrt(300)
    assert diff[3]["mean_abs_diff"] > 3 * diff[1000]["mean_abs_diff"]
