"""Fast invariant checks run by ``rflab selftest`` (a few seconds in total)."""

import math
from fractions import Fraction

import numpy as np

from . import _parallel
from .analysis import counterexample_expectation, gaussian_variance_formula, krr_lipschitz_bound
from .data import synth_dataset
from .ensembles import EnsembleConfig, build_ensemble, ensemble_predict, mc_infinite_ensemble
from .errors import InvalidRegime
from .experiments import make_config, run_experiment
from .features import ActivationSpec, FeatureConfig, WeightDistSpec
from .kernels import KernelSpec, arc_cosine_kernel, erf_kernel, extend_whiten, kernel_matrix
from .regressors import fit_kernel_regressor, fit_min_norm, fit_ridge, predict_kernel


def _relu_config(D=200):
    return FeatureConfig(WeightDistSpec("normal"), ActivationSpec("relu"), D, True)


def check_closed_form_kernels():
    assert arc_cosine_kernel([1, 0], [1, 0]) == 0.5
    assert abs(arc_cosine_kernel([1, 0], [-1, 0])) < 1e-15
    assert abs(arc_cosine_kernel([1, 0], [0, 1]) - 1 / (2 * math.pi)) < 1e-15
    assert abs(erf_kernel([1.0], [1.0]) - 2 / math.pi * math.asin(2 / 3)) < 1e-14


def check_whitening():
    data = synth_dataset(0, N=6, N_test=5)
    spec = KernelSpec("arccos", bias_augment=True)
    km = kernel_matrix(spec, data.X)
    assert np.array_equal(km.K, km.K.T)
    K = km.K + km.jitter_used * np.eye(6)
    assert np.linalg.norm(km.R.T @ km.R - K) <= 1e-8 * np.linalg.norm(K)
    x = data.X[2:3]
    ws = extend_whiten(km.R, spec(data.X, x)[:, 0], float(spec.diag(x)[0]))
    assert ws.r_perp < 1e-10


def check_regressors():
    rng = np.random.default_rng(1)
    Phi, y = rng.standard_normal((6, 50)), rng.standard_normal(6)
    theta, diag = fit_min_norm(Phi, y)
    assert np.allclose(Phi @ theta / np.sqrt(50), y, rtol=1e-6, atol=1e-8)
    theta_r, _ = fit_ridge(Phi, y, 1e-8)
    assert np.allclose(theta, theta_r, atol=1e-6)
    data = synth_dataset(0, N=6, N_test=5)
    spec = KernelSpec("arccos", bias_augment=True)
    reg = fit_kernel_regressor(spec, data.X, data.y)
    assert np.allclose(predict_kernel(reg, data.X), data.y, rtol=1e-6, atol=1e-8)


def check_ensemble_determinism():
    data = synth_dataset(0, N=6, N_test=5)
    cfg = EnsembleConfig(_relu_config(), 40, 0.0, 7)
    a = ensemble_predict(build_ensemble(cfg, data.X, data.y), data.X_test)
    b = mc_infinite_ensemble(cfg, data.X, data.y, data.X_test, batch=7)
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.variance, b.variance)
    saved = _parallel.get_threads()
    try:
        _parallel.set_threads(1)
        c = mc_infinite_ensemble(cfg, data.X, data.y, data.X_test)
        _parallel.set_threads(3)
        d = mc_infinite_ensemble(cfg, data.X, data.y, data.X_test)
    finally:
        _parallel.set_threads(saved)
    assert np.array_equal(c.mean, d.mean) and np.array_equal(c.variance, d.variance)


def check_counterexample():
    assert counterexample_expectation("ThreeMass") == Fraction(25, 18)
    assert counterexample_expectation("FourMass") == Fraction(25, 32)


def check_variance_formula():
    R = np.eye(3)
    assert gaussian_variance_formula(R, np.zeros(3), 0.7, 10, 3) == 0.0
    assert gaussian_variance_formula(R, np.ones(3), 0.0, 10, 3) == 0.0
    try:
        gaussian_variance_formula(R, np.ones(3), 1.0, 4, 3)
    except InvalidRegime:
        pass
    else:
        raise AssertionError("D = N + 1 accepted")


def check_lipschitz_bound():
    data = synth_dataset(0, N=6, N_test=10)
    spec = KernelSpec("arccos", bias_augment=True)
    K, Kc = spec(data.X), spec(data.X, data.X_test)
    C1 = np.abs(Kc).max(axis=0)
    rng = np.random.default_rng(0)
    for _ in range(10):
        lam, lam_p = rng.uniform(0, 2, 2)
        h = predict_kernel(fit_kernel_regressor(spec, data.X, data.y, lam, K=K), None, Kc)
        hp = predict_kernel(fit_kernel_regressor(spec, data.X, data.y, lam_p, K=K), None, Kc)
        for t in range(Kc.shape[1]):
            assert abs(h[t] - hp[t]) <= krr_lipschitz_bound(K, data.y, lam, lam_p, C1[t], 6)


def check_table_determinism():
    cfg = make_config("counterexample")
    assert run_experiment(cfg).to_csv() == run_experiment(cfg).to_csv()


CHECKS = (
    check_closed_form_kernels,
    check_whitening,
    check_regressors,
    check_ensemble_determinism,
    check_counterexample,
    check_variance_formula,
    check_lipschitz_bound,
    check_table_determinism,
)


def run_selftest():
    """Run every check; returns ``(n_passed, failures)`` with failure names."""
    failures = []
    for check in CHECKS:
        try:
            check()
        except Exception as exc:  # report, keep going
            failures.append(f"{check.__name__}: {type(exc).__name__} {exc}".strip())
    return len(CHECKS) - len(failures), failures
