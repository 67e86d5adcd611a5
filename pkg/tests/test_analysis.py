from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import feature_config
from rflab.analysis import (
    counterexample_expectation,
    counterexample_moments,
    expectation_term_samples,
    gaussian_expectation_term_samples,
    gaussian_feature_predictions,
    gaussian_variance_formula,
    krr_lipschitz_bound,
    path_jumps,
    ratio_spread,
    refinement_grid,
    shrinks_to_zero,
    ridge_expectation_term_samples,
    transformed_block_matrix,
    underparam_transformed_kernel,
    variance_vs_gp_profile,
)
from rflab.data import synth_dataset
from rflab.errors import ContractionViolated, InvalidRegime
from rflab.features import feature_matrix, member_seed, sample_features
from rflab.kernels import KernelSpec, cholesky_with_jitter, kernel_matrix
from rflab.regressors import fit_kernel_regressor, fit_min_norm, predict_kernel

ARCCOS = KernelSpec("arccos", bias_augment=True)


# ----------------------------------------------------------------- expectation

def test_gaussian_expectation_term_is_centred():
    s = gaussian_expectation_term_samples(N=3, D=20, M=4000, seed=1)
    assert len(s) == 4000 and s.n_dropped == 0
    assert np.abs(s.z_scores()).max() < 4.0


def test_zero_ridge_matches_plain(synth):
    fc = feature_config("relu", D=30)
    a = expectation_term_samples(fc, synth.X, [[0.3]], 50, seed=2)
    b = ridge_expectation_term_samples(fc, synth.X, [[0.3]], 0.0, 50, seed=2)
    assert np.array_equal(a.values, b.values)
    assert [t.draw_seed for t in a][:3] == [member_seed(2, m) for m in range(3)]


def test_term_matches_direct_inverse(synth):
    # independent recomputation of one draw with an explicit inverse
    fc = feature_config("relu", D=30)
    x = np.array([[0.3]])
    s = expectation_term_samples(fc, synth.X, x, 1, seed=3)
    K = ARCCOS(synth.X) + 0.0
    R = np.linalg.cholesky(K).T
    k, kss = ARCCOS(synth.X, x)[:, 0], ARCCOS(x)[0, 0]
    c = np.linalg.solve(R.T, k)
    rp = np.sqrt(kss - c @ c)
    F = feature_matrix(sample_features(fc, 1, member_seed(3, 0)), np.vstack([synth.X, x]))
    W = np.linalg.solve(R.T, F[:6])
    wp = (F[6] - W.T @ c) / rp
    ref = np.linalg.inv(W @ W.T) @ W @ wp
    assert np.allclose(s.values[0], ref, rtol=1e-5, atol=1e-8)


def test_large_ridge_shrinks_term(synth):
    fc = feature_config("relu", D=30)
    norms = [
        np.abs(ridge_expectation_term_samples(fc, synth.X, [[0.3]], lam, 40, seed=4).values).mean()
        for lam in (0.0, 1.0, 1e6)
    ]
    assert norms[0] > norms[1] > norms[2] and norms[2] < 1e-4


def test_standard_error_shrinks_like_root_M():
    se = [gaussian_expectation_term_samples(3, 20, M, seed=5).standard_error().mean()
          for M in (500, 8000)]
    assert 2.5 < se[0] / se[1] < 6.0


def test_expectation_needs_overparameterization(synth):
    with pytest.raises(InvalidRegime):
        expectation_term_samples(feature_config("relu", D=6), synth.X, [[0.3]], 5, seed=0)


# -------------------------------------------------------------------- variance

def test_inverse_wishart_oracle_for_variance_formula():
    # E[(W W^T)^{-1}] = I / (D - N - 1) for standard normal W
    rng = np.random.default_rng(0)
    N, D = 3, 12
    acc = np.zeros((N, N))
    M = 20000
    for _ in range(M):
        W = rng.standard_normal((N, D))
        acc += np.linalg.inv(W @ W.T)
    assert np.allclose(acc / M, np.eye(N) / (D - N - 1), atol=0.01)
    R = np.triu(rng.uniform(0.5, 1.5, (N, N)))
    y = rng.standard_normal(N)
    z = np.linalg.solve(R.T, y)
    assert np.isclose(gaussian_variance_formula(R, y, 0.6, D, N), 0.36 * z @ z / (D - N - 1))


def test_gaussian_predictions_match_formula(synth):
    km = kernel_matrix(ARCCOS, synth.X)
    grid = np.array([[-4.0], [0.7], [3.3]])
    C = np.linalg.solve(km.R.T, ARCCOS(synth.X, grid))
    r2 = ARCCOS.diag(grid) - (C * C).sum(axis=0)
    D = 40
    preds = gaussian_feature_predictions(km.R, C, np.sqrt(r2), synth.y, D, 6000, seed=6)
    formula = [gaussian_variance_formula(km.R, synth.y, np.sqrt(v), D, 6) for v in r2]
    assert np.allclose(preds.var(axis=0, ddof=1), formula, rtol=0.08)
    # the mean is the kernel regressor
    kr = predict_kernel(fit_kernel_regressor(ARCCOS, synth.X, synth.y), grid)
    se = preds.std(axis=0) / np.sqrt(6000)
    assert np.all(np.abs(preds.mean(axis=0) - kr) < 5 * se)


def test_variance_formula_rejects_small_D():
    with pytest.raises(InvalidRegime):
        gaussian_variance_formula(np.eye(3), np.ones(3), 1.0, 4, 3)


def test_relu_ratio_is_not_constant(synth):
    fc = feature_config("relu", D=200)
    grid = np.linspace(-5, 5, 11)
    relu = ratio_spread(variance_vs_gp_profile(fc, synth, grid, 1500, seed=7))
    gauss = ratio_spread(variance_vs_gp_profile(fc, synth, grid, 1500, seed=7, gaussian=True))
    assert gauss["cv"] < 0.1 and relu["cv"] > 0.3


def test_profile_vanishes_at_training_point(synth):
    fc = feature_config("relu", D=50)
    rows = variance_vs_gp_profile(fc, synth, synth.X[:1], 20, seed=0)
    assert rows[0]["r_perp_sq"] < 1e-9 and rows[0]["ensemble_variance"] < 1e-8


# ----------------------------------------------------------------------- ridge

def _krr(K, y, Kc, lam):
    return Kc.T @ np.linalg.solve(K + lam * np.eye(len(y)), y)


@given(st.floats(0, 3), st.floats(0, 3))
def test_lipschitz_bound_dominates(lam, lam_p):
    data = synth_dataset(0, N=6, N_test=15)
    K, Kc = ARCCOS(data.X), ARCCOS(data.X, data.X_test)
    C1 = np.abs(Kc).max(axis=0)
    diff = np.abs(_krr(K, data.y, Kc, lam) - _krr(K, data.y, Kc, lam_p))
    bound = np.array([krr_lipschitz_bound(K, data.y, lam, lam_p, c, 6) for c in C1])
    assert np.all(diff <= bound * (1 + 1e-9) + 1e-12)


def test_lipschitz_bound_form(synth):
    K = ARCCOS(synth.X)
    v = np.linalg.inv(K) @ np.linalg.inv(K) @ synth.y
    b = krr_lipschitz_bound(K, synth.y, 0.2, 0.7, 0.9, 6)
    assert np.isclose(b, np.sqrt(6) * 0.9 * 0.5 * np.linalg.norm(v), rtol=1e-5)
    assert krr_lipschitz_bound(K, synth.y, 0.4, 0.4, 0.9, 6) == 0.0
    assert np.isclose(krr_lipschitz_bound(K, synth.y, 0.0, 1.0, 1, 6),
                      2 * krr_lipschitz_bound(K, synth.y, 0.0, 0.5, 1, 6))
    with pytest.raises(ValueError):
        krr_lipschitz_bound(K, synth.y, -1.0, 0.0, 1.0, 6)


def test_path_jumps():
    lam = np.linspace(0, 1, 11)
    assert path_jumps(lam, lam**2) == []
    step = np.where(lam > 0.45, 1.0, 0.0) + 0.01 * lam
    assert path_jumps(lam, step) == [4]
    assert path_jumps(lam, np.zeros(11)) == []
    assert path_jumps(lam, np.column_stack([lam, step])) == [4]
    # a steep continuous start is not judged from one side
    assert path_jumps(lam, np.sqrt(lam)) == []


def test_shrinks_to_zero():
    g = refinement_grid(0.1, 1e-6)
    assert g[0] == 0.0 and g[-1] == 0.1 and g[1] <= 1e-6 < g[2]
    lam = np.array(g)
    wiggle = np.sqrt(lam) * np.cos(30 * lam)  # continuous, not monotone
    jump = np.where(lam > 0, 0.3, 0.0) + lam
    assert shrinks_to_zero(lam, wiggle) == []
    assert shrinks_to_zero(lam, np.column_stack([wiggle, jump, 0 * lam])) == [1]


def test_kernel_path_is_continuous_at_zero(synth):
    K = ARCCOS(synth.X)
    Kc = ARCCOS(synth.X, synth.X_test[:10])
    lam = np.array(refinement_grid(0.1, 1e-2 * np.linalg.eigvalsh(K)[0]))
    h = np.array([_krr(K, synth.y, Kc, v) for v in lam])
    assert shrinks_to_zero(lam, np.abs(h - h[0])) == []


# -------------------------------------------------------------- counterexample

def _float_enumeration(carrier):
    W = np.array([-4, -3, 3, 4]) / np.sqrt(12.5)
    wp = np.where(np.abs(np.array([-4, -3, 3, 4])) == carrier, np.sqrt(2), 0.0)
    return W, wp


@pytest.mark.parametrize("case,carrier", [("ThreeMass", 3), ("FourMass", 4)])
def test_counterexample_against_float_enumeration(case, carrier):
    W, wp = _float_enumeration(carrier)
    exact = counterexample_expectation(case)
    assert abs(float(exact) - np.mean(wp**2 / W**2)) < 1e-14
    mom = counterexample_moments(case)
    assert mom["E[W]"][0] == 0 and mom["E[w_perp W]"][0] == 0
    assert mom["E[W^2]"] == 1 and mom["E[w_perp^2]"] == 1


def test_counterexample_values():
    assert counterexample_expectation("ThreeMass") == Fraction(25, 18)
    assert counterexample_expectation("FourMass") == Fraction(25, 32)
    with pytest.raises(ValueError):
        counterexample_expectation("FiveMass")


def test_uncorrelated_but_nonzero_expectation_term():
    # N = 1, D = 2 with i.i.d. coordinates (a_j, b_j): a_j uniform on
    # {-4, -3, 3, 4} / sqrt(12.5), b_j = sqrt(2) sgn(a_j) if |a_j| = 3 and
    # -(3 sqrt(2) / 4) sgn(a_j) otherwise, so E[a_j b_j] = 0.
    # The term is sum_j a_j b_j / sum_j a_j^2 and its mean is 35/192.
    def coord(q):
        a2 = Fraction(q * q) / Fraction(25, 2)
        ab = Fraction(6, 5) if abs(q) == 3 else Fraction(-6, 5)
        return a2, ab

    vals = [-4, -3, 3, 4]
    assert sum(coord(q)[1] for q in vals) == 0
    total = sum(
        (coord(p)[1] + coord(q)[1]) / (coord(p)[0] + coord(q)[0]) for p, q in product(vals, vals)
    ) / 16
    assert total == Fraction(35, 192)
    # float cross-check of the construction
    a = np.array(vals) / np.sqrt(12.5)
    b = np.where(np.abs(vals) == 3, np.sqrt(2), -3 * np.sqrt(2) / 4) * np.sign(vals)
    assert abs(np.mean(a * b)) < 1e-15
    terms = [(a[i] * b[i] + a[j] * b[j]) / (a[i] ** 2 + a[j] ** 2) for i in range(4) for j in range(4)]
    assert abs(np.mean(terms) - 35 / 192) < 1e-14


# ------------------------------------------------------------------ underparam

def _random_spd(rng, n, scale=1.0):
    A = rng.standard_normal((n, n))
    return scale * (A @ A.T / n + 0.1 * np.eye(n))


def test_block_matrix_matches_woodbury(rng):
    n, N = 7, 4
    G = np.linalg.cholesky(_random_spd(rng, n)).T
    B = _random_spd(rng, n, scale=0.05)
    Kt, norm = transformed_block_matrix(G, B, N)
    Rt = G[:, :N]
    ref = G.T @ np.linalg.inv(np.linalg.inv(B) - Rt @ Rt.T) @ G
    assert norm < 1 and np.allclose(Kt, ref, rtol=1e-8, atol=1e-10)


def test_unit_transform_reduces_to_krr_unit_ridge(rng):
    n, N = 6, 4
    K = _random_spd(rng, n)
    G = np.linalg.cholesky(K).T
    Rt = G[:, :N]
    B = np.linalg.inv(np.eye(n) + Rt @ Rt.T)  # A~ = I
    Kt, _ = transformed_block_matrix(G, B, N)
    assert np.allclose(Kt, K, atol=1e-10)


def test_contraction_violation(rng):
    G = np.linalg.cholesky(_random_spd(rng, 5)).T
    with pytest.raises(ContractionViolated):
        transformed_block_matrix(G, 100 * np.eye(5), 3)


def test_underparam_equals_mean_least_squares():
    data = synth_dataset(1, N=5, N_test=4)
    fc = feature_config("softplus", D=2)
    spec = KernelSpec.limiting(fc, n_mc_samples=10**5)
    res = underparam_transformed_kernel(fc, data, data.X_test, 300, seed=8, kernel_spec=spec)
    preds = []
    for m in range(300):
        draw = sample_features(fc, 1, member_seed(8, m))
        theta, _ = fit_min_norm(feature_matrix(draw, data.X), data.y)
        preds.append(feature_matrix(draw, data.X_test) @ theta / np.sqrt(2))
    preds = np.array(preds)
    assert np.allclose(res.predictions, preds.mean(axis=0), rtol=1e-6, atol=1e-8)
    assert np.allclose(res.prediction_se, preds.std(axis=0, ddof=1) / np.sqrt(300), rtol=1e-6)
    assert np.linalg.eigvalsh(res.k_tilde_matrix).min() > -1e-9
    assert res.projection_norm < 1 and res.M == 300


def test_underparam_regime_check():
    data = synth_dataset(1, N=5, N_test=4)
    with pytest.raises(InvalidRegime):
        underparam_transformed_kernel(feature_config("relu", D=5), data, data.X_test, 3, seed=0)
