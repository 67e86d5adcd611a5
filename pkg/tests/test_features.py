import numpy as np
import pytest
from hypothesis import given, strategies as st

from rflab.errors import DimensionMismatch
from rflab.features import (
    ActivationSpec,
    FeatureConfig,
    WeightDistSpec,
    concatenate_draws,
    feature_matrix,
    member_seed,
    sample_features,
)

from conftest import feature_config


def test_same_seed_same_draw():
    cfg = feature_config(D=50)
    a, b = sample_features(cfg, 3, 17), sample_features(cfg, 3, 17)
    assert np.array_equal(a.omega, b.omega)


def test_normal_moments():
    D = 10**5
    om = sample_features(feature_config(D=D, bias_augment=False), 1, 4).omega[:, 0]
    assert abs(om.mean()) < 5 / np.sqrt(D)
    assert abs(om.var() - 1.0) < 5 * np.sqrt(2 / D)


def test_adjacent_seeds_uncorrelated():
    cfg = feature_config(D=5000)
    a = sample_features(cfg, 1, 100).omega.ravel()
    b = sample_features(cfg, 1, 101).omega.ravel()
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_identity_features_reproduce_inputs():
    cfg = FeatureConfig(WeightDistSpec(), ActivationSpec("identity"), 3, bias_augment=False)
    draw = sample_features(cfg, 3, 0)
    draw = type(draw)(omega=np.eye(3), config=cfg, seed=0)
    X = np.arange(12.0).reshape(4, 3)
    assert np.array_equal(feature_matrix(draw, X), X)


def test_relu_nonnegative(rng):
    draw = sample_features(feature_config(D=100), 2, 1)
    assert (feature_matrix(draw, rng.standard_normal((30, 2))) >= 0).all()


@given(st.floats(0.1, 20.0), st.lists(st.floats(-50, 50), min_size=1, max_size=30))
def test_softplus_above_relu_within_log2(beta, zs):
    z = np.array(zs)
    sp = ActivationSpec("softplus", beta)(z)
    relu = np.maximum(z, 0)
    assert (sp >= relu).all()
    assert (sp - relu <= np.log(2) / beta + 1e-12).all()


def test_softplus_stable_for_large_inputs():
    out = ActivationSpec("softplus", 1.0)(np.array([-800.0, 800.0]))
    assert np.isfinite(out).all() and out[1] == 800.0


def test_dimension_mismatch():
    draw = sample_features(feature_config(D=5), 2, 0)
    with pytest.raises(DimensionMismatch):
        feature_matrix(draw, np.zeros((3, 4)))


def test_member_seed_no_collisions():
    seeds = {member_seed(7, i) for i in range(10**4 + 1)}
    assert len(seeds) == 10**4 + 1
    assert member_seed(7, 0) != member_seed(7, 1)
    assert member_seed(7, 5) == member_seed(7, 5)


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**32))
def test_member_seed_is_u64(base, idx):
    assert 0 <= member_seed(base, idx) < 2**64


def test_concatenate_draws():
    cfg = feature_config(D=4)
    draws = [sample_features(cfg, 2, s) for s in range(3)]
    big = concatenate_draws(draws)
    assert big.D == 12 and big.config.D == 12
    assert np.array_equal(big.omega[4:8], draws[1].omega)


@pytest.mark.parametrize("kwargs", [
    {"kind": "uniform", "lo": 1.0, "hi": 1.0},
    {"kind": "laplace", "scale": 0.0},
    {"kind": "cauchy"},
])
def test_weight_dist_validation(kwargs):
    with pytest.raises(ValueError):
        WeightDistSpec(**kwargs)


def test_activation_validation():
    with pytest.raises(ValueError):
        ActivationSpec("softplus", 0.0)
    with pytest.raises(ValueError):
        FeatureConfig(D=0)
