import numpy as np
import pytest
from hypothesis import settings

from rflab.data import housing_like_dataset, synth_dataset
from rflab.features import ActivationSpec, FeatureConfig, WeightDistSpec

settings.register_profile("rflab", deadline=None, max_examples=40)
settings.load_profile("rflab")


def feature_config(activation="relu", D=200, bias_augment=True, beta=1.0):
    return FeatureConfig(WeightDistSpec("normal"), ActivationSpec(activation, beta), D, bias_augment)


@pytest.fixture
def synth():
    return synth_dataset(0, N=6, N_test=40)


@pytest.fixture
def housing():
    return housing_like_dataset(0, N=12, N_test=60, n_rows=300)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
