"""
Demo: an ensemble of ridgeless RF regressors against the limiting kernel regressor.

Uses ReLU features so the kernel is the closed-form arc-cosine kernel.
"""

import numpy as np

from rflab.data import housing_like_dataset
from rflab.ensembles import EnsembleConfig, mc_infinite_ensemble
from rflab.features import ActivationSpec, FeatureConfig, WeightDistSpec
from rflab.kernels import KernelSpec
from rflab.regressors import fit_kernel_regressor, predict_kernel


def main():
    data = housing_like_dataset(seed=0, N=12, N_test=200)
    fc = FeatureConfig(WeightDistSpec("normal"), ActivationSpec("relu"), D=200, bias_augment=True)

    # the D -> infinity limit of a single model
    spec = KernelSpec.limiting(fc)
    kernel_pred = predict_kernel(fit_kernel_regressor(spec, data.X, data.y), data.X_test)

    for M in (100, 1000, 4000):
        ens = mc_infinite_ensemble(EnsembleConfig(fc, M, 0.0, base_seed=1), data.X, data.y, data.X_test)
        z = (ens.mean - kernel_pred) / ens.mc_standard_error
        print(f"M={M:5d}  mean |diff|={np.abs(ens.mean - kernel_pred).mean():.5f}  "
              f"within 5 SE: {np.mean(np.abs(z) < 5):.3f}")


if __name__ == "__main__":
    main()
