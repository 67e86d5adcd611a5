"""
Demo: single-model variance divided by the GP posterior variance along a 1-D grid.

For Gaussian features the ratio is flat; for ReLU features it is not.
"""

import numpy as np

from rflab.analysis import ratio_spread, variance_vs_gp_profile
from rflab.data import synth_dataset
from rflab.features import ActivationSpec, FeatureConfig, WeightDistSpec


def main():
    data = synth_dataset(seed=0, N=6, N_test=10)
    fc = FeatureConfig(WeightDistSpec("normal"), ActivationSpec("relu"), D=200, bias_augment=True)
    grid = np.linspace(-5, 5, 11)
    relu = variance_vs_gp_profile(fc, data, grid, M=2000, seed=0)
    gauss = variance_vs_gp_profile(fc, data, grid, M=2000, seed=0, gaussian=True)

    print("   x*     ReLU ratio   Gaussian ratio")
    for a, b in zip(relu, gauss):
        print(f"{a['x_star'][0]:5.1f}   {a['ratio']:10.4f}   {b['ratio']:14.4f}")
    print("ReLU:", ratio_spread(relu))
    print("Gaussian:", ratio_spread(gauss))


if __name__ == "__main__":
    main()
