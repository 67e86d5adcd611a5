"""
Demo: the exact two-point-mass construction where the single-model variance
is no longer a function of r_perp alone.
"""

from rflab.analysis import CASES, counterexample_expectation, counterexample_moments


def main():
    for case in CASES:
        moments = counterexample_moments(case)
        value = counterexample_expectation(case)
        print(f"{case}: E[w_perp^2 / W^2] = {value} = {float(value):.6f}")
        print(f"    E[W^2] = {moments['E[W^2]']}, E[w_perp^2] = {moments['E[w_perp^2]']}")


if __name__ == "__main__":
    main()
