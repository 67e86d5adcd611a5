"""Continuity of kernel and ensemble predictions along the ridge path.

For ``lam, lam' >= 0`` the kernel ridge regressors satisfy

    |h_lam(x*) - h_lam'(x*)| <= sqrt(n) C1 |lam' - lam| |K^{-2} y|

whenever ``|k(x_i, x*)| <= C1`` for all training points, because
``(K + lam I)^{-1} (K + lam' I)^{-1}`` is dominated by ``K^{-2}``.
"""

from dataclasses import dataclass

import numpy as np

from ..ensembles import EnsembleConfig, mc_infinite_ensemble
from ..kernels import KernelSpec, cho_solve_upper, cholesky_with_jitter
from ..regressors import fit_kernel_regressor, predict_kernel

JUMP_FACTOR = 3.0
REFINE_RATIO = 0.1


def krr_lipschitz_bound(K, y, lam, lam_prime, C1, n):
    """``sqrt(n) * C1 * |lam' - lam| * |K^{-2} y|`` using two Cholesky solves."""
    if lam < 0 or lam_prime < 0:
        raise ValueError("ridge parameters must be >= 0")
    if C1 < 0:
        raise ValueError("C1 must be >= 0")
    R, _ = cholesky_with_jitter(np.asarray(K, dtype=np.float64))
    v = cho_solve_upper(R, cho_solve_upper(R, np.asarray(y, dtype=np.float64)))
    return float(np.sqrt(n) * C1 * abs(lam_prime - lam) * np.linalg.norm(v))


def kernel_bound_constants(spec, X, X_star):
    """Per-test-point ``C1 = max_i |k(x_i, x*)|`` (tightest valid constant)."""
    return np.abs(spec(X, X_star)).max(axis=0)


@dataclass(frozen=True, eq=False)
class RidgePathReport:
    """Ridge-path differences; arrays are indexed ``[lambda, test point]``.

    ``krr_diffs`` is ``|h_lam - h_0|`` for the kernel regressor, ``ens_diffs``
    the same for the MC ensemble mean, and ``bound_values`` the Lipschitz
    bound for the pair ``(0, lam)``.
    """

    lambdas: np.ndarray
    krr_diffs: np.ndarray
    ens_diffs: np.ndarray
    bound_values: np.ndarray
    ens_mc_se: np.ndarray

    def bound_violations(self):
        return int(np.sum(self.krr_diffs > self.bound_values))


def ensemble_lipschitz_diagnostic(feature_config, data, X_star, lambda_grid, M, seed, kernel_spec=None):
    """Evaluate both ridge-path curves on ``lambda_grid`` (which must contain 0).

    Every ``lambda`` reuses the same member seeds, so the ensemble curve is a
    smooth function of ``lambda`` for a fixed set of draws.
    """
    lambdas = np.asarray(sorted(float(v) for v in lambda_grid))
    if lambdas.size == 0 or lambdas[0] != 0.0:
        raise ValueError("lambda_grid must include 0")
    X_star = np.atleast_2d(np.asarray(X_star, dtype=np.float64))
    spec = kernel_spec or KernelSpec.limiting(feature_config)
    K = spec(data.X)
    K_cross = spec(data.X, X_star)
    C1 = np.abs(K_cross).max(axis=0)
    krr, ens, se = [], [], []
    for lam in lambdas:
        reg = fit_kernel_regressor(spec, data.X, data.y, lam, K=K)
        krr.append(predict_kernel(reg, None, K_cross))
        res = mc_infinite_ensemble(EnsembleConfig(feature_config, M, lam, seed), data.X, data.y, X_star)
        ens.append(res.mean)
        se.append(res.mc_standard_error)
    krr, ens = np.array(krr), np.array(ens)
    bounds = np.array([
        [krr_lipschitz_bound(K, data.y, 0.0, lam, c, data.N) for c in C1] for lam in lambdas
    ])
    return RidgePathReport(
        lambdas=lambdas,
        krr_diffs=np.abs(krr - krr[0]),
        ens_diffs=np.abs(ens - ens[0]),
        bound_values=bounds,
        ens_mc_se=np.array(se),
    )


def path_jumps(lambdas, curve, factor=JUMP_FACTOR):
    """Indices of interior grid intervals whose secant slope exceeds
    ``factor`` times the larger of the two neighbouring secant slopes.

    End intervals have a one-sided neighbourhood only, where a steep but
    continuous start (e.g. ``sqrt``-like growth from ``lambda = 0``) cannot be
    told apart from a jump; :func:`shrinks_to_zero` covers the left end.
    ``curve`` is 1-D (one test point) or 2-D with lambdas along axis 0; a
    2-D input is checked column by column and the union of intervals returned.
    """
    lambdas = np.asarray(lambdas, dtype=np.float64)
    curve = np.asarray(curve, dtype=np.float64)
    curve = curve[:, None] if curve.ndim == 1 else curve
    slopes = np.abs(np.diff(curve, axis=0)) / np.diff(lambdas)[:, None]
    bad = []
    for i in range(1, slopes.shape[0] - 1):
        local = np.maximum(slopes[i - 1], slopes[i + 1])
        # a flat segment next to another flat one is not a jump
        if np.any(slopes[i] > factor * local + 1e-15):
            bad.append(i)
    return bad


def refinement_grid(lam1, lam_floor):
    """``[0, lam1 2^-L, ..., lam1 / 2, lam1]`` with ``L`` the smallest level
    reaching ``lam_floor``.

    Choose ``lam_floor`` well below the smallest kernel eigenvalue: only there
    does the ridge path enter its linear regime.
    """
    if not 0 < lam_floor < lam1:
        raise ValueError("need 0 < lam_floor < lam1")
    levels = int(np.ceil(np.log2(lam1 / lam_floor)))
    return [0.0] + [lam1 * 2.0 ** -k for k in range(levels, -1, -1)]


def shrinks_to_zero(lambdas, curve, max_ratio=REFINE_RATIO, atol=1e-12):
    """Continuity at the first grid point by refinement.

    ``curve[0]`` is the reference value (0 for both ridge-path curves). Per
    column, ``|curve[1] - curve[0]|`` at the finest point must be at most
    ``max_ratio`` times the largest increment over the refinement. A jump at
    the left end keeps its size under refinement and fails this; the path
    need not be monotone. Returns the failing column indices.
    """
    lambdas = np.asarray(lambdas, dtype=np.float64)
    curve = np.asarray(curve, dtype=np.float64)
    curve = curve[:, None] if curve.ndim == 1 else curve
    if np.any(np.diff(lambdas) <= 0):
        raise ValueError("lambdas must be increasing")
    inc = np.abs(curve[1:] - curve[0])
    peak = inc.max(axis=0)
    return [int(t) for t in np.flatnonzero((peak > atol) & (inc[0] > max_ratio * peak))]
