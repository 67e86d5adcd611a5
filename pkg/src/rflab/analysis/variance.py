"""Single-model variance: the Gaussian-feature formula and its failure for ReLU.

With Gaussian features the variance of one ridgeless RF prediction at ``x*``
is ``r_perp^2 * y^T K^{-1} y / (D - N - 1)``, so it depends on ``x*`` only
through the GP posterior variance ``r_perp^2``. Realistic features break
this, which :func:`variance_vs_gp_profile` makes visible.
"""

import numpy as np

from .._stats import StreamingMoments
from ..errors import InvalidRegime
from ..features import make_rng, member_seed, sample_features, feature_matrix
from ..kernels import KernelSpec, kernel_matrix, posterior_variances, solve_upper_t
from ..regressors import fit_min_norm


def gaussian_variance_formula(R, y, r_perp, D, N):
    """``r_perp^2 * |R^{-T} y|^2 / (D - N - 1)``.

    Only ``R``, ``y``, ``r_perp`` and the sizes enter; the test point is
    seen through ``r_perp`` alone.
    """
    if D <= N + 1:
        raise InvalidRegime(f"variance formula needs D > N + 1 (D={D}, N={N})")
    z = solve_upper_t(R, np.asarray(y, dtype=np.float64))
    return float(r_perp) ** 2 * float(z @ z) / (D - N - 1)


def _whitened_grid(spec, X, X_star):
    km = kernel_matrix(spec, X)
    C = solve_upper_t(km.R, spec(X, X_star))  # column t is c for x*_t
    r2 = posterior_variances(spec, X, X_star, km=km)
    return km, C, np.sqrt(r2), r2


def gaussian_feature_predictions(R, C, r_perp, y, D, M, seed):
    """Member predictions of Gaussian-feature RF models at several test points.

    Per member, ``W`` (N x D) and one ``w_perp`` row per test point are drawn
    i.i.d. standard normal; the model is then fitted on ``Phi = R^T W`` and
    evaluated at ``phi*_t = W^T c_t + r_perp_t w_perp_t``. Test points share
    ``W``, so each column has the exact single-point law.

    Returns an ``(M, T)`` array.
    """
    N = R.shape[0]
    C = np.asarray(C, dtype=np.float64).reshape(N, -1)
    r_perp = np.asarray(r_perp, dtype=np.float64).reshape(-1)
    out = np.empty((M, C.shape[1]))
    for m in range(M):
        G = make_rng(member_seed(seed, m)).standard_normal((N + C.shape[1], D))
        W, w_perp = G[:N], G[N:]
        theta, _ = fit_min_norm(R.T @ W, y)
        Phi_star = C.T @ W + r_perp[:, None] * w_perp
        out[m] = Phi_star @ theta / np.sqrt(D)
    return out


def _member_moments(predict_member, M):
    acc = StreamingMoments()
    for m in range(M):
        acc.push(predict_member(m))
    return acc.result()


def variance_vs_gp_profile(feature_config, data, grid, M, seed, gaussian=False, kernel_spec=None):
    """Member variance against ``r_perp^2`` along a grid of test points.

    Parameters
    ----------
    feature_config : FeatureConfig
        Law of the RF members (and, via its limiting kernel, of ``r_perp``).
    data : Dataset
        Training set; only ``X`` and ``y`` are used.
    grid : array_like
        Test points, one per row (a 1-D array is read as scalar inputs).
    gaussian : bool
        Replace the members by Gaussian-feature models with the same kernel.

    Returns
    -------
    list of dict
        Rows with ``x_star`` (the grid row), ``ensemble_variance``,
        ``r_perp_sq`` and ``ratio`` (``nan`` where ``r_perp_sq == 0``).
    """
    if M < 2:
        raise ValueError("need M >= 2 members for a variance")
    grid = np.asarray(grid, dtype=np.float64)
    grid = grid.reshape(-1, data.p) if grid.ndim < 2 else grid
    spec = kernel_spec or KernelSpec.limiting(feature_config)
    km, C, r, r2 = _whitened_grid(spec, data.X, grid)
    D = feature_config.D
    if gaussian:
        preds = gaussian_feature_predictions(km.R, C, r, data.y, D, M, seed)
        _, _, var = _member_moments(lambda m: preds[m], M)
    else:
        def member(m):
            draw = sample_features(feature_config, data.p, member_seed(seed, m))
            theta, _ = fit_min_norm(feature_matrix(draw, data.X), data.y)
            return feature_matrix(draw, grid) @ theta / np.sqrt(D)

        _, _, var = _member_moments(member, M)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(r2 > 0, var / r2, np.nan)
    return [
        {"x_star": grid[i].copy(), "ensemble_variance": float(var[i]),
         "r_perp_sq": float(r2[i]), "ratio": float(ratio[i])}
        for i in range(grid.shape[0])
    ]


def ratio_spread(rows):
    """Coefficient of variation and max/min of the finite ``ratio`` entries."""
    ratio = np.array([row["ratio"] for row in rows], dtype=np.float64)
    ratio = ratio[np.isfinite(ratio)]
    if ratio.size == 0:
        raise ValueError("no finite ratios")
    return {
        "cv": float(ratio.std() / ratio.mean()),
        "max_over_min": float(ratio.max() / ratio.min()),
    }
