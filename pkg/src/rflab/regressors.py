"""Ridge(less) random-feature regressors and (ridge(less)) kernel regressors.

RF models use the ``1/sqrt(D)`` output scaling

    h(x) = phi(x)^T theta / sqrt(D),
    theta = Phi^T ((1/D) Phi Phi^T + lam I)^{-1} y / sqrt(D),

solved in the N x N dual. The ridgeless fit is the same formula with a small
stabilizing ridge ``RIDGELESS_JITTER``; if that Gram matrix still will not
factor, a rank-revealing SVD least-squares solve (gelsd) takes over.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ConditioningFailure, DimensionMismatch, SolverFailure
from .features import feature_matrix
from .kernels import cho_solve_upper, cholesky_with_jitter

RIDGELESS_JITTER = 1e-8
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class FitDiagnostics:
    residual_norm: float
    effective_rank: int
    jitter: float = 0.0
    route: str = "cholesky"


@dataclass(frozen=True, eq=False)
class TrainedRFModel:
    draw: object
    theta: np.ndarray
    lam: float
    diagnostics: FitDiagnostics


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise SolverFailure("non-finite values in regression inputs")


def _lstsq_min_norm(A, y):
    """Minimum-norm least-squares solution of ``A x = y`` via gelsd."""
    x, _, rank, sv = linalg.lstsq(A, y, cond=RANK_RTOL, lapack_driver="gelsd", check_finite=False)
    return x, int(rank)


def _dual_solve(Phi, y, shift):
    """Solve ``((1/D) Phi Phi^T + shift I) alpha = y``; returns ``(alpha, route, rank, jitter)``."""
    N, D = Phi.shape
    G = (Phi @ Phi.T) / D
    G = 0.5 * (G + G.T)
    G[np.diag_indices(N)] += shift
    try:
        R, extra = cholesky_with_jitter(G)
    except ConditioningFailure:
        R = None
    if R is not None:
        return cho_solve_upper(R, y), "cholesky", N, float(shift + extra)
    # gram not factorizable: SVD route on the same shifted system
    alpha, rank = _lstsq_min_norm(G, y)
    return alpha, "svd", rank, float(shift)


def fit_min_norm(Phi, y, jitter=RIDGELESS_JITTER):
    """Minimum-norm interpolating coefficients (ridgeless RF regression).

    For ``D > N`` returns ``Phi^T ((1/D) Phi Phi^T + jitter I)^{-1} y / sqrt(D)``.
    For ``D <= N`` (underparameterized) returns the least-squares solution of
    ``Phi theta / sqrt(D) = y`` with minimum norm among minimizers.

    Returns
    -------
    theta : ndarray of shape (D,)
    diagnostics : FitDiagnostics
    """
    Phi = np.asarray(Phi, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_finite(Phi, y)
    N, D = Phi.shape
    if y.shape != (N,):
        raise DimensionMismatch(f"y has shape {y.shape}, expected ({N},)")
    sqrt_d = np.sqrt(D)
    if D <= N:
        theta, rank = _lstsq_min_norm(Phi / sqrt_d, y)
        route, used = "svd", 0.0
    else:
        alpha, route, rank, used = _dual_solve(Phi, y, jitter)
        theta = Phi.T @ alpha / sqrt_d
    resid = float(np.linalg.norm(Phi @ theta / sqrt_d - y))
    return theta, FitDiagnostics(resid, rank, used, route)


def fit_ridge(Phi, y, lam):
    """Ridge RF coefficients minimizing ``|Phi theta / sqrt(D) - y|^2 + lam |theta|^2``."""
    if not lam > 0:
        raise ValueError("fit_ridge needs lam > 0; use fit_min_norm for the ridgeless case")
    Phi = np.asarray(Phi, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_finite(Phi, y)
    N, D = Phi.shape
    if y.shape != (N,):
        raise DimensionMismatch(f"y has shape {y.shape}, expected ({N},)")
    alpha, route, rank, used = _dual_solve(Phi, y, lam)
    theta = Phi.T @ alpha / np.sqrt(D)
    resid = float(np.linalg.norm(Phi @ theta / np.sqrt(D) - y))
    return theta, FitDiagnostics(resid, rank, used, route)


def fit_ridge_primal(Phi, y, lam):
    """Ridge coefficients from the D x D normal equations (reference route)."""
    Phi = np.asarray(Phi, dtype=np.float64)
    D = Phi.shape[1]
    A = Phi.T @ Phi / D + lam * np.eye(D)
    return linalg.solve(A, Phi.T @ y / np.sqrt(D), assume_a="pos")


def fit_rf(draw, X, y, lam=0.0):
    """Fit an RF model on a fixed feature draw; ``lam == 0`` is the ridgeless fit."""
    Phi = feature_matrix(draw, X)
    if lam > 0:
        theta, diag = fit_ridge(Phi, y, lam)
    else:
        theta, diag = fit_min_norm(Phi, y)
    return TrainedRFModel(draw=draw, theta=theta, lam=float(lam), diagnostics=diag)


def predict_rf(model, X_star):
    """``phi(x*)^T theta / sqrt(D)`` for every row of ``X_star``."""
    Phi_star = feature_matrix(model.draw, X_star)
    if Phi_star.shape[1] != model.theta.shape[0]:
        raise DimensionMismatch("feature draw and coefficients disagree on D")
    return Phi_star @ model.theta / np.sqrt(model.theta.shape[0])


@dataclass(frozen=True, eq=False)
class KernelRegressor:
    """Kernel ridge(less) regressor; ``alpha`` solves ``(K + lam_eff I) alpha = y``."""

    spec: object
    X_train: np.ndarray
    alpha: np.ndarray
    lam: float
    jitter_used: float = 0.0
    R: np.ndarray = field(default=None, repr=False)

    @property
    def lam_eff(self):
        return self.lam + self.jitter_used


def fit_kernel_regressor(spec, X, y, lam=0.0, K=None):
    """Fit ``alpha = (K + lam' I)^{-1} y`` by Cholesky, ``lam' = lam + jitter``.

    ``K`` may be passed to reuse a precomputed kernel matrix (e.g. an expensive
    Monte-Carlo estimate).
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    K = spec(X) if K is None else np.asarray(K, dtype=np.float64)
    A = K + lam * np.eye(K.shape[0])
    R, jitter = cholesky_with_jitter(A)
    alpha = cho_solve_upper(R, y)
    return KernelRegressor(spec=spec, X_train=X, alpha=alpha, lam=float(lam), jitter_used=jitter, R=R)


def predict_kernel(reg, X_star, K_cross=None):
    """``k_N(x*)^T alpha``; ``K_cross`` (N x T) may be supplied precomputed."""
    if K_cross is None:
        K_cross = reg.spec(reg.X_train, X_star)
    return np.asarray(K_cross).T @ reg.alpha
