"""Transformed kernel of the infinite underparameterized (D < N) ensemble.

Let ``G`` be the upper Cholesky factor of the kernel matrix on the training
points followed by the test points, ``R~`` its first ``N`` columns and
``c~_t`` the column of test point ``t``. With ``W~ = G^{-T} Phi_full`` and
``Phi = R~^T W~`` the training features,

    B      = E[W~ (Phi^T Phi)^{-1} W~^T]
    E[P_W] = R~^T B R~
    A~^{-1} = B + B R~ (I - E[P_W])^{-1} R~^T B

and the block matrix ``G^T A~^{-1} G`` is the Gram matrix of a kernel
``k~`` under which KRR with unit ridge reproduces the ensemble.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .._stats import StreamingMoments
from ..errors import ContractionViolated, InvalidRegime, SolverFailure
from ..features import feature_matrix, member_seed, sample_features
from ..kernels import KernelSpec, cholesky_with_jitter, solve_upper_t

CONTRACTION_MARGIN = 1e-6


@dataclass(frozen=True, eq=False)
class UnderparamResult:
    k_tilde_matrix: np.ndarray
    predictions: np.ndarray
    prediction_se: np.ndarray
    projection_norm: float
    M: int
    jitter_used: float


def transformed_block_matrix(G, B, N):
    """``G^T A~^{-1} G`` for ``A~^{-1} = B + B R~ (I - R~^T B R~)^{-1} R~^T B``.

    Raises ContractionViolated if ``|R~^T B R~|_2 >= 1 - 1e-6``.
    """
    Rt = G[:, :N]
    BR = B @ Rt
    P = Rt.T @ BR
    P = 0.5 * (P + P.T)
    norm = float(np.linalg.norm(P, 2))
    if norm >= 1.0 - CONTRACTION_MARGIN:
        raise ContractionViolated(f"|E[P_W]|_2 = {norm:.8f} is not a contraction")
    A_inv = B + BR @ linalg.solve(np.eye(N) - P, BR.T, assume_a="sym")
    A_inv = 0.5 * (A_inv + A_inv.T)
    Kt = G.T @ A_inv @ G
    return 0.5 * (Kt + Kt.T), norm


def underparam_transformed_kernel(feature_config, data, X_star, M_mc, seed, kernel_spec=None):
    """Monte-Carlo ``k~`` Gram matrix and its unit-ridge KRR predictions.

    Returns
    -------
    UnderparamResult
        ``k_tilde_matrix`` is ``(N+T) x (N+T)`` with the training points first;
        ``predictions`` is ``k~_{*N} (K~_NN + I)^{-1} y``. ``prediction_se``
        is the MC standard error of the same quantity, which for a finite
        sample equals the mean of per-draw least-squares predictions.
    """
    N, D = data.N, feature_config.D
    if D >= N:
        raise InvalidRegime(f"transformed kernel needs D < N (D={D}, N={N})")
    X_star = np.atleast_2d(np.asarray(X_star, dtype=np.float64))
    T = X_star.shape[0]
    XX = np.vstack([data.X, X_star])
    spec = kernel_spec or KernelSpec.limiting(feature_config)
    G, jitter = cholesky_with_jitter(spec(XX))
    y = np.asarray(data.y, dtype=np.float64)

    acc_B = StreamingMoments()
    acc_pred = StreamingMoments()
    for m in range(M_mc):
        draw = sample_features(feature_config, data.p, member_seed(seed, m))
        Wt = solve_upper_t(G, feature_matrix(draw, XX))
        Phi = G[:, :N].T @ Wt
        try:
            F = linalg.cho_factor(Phi.T @ Phi, lower=False, check_finite=False)
        except linalg.LinAlgError:
            # e.g. a ReLU feature that is inactive on every training point
            raise SolverFailure(f"draw {m}: Phi^T Phi is singular") from None
        Bm = Wt @ linalg.cho_solve(F, Wt.T, check_finite=False)
        acc_B.push(Bm.ravel())
        acc_pred.push(G[:, N:].T @ (Bm @ (G[:, :N] @ y)))
    n, B, _ = acc_B.result()
    B = B.reshape(N + T, N + T)
    B = 0.5 * (B + B.T)
    Kt, norm = transformed_block_matrix(G, B, N)
    pred = Kt[N:, :N] @ linalg.solve(Kt[:N, :N] + np.eye(N), y, assume_a="pos")
    _, _, var = acc_pred.result()
    return UnderparamResult(
        k_tilde_matrix=Kt,
        predictions=pred,
        prediction_se=np.sqrt(var / n),
        projection_norm=norm,
        M=int(n),
        jitter_used=jitter,
    )
