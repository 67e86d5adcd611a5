"""Monte-Carlo samples of the whitened expectation term.

For one feature draw with whitened features ``W = R^{-T} Phi`` and
``w_perp`` at a test point, the infinite ensemble differs from the kernel
regressor only through the mean of

    w_perp^T W^T (W W^T + D lam R^{-T} R^{-1})^{-1}          (an N-vector),

which is ``lam = 0`` for the ridgeless case. These helpers sample that
vector draw by draw so its mean can be compared against zero.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..errors import DegenerateTestPoint, InvalidRegime, SolverFailure
from ..features import feature_matrix, make_rng, member_seed, sample_features
from ..kernels import KernelSpec, extend_whiten, kernel_matrix, solve_upper, solve_upper_t

# relative to the scale of W W^T, whose expectation is D * I
TERM_JITTER_REL = 1e-8
MAX_DROP_FRACTION = 1e-3


@dataclass(frozen=True)
class ExpectationTermSample:
    value: np.ndarray
    draw_seed: int


@dataclass(frozen=True, eq=False)
class ExpectationTermSamples:
    """Kept samples (rows of ``values``) with their seeds and the drop count."""

    values: np.ndarray
    draw_seeds: np.ndarray
    n_dropped: int

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i):
        return ExpectationTermSample(self.values[i], int(self.draw_seeds[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def mean(self):
        return self.values.mean(axis=0)

    def standard_error(self):
        return self.values.std(axis=0, ddof=1) / np.sqrt(len(self))

    def z_scores(self):
        return self.mean() / self.standard_error()


def term_value(W, w_perp, ridge_matrix=None, jitter_rel=TERM_JITTER_REL):
    """``w_perp^T W^T (W W^T [+ ridge_matrix] + jitter I)^{-1}`` for one draw."""
    N, D = W.shape
    A = W @ W.T
    if ridge_matrix is not None:
        A = A + ridge_matrix
    A[np.diag_indices(N)] += jitter_rel * D
    factor = linalg.cho_factor(A, lower=False, check_finite=False)
    return linalg.cho_solve(factor, W @ w_perp, check_finite=False)


def _whitening(feature_config, X, x_star, kernel_spec):
    spec = kernel_spec or KernelSpec.limiting(feature_config)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    x_star = np.atleast_2d(np.asarray(x_star, dtype=np.float64))
    km = kernel_matrix(spec, X)
    ws = extend_whiten(km.R, spec(X, x_star)[:, 0], float(spec.diag(x_star)[0]))
    if ws.r_perp < 1e-12:
        raise DegenerateTestPoint("test point is in the span of the training points")
    return X, x_star, ws


def _collect(sample_one, M, seed):
    values, seeds, dropped = [], [], 0
    for m in range(M):
        s = member_seed(seed, m)
        try:
            v = sample_one(s)
        except (linalg.LinAlgError, np.linalg.LinAlgError):
            v = None
        if v is None or not np.all(np.isfinite(v)):
            dropped += 1
            continue
        values.append(v)
        seeds.append(s)
    if dropped > MAX_DROP_FRACTION * M:
        raise SolverFailure(f"{dropped} of {M} draws were non-finite (limit {MAX_DROP_FRACTION:.1%})")
    return ExpectationTermSamples(np.array(values), np.array(seeds, dtype=np.uint64), dropped)


def ridge_expectation_term_samples(feature_config, X, x_star, lam, M, seed, kernel_spec=None):
    """Samples of ``w_perp^T W^T (W W^T + D lam R^{-T} R^{-1})^{-1}``.

    ``lam = 0`` gives exactly :func:`expectation_term_samples`.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    X, x_star, ws = _whitening(feature_config, X, x_star, kernel_spec)
    N, D = X.shape[0], feature_config.D
    if D <= N:
        raise InvalidRegime("expectation term needs D > N")
    ridge = None
    if lam > 0:
        R_inv = solve_upper(ws.R, np.eye(N))
        ridge = D * lam * solve_upper_t(ws.R, R_inv)  # D lam R^{-T} R^{-1}
        ridge = 0.5 * (ridge + ridge.T)
    XX = np.vstack([X, x_star])

    def sample_one(s):
        F = feature_matrix(sample_features(feature_config, X.shape[1], s), XX)
        W = solve_upper_t(ws.R, F[:N])
        w_perp = (F[N] - W.T @ ws.c) / ws.r_perp
        return term_value(W, w_perp, ridge)

    return _collect(sample_one, M, seed)


def expectation_term_samples(feature_config, X, x_star, M, seed, kernel_spec=None):
    """Samples of ``w_perp^T W^T (W W^T)^{-1}`` (jitter-stabilized), one per draw."""
    return ridge_expectation_term_samples(feature_config, X, x_star, 0.0, M, seed, kernel_spec)


def gaussian_expectation_term_samples(N, D, M, seed):
    """Same term with ``[W; w_perp]`` sampled i.i.d. standard normal."""

    def sample_one(s):
        G = make_rng(s).standard_normal((N + 1, D))
        return term_value(G[:N], G[N])

    return _collect(sample_one, M, seed)
