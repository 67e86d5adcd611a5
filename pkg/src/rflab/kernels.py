"""Limiting kernels ``k(x, x') = E_omega[phi(omega, x) phi(omega, x')]``.

Closed forms exist for ReLU (arc-cosine kernel) and erf features under
standard-normal weights; every other feature law is handled by a
Monte-Carlo estimate with one shared feature draw per kernel spec.
All factorizations of kernel matrices go through :func:`cholesky_with_jitter`.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from ._parallel import ordered_map
from .errors import ConditioningFailure, DegenerateTestPoint
from .features import ActivationSpec, WeightDistSpec, augment, make_rng, member_seed

JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)
# reject factorizations whose smallest pivot is below this (relative to mean diag)
MIN_PIVOT_REL = 1e-14
DEGENERACY_TOL = 1e-12

_EPS = np.finfo(np.float64).eps


def _row_norms(A):
    return np.sqrt(np.einsum("ij,ij->i", A, A))


def arccos_matrix(A, B):
    """Arc-cosine (order 1) kernel between the rows of ``A`` and ``B``."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    norm_prod = np.outer(_row_norms(A), _row_norms(B))
    dots = A @ B.T
    nz = norm_prod > 0
    cos = np.zeros_like(dots)
    cos[nz] = dots[nz] / norm_prod[nz]
    np.clip(cos, -1.0, 1.0, out=cos)
    theta = np.arccos(cos)
    out = norm_prod * (np.sin(theta) + (np.pi - theta) * cos) / (2.0 * np.pi)
    out[~nz] = 0.0
    return out


def erf_matrix(A, B):
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    sa = 1.0 + 2.0 * np.einsum("ij,ij->i", A, A)
    sb = 1.0 + 2.0 * np.einsum("ij,ij->i", B, B)
    arg = 2.0 * (A @ B.T) / np.sqrt(np.outer(sa, sb))
    np.clip(arg, -1.0, 1.0, out=arg)
    return (2.0 / np.pi) * np.arcsin(arg)


def arc_cosine_kernel(x, x_prime):
    """``(1/2pi) |x||x'| (sin t + (pi - t) cos t)`` with ``t`` the angle between inputs."""
    return float(arccos_matrix(np.ravel(x)[None, :], np.ravel(x_prime)[None, :])[0, 0])


def erf_kernel(x, x_prime):
    return float(erf_matrix(np.ravel(x)[None, :], np.ravel(x_prime)[None, :])[0, 0])


@dataclass(frozen=True)
class KernelSpec:
    """Description of a limiting kernel.

    Parameters
    ----------
    kind : {"arccos", "erf", "empirical"}
        Closed-form kernel or Monte-Carlo estimate.
    activation, weight_dist
        Feature law estimated when ``kind == "empirical"``.
    n_mc_samples : int
        Number of weight draws for the empirical estimate.
    seed : int
        Seed of the shared weight draw.
    bias_augment : bool
        Prepend a constant 1 to every input before evaluation. Set this to
        match :attr:`FeatureConfig.bias_augment` when comparing with RF models.
    block_size : int
        Fixed partition of the MC draw; part of the result's identity.
    """

    kind: str = "arccos"
    activation: Optional[ActivationSpec] = None
    weight_dist: WeightDistSpec = field(default_factory=WeightDistSpec)
    n_mc_samples: int = 10**7
    seed: int = 0
    bias_augment: bool = False
    block_size: int = 8192

    def __post_init__(self):
        if self.kind not in ("arccos", "erf", "empirical"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "empirical":
            if self.activation is None:
                raise ValueError("empirical kernel needs an activation")
            if self.n_mc_samples < 1:
                raise ValueError("n_mc_samples must be >= 1")

    @classmethod
    def limiting(cls, feature_config, n_mc_samples=10**7, seed=0):
        """Kernel matching the law of one feature of ``feature_config``."""
        act, wd = feature_config.activation, feature_config.weight_dist
        if wd.kind == "normal" and act.kind == "relu":
            return cls("arccos", bias_augment=feature_config.bias_augment)
        if wd.kind == "normal" and act.kind == "erf":
            return cls("erf", bias_augment=feature_config.bias_augment)
        return cls(
            "empirical",
            activation=act,
            weight_dist=wd,
            n_mc_samples=n_mc_samples,
            seed=seed,
            bias_augment=feature_config.bias_augment,
        )

    def __call__(self, A, B=None):
        """Cross-kernel matrix between the rows of ``A`` and ``B`` (default ``A``)."""
        symmetric = B is None
        A = augment(A, self.bias_augment)
        B = A if symmetric else augment(B, self.bias_augment)
        if self.kind == "arccos":
            K = arccos_matrix(A, B)
        elif self.kind == "erf":
            K = erf_matrix(A, B)
        else:
            K = _empirical_blocks(self, A, None if symmetric else B)[0]
        return _mirror_upper(K) if symmetric else K

    def diag(self, X):
        """``k(x, x)`` for every row of ``X``."""
        X = augment(X, self.bias_augment)
        if self.kind == "arccos":
            return np.einsum("ij,ij->i", X, X) / 2.0
        if self.kind == "erf":
            s = 2.0 * np.einsum("ij,ij->i", X, X)
            return (2.0 / np.pi) * np.arcsin(np.clip(s / (1.0 + s), -1.0, 1.0))
        return _empirical_blocks(self, X, None, diag_only=True)[0]


def _mirror_upper(K):
    upper = np.triu(K)
    return upper + np.triu(K, 1).T


def _empirical_blocks(spec, A, B, diag_only=False, with_stderr=False):
    """Accumulate ``(1/n) sum_omega phi(omega, a) phi(omega, b)`` block by block.

    Block ``b`` uses weights seeded by ``member_seed(spec.seed, b)``; partial
    sums are reduced in block order so the result is independent of threads.
    """
    n = int(spec.n_mc_samples)
    bs = int(spec.block_size)
    dim = A.shape[1]
    n_blocks = -(-n // bs)
    act = spec.activation

    def block(b):
        size = min(bs, n - b * bs)
        omega = spec.weight_dist.sample(make_rng(member_seed(spec.seed, b)), (size, dim))
        FA = act(A @ omega.T)
        if diag_only:
            sq = FA * FA
            return sq.sum(axis=1), ((sq * sq).sum(axis=1) if with_stderr else None)
        FB = FA if B is None else act(B @ omega.T)
        S = FA @ FB.T
        S2 = (FA * FA) @ (FB * FB).T if with_stderr else None
        return S, S2

    total = total2 = None
    for S, S2 in ordered_map(block, range(n_blocks)):
        total = S if total is None else total + S
        if with_stderr:
            total2 = S2 if total2 is None else total2 + S2
    mean = total / n
    if not with_stderr:
        return mean, None
    if n < 2:
        return mean, np.full_like(mean, np.inf)
    var = np.maximum(total2 / n - mean * mean, 0.0) * (n / (n - 1))
    return mean, np.sqrt(var / n)


def empirical_kernel(activation, weight_dist, X_eval, n_samples, seed, bias_augment=False,
                     return_stderr=False, block_size=8192):
    """Monte-Carlo kernel matrix ``(1/n) Phi Phi^T`` on a fixed point list.

    With ``return_stderr`` the per-entry Monte-Carlo standard error (from the
    sample variance of the products) is returned as a second array.
    """
    spec = KernelSpec("empirical", activation=activation, weight_dist=weight_dist,
                      n_mc_samples=n_samples, seed=seed, bias_augment=bias_augment,
                      block_size=block_size)
    X = augment(X_eval, bias_augment)
    K, se = _empirical_blocks(spec, X, None, with_stderr=return_stderr)
    K = _mirror_upper(K)
    if return_stderr:
        return K, _mirror_upper(se)
    return K


def cholesky_with_jitter(K, ladder=JITTER_LADDER):
    """Upper Cholesky factor of ``K + jitter * I`` using the first rung that works.

    Jitter rungs are relative to the mean diagonal. Returns ``(R, jitter)``
    with ``jitter`` the absolute amount added.
    """
    K = np.asarray(K, dtype=np.float64)
    if not np.all(np.isfinite(K)):
        raise ConditioningFailure("kernel matrix has non-finite entries")
    scale = float(np.mean(np.diag(K)))
    if not scale > 0:
        raise ConditioningFailure("kernel matrix has non-positive mean diagonal")
    eye = np.eye(K.shape[0])
    for rel in ladder:
        jitter = rel * scale
        try:
            R = linalg.cholesky(K + jitter * eye, lower=False, check_finite=False)
        except linalg.LinAlgError:
            continue
        if np.min(np.diag(R)) ** 2 >= MIN_PIVOT_REL * scale:
            return R, jitter
    raise ConditioningFailure(
        "matrix not factorizable even with maximal jitter; "
        "check for duplicate or near-duplicate inputs"
    )


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Kernel matrix plus its factor: ``R^T R = K + jitter_used * I``."""

    K: np.ndarray
    jitter_used: float
    R: np.ndarray


def kernel_matrix(spec, X):
    K = spec(X)
    R, jitter = cholesky_with_jitter(K)
    return KernelMatrix(K=K, jitter_used=jitter, R=R)


def solve_upper_t(R, B):
    """``R^{-T} B`` by forward substitution."""
    return linalg.solve_triangular(R, B, trans="T", lower=False, check_finite=False)


def solve_upper(R, B):
    """``R^{-1} B`` by back substitution."""
    return linalg.solve_triangular(R, B, lower=False, check_finite=False)


def cho_solve_upper(R, B):
    """``(R^T R)^{-1} B``."""
    return solve_upper(R, solve_upper_t(R, B))


@dataclass(frozen=True, eq=False)
class WhitenedSystem:
    R: np.ndarray
    c: np.ndarray
    r_perp: float
    W: Optional[np.ndarray] = None
    w_perp: Optional[np.ndarray] = None


def schur_floor(k_star, ctc):
    # rounding floor of k_star - c^T c; differences below it are treated as 0
    return 64.0 * _EPS * max(abs(k_star), abs(ctc))


def extend_whiten(R, k_vec, k_star, Phi=None, phi_star=None, degeneracy_tol=DEGENERACY_TOL):
    """Extend the Cholesky factor of ``K`` by one test point.

    Returns ``c = R^{-T} k_vec`` and ``r_perp = sqrt(k_star - c^T c)`` and,
    when features are supplied, the whitened ``W = R^{-T} Phi`` and
    ``w_perp = (phi_star - W^T c) / r_perp``.
    """
    c = solve_upper_t(R, np.asarray(k_vec, dtype=np.float64))
    ctc = float(c @ c)
    r2 = float(k_star) - ctc
    r_perp = float(np.sqrt(r2)) if r2 > schur_floor(k_star, ctc) else 0.0
    if Phi is None:
        return WhitenedSystem(R=R, c=c, r_perp=r_perp)
    W = solve_upper_t(R, np.asarray(Phi, dtype=np.float64))
    w_perp = None
    if phi_star is not None:
        if r_perp < degeneracy_tol:
            raise DegenerateTestPoint(f"r_perp = {r_perp:.3e}; test point is in the training span")
        w_perp = (np.asarray(phi_star, dtype=np.float64) - W.T @ c) / r_perp
    return WhitenedSystem(R=R, c=c, r_perp=r_perp, W=W, w_perp=w_perp)


def posterior_variances(spec, X, X_star, km=None):
    """GP posterior variance ``k(x*,x*) - k_N(x*)^T K^{-1} k_N(x*)`` for each row of ``X_star``."""
    km = kernel_matrix(spec, X) if km is None else km
    C = solve_upper_t(km.R, spec(X, X_star))
    ctc = np.einsum("ij,ij->j", C, C)
    kss = spec.diag(X_star)
    r2 = kss - ctc
    floor = 64.0 * _EPS * np.maximum(np.abs(kss), ctc)
    return np.where(r2 > floor, r2, 0.0)


def gp_posterior_variance(spec, X, x_star):
    """Schur complement ``r_perp^2`` at a single test point (Cholesky route)."""
    x_star = np.atleast_2d(np.asarray(x_star, dtype=np.float64))
    km = kernel_matrix(spec, X)
    kvec = spec(X, x_star)[:, 0]
    kss = float(spec.diag(x_star)[0])
    return extend_whiten(km.R, kvec, kss).r_perp ** 2
