"""Random feature sampling and feature-matrix construction.

A feature is ``phi(omega, x) = act(omega^T [1; x])`` with ``omega`` drawn
i.i.d. from a weight distribution. The bias coordinate is prepended inside
:func:`feature_matrix`, so the matching limiting kernel must be evaluated on
augmented inputs as well (see :func:`augment`).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .errors import DimensionMismatch

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class WeightDistSpec:
    """Distribution of each weight coordinate.

    ``kind`` is one of ``"normal"`` (standard normal), ``"uniform"`` on
    ``[lo, hi)`` or ``"laplace"`` with ``loc``/``scale``.
    """

    kind: str = "normal"
    lo: float = -10.0
    hi: float = 10.0
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("normal", "uniform", "laplace"):
            raise ValueError(f"unknown weight distribution {self.kind!r}")
        if self.kind == "uniform" and not self.lo < self.hi:
            raise ValueError("uniform weights need lo < hi")
        if self.kind == "laplace" and not self.scale > 0:
            raise ValueError("laplace weights need scale > 0")

    def sample(self, rng, shape):
        if self.kind == "normal":
            return rng.standard_normal(shape)
        if self.kind == "uniform":
            return rng.uniform(self.lo, self.hi, shape)
        return rng.laplace(self.loc, self.scale, shape)


@dataclass(frozen=True)
class ActivationSpec:
    """Scalar activation: ``relu``, ``erf``, ``softplus`` (with ``beta``) or ``identity``."""

    kind: str = "relu"
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("relu", "erf", "softplus", "identity"):
            raise ValueError(f"unknown activation {self.kind!r}")
        if self.kind == "softplus" and not self.beta > 0:
            raise ValueError("softplus beta must be > 0")

    def __call__(self, z):
        z = np.asarray(z, dtype=np.float64)
        if self.kind == "relu":
            return np.maximum(z, 0.0)
        if self.kind == "erf":
            return erf(z)
        if self.kind == "softplus":
            # relu(z) + log1p(exp(-|beta z|)) / beta, never below relu(z)
            tail = np.log1p(np.exp(-np.abs(self.beta * z)))
            tail /= self.beta
            return np.maximum(z, 0.0) + tail
        return z.copy()


@dataclass(frozen=True)
class FeatureConfig:
    weight_dist: WeightDistSpec = field(default_factory=WeightDistSpec)
    activation: ActivationSpec = field(default_factory=ActivationSpec)
    D: int = 200
    bias_augment: bool = True

    def __post_init__(self):
        if int(self.D) < 1:
            raise ValueError("feature count D must be >= 1")

    def with_width(self, D):
        return FeatureConfig(self.weight_dist, self.activation, int(D), self.bias_augment)


@dataclass(frozen=True, eq=False)
class FeatureDraw:
    """A frozen set of ``D`` weight vectors (rows of ``omega``)."""

    omega: np.ndarray
    config: FeatureConfig
    seed: int

    @property
    def D(self):
        return self.omega.shape[0]

    @property
    def input_dim(self):
        return self.omega.shape[1] - (1 if self.config.bias_augment else 0)


def _mix64(z):
    # splitmix64 finalizer: a bijection on 64-bit integers
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def member_seed(base_seed, member_index):
    """Derive the seed of ensemble member / MC replicate ``member_index``.

    For a fixed ``base_seed`` the map is injective on 64-bit indices: it is a
    composition of bijections of ``member_index``.
    """
    if member_index < 0:
        raise ValueError("member_index must be >= 0")
    base = _mix64(int(base_seed) & _MASK64)
    return _mix64(base ^ _mix64(int(member_index) & _MASK64))


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) & _MASK64)))


def sample_features(config, p, seed):
    if p < 1:
        raise ValueError("input dimension p must be >= 1")
    dim = p + 1 if config.bias_augment else p
    omega = config.weight_dist.sample(make_rng(seed), (config.D, dim))
    return FeatureDraw(omega=omega, config=config, seed=int(seed))


def concatenate_draws(draws):
    """Stack several draws into one wider draw (same distribution and activation)."""
    config = draws[0].config
    omega = np.vstack([d.omega for d in draws])
    return FeatureDraw(omega=omega, config=config.with_width(omega.shape[0]), seed=draws[0].seed)


def augment(X, bias_augment=True):
    """Return ``X`` as a 2-D float array with a leading column of ones if requested."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if not bias_augment:
        return X
    return np.hstack([np.ones((X.shape[0], 1)), X])


def feature_matrix(draw, X):
    """Return ``Phi[i, j] = act(omega_j^T x_i)``; no ``1/sqrt(D)`` scaling."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != draw.input_dim:
        raise DimensionMismatch(
            f"inputs have {X.shape[1]} columns, feature draw expects {draw.input_dim}"
        )
    Z = augment(X, draw.config.bias_augment) @ draw.omega.T
    return draw.config.activation(Z)
