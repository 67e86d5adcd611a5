"""Finite and Monte-Carlo "infinite" ensembles of RF regressors.

Member ``m`` always draws its features with ``member_seed(base_seed, m)``,
and member predictions are reduced in member order through
:class:`~rflab._stats.StreamingMoments`, so the batch path
(:func:`build_ensemble` + :func:`ensemble_predict`) and the constant-memory
path (:func:`mc_infinite_ensemble`) agree bit-for-bit.
"""

from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from ._stats import DEFAULT_CHUNK, StreamingMoments
from .errors import RFLabError
from .features import FeatureConfig, concatenate_draws, member_seed, sample_features
from .kernels import KernelSpec
from .regressors import fit_kernel_regressor, fit_rf, predict_kernel, predict_rf


@dataclass(frozen=True)
class EnsembleConfig:
    feature_config: FeatureConfig
    M: int
    lam: float = 0.0
    base_seed: int = 0

    def __post_init__(self):
        if int(self.M) < 1:
            raise ValueError("ensemble size M must be >= 1")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    mean: np.ndarray
    variance: np.ndarray
    mc_standard_error: np.ndarray
    M: int


def _result(acc):
    n, mean, var = acc.result()
    return EnsembleResult(mean=mean, variance=var, mc_standard_error=np.sqrt(var / n), M=n)


def _fit_member(config, X, y, m):
    draw = sample_features(config.feature_config, X.shape[1], member_seed(config.base_seed, m))
    try:
        return fit_rf(draw, X, y, config.lam)
    except RFLabError as exc:
        raise type(exc)(f"ensemble member {m}: {exc}") from exc


def build_ensemble(config, X, y):
    """Fit ``config.M`` members on the same training set, each with its own features."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    return ordered_map(lambda m: _fit_member(config, X, y, m), range(config.M))


def ensemble_predict(models, X_star, chunk_size=DEFAULT_CHUNK):
    """Pointwise mean, unbiased variance and MC standard error over members."""
    if not models:
        raise ValueError("empty model list")
    acc = StreamingMoments(chunk_size)
    for pred in ordered_map(lambda mod: predict_rf(mod, X_star), models):
        acc.push(pred)
    return _result(acc)


def mc_infinite_ensemble(config, X, y, X_star, chunk_size=DEFAULT_CHUNK, batch=None):
    """Monte-Carlo estimate of the infinite ensemble at ``X_star``.

    Members are fitted and evaluated ``batch`` at a time (in parallel) and
    discarded after their predictions are folded into the running moments.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    X_star = np.atleast_2d(np.asarray(X_star, dtype=np.float64))
    batch = chunk_size if batch is None else int(batch)
    acc = StreamingMoments(chunk_size)

    def member_prediction(m):
        return predict_rf(_fit_member(config, X, y, m), X_star)

    for start in range(0, config.M, batch):
        stop = min(start + batch, config.M)
        for pred in ordered_map(member_prediction, range(start, stop)):
            acc.push(pred)
    return _result(acc)


def budget_matched_comparison(total_features, M, data, feature_config, seed):
    """Compare an ``M``-member ensemble with one model using all member features.

    The single model reuses exactly the union of the member draws. Both are
    ridgeless and evaluated on ``data.X_test``.

    Returns
    -------
    dict
        ``ensemble`` (EnsembleResult), ``single`` (predictions), ``l2_gap``
        (root-mean-square difference of the two predictors over the test
        sample) and ``generalization`` (test MSE of each).
    """
    if total_features % M:
        raise ValueError("total_features must be divisible by M")
    D = total_features // M
    fc = feature_config.with_width(D)
    X, y, X_test = data.X, data.y, data.X_test
    draws = [sample_features(fc, X.shape[1], member_seed(seed, m)) for m in range(M)]
    models = ordered_map(lambda d: fit_rf(d, X, y), draws)
    ens = ensemble_predict(models, X_test)
    single = predict_rf(fit_rf(concatenate_draws(draws), X, y), X_test)
    gap = float(np.sqrt(np.mean((single - ens.mean) ** 2)))
    return {
        "ensemble": ens,
        "single": single,
        "l2_gap": gap,
        "generalization": {
            "ensemble_err": float(np.mean((ens.mean - data.y_test) ** 2)),
            "single_err": float(np.mean((single - data.y_test) ** 2)),
        },
        "D": D,
    }


def hockey_stick_curve(D_values, M, data, X_star, lam, seed, feature_config, kernel_spec=None,
                       kernel_pred=None):
    """Ensemble-vs-kernel gap as a function of the per-member width ``D``.

    Returns a list of dicts with ``D``, ``mean_abs_diff`` (over ``X_star``),
    ``abs_diff_sd`` and ``member_sd`` (mean member standard deviation, the
    variance band). The kernel regressor uses the same ``lam``.
    """
    X_star = np.atleast_2d(np.asarray(X_star, dtype=np.float64))
    if kernel_pred is None:
        spec = kernel_spec or KernelSpec.limiting(feature_config)
        reg = fit_kernel_regressor(spec, data.X, data.y, lam)
        kernel_pred = predict_kernel(reg, X_star)
    rows = []
    for D in D_values:
        cfg = EnsembleConfig(feature_config.with_width(int(D)), M, lam, seed)
        res = mc_infinite_ensemble(cfg, data.X, data.y, X_star)
        diff = np.abs(res.mean - kernel_pred)
        rows.append({
            "D": int(D),
            "mean_abs_diff": float(diff.mean()),
            "abs_diff_sd": float(diff.std()),
            "member_sd": float(np.sqrt(res.variance).mean()),
        })
    return rows
