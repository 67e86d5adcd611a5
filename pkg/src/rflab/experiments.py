"""Named experiments, their configuration files and CSV result tables.

A configuration file is INI-style (``[section]`` headers, ``key = value``
lines, lists as comma-separated values) with the sections ``experiment``,
``dataset``, ``features``, ``kernel`` and ``ensemble``. Every key has a
default per experiment, so a file only needs the values it changes::

    [experiment]
    name = hockey-stick
    seed = 3

    [ensemble]
    M = 500
    D_values = 3, 6, 12, 24

Each run returns a :class:`ResultTable` which is written as CSV preceded
by ``#`` lines echoing the fully resolved configuration.
"""

import configparser
import csv
import io
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .analysis import (
    CASES,
    counterexample_expectation,
    ensemble_lipschitz_diagnostic,
    expectation_term_samples,
    gaussian_variance_formula,
    gaussian_feature_predictions,
    krr_lipschitz_bound,
    path_jumps,
    refinement_grid,
    shrinks_to_zero,
    ridge_expectation_term_samples,
    underparam_transformed_kernel,
    variance_vs_gp_profile,
)
from .analysis.variance import ratio_spread
from .data import housing_like_dataset, load_calhousing, synth_dataset
from .ensembles import (
    EnsembleConfig,
    budget_matched_comparison,
    hockey_stick_curve,
    mc_infinite_ensemble,
)
from .errors import ConfigError, RFLabError
from .features import ActivationSpec, FeatureConfig, WeightDistSpec, make_rng, member_seed
from .kernels import KernelSpec, cholesky_with_jitter, solve_upper_t
from .regressors import fit_kernel_regressor, predict_kernel

EXPERIMENTS = (
    "equivalence", "hockey-stick", "expectation-term", "variance-profile",
    "gaussian-variance", "ridge-path", "budget", "underparam", "counterexample",
)
SECTIONS = ("experiment", "dataset", "features", "kernel", "ensemble")


# -- value parsing -------------------------------------------------------------

def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(conv):
    def parse(text):
        if isinstance(text, (list, tuple)):
            return [conv(v) for v in text]
        return [conv(v) for v in str(text).split(",") if v.strip()]
    return parse


def _int(text):
    if isinstance(text, (int, np.integer)):
        return int(text)
    t = str(text).strip()
    try:
        return int(t)
    except ValueError:
        v = float(t)  # accept "1e4" style counts
        if not v.is_integer():
            raise ValueError(f"not an integer: {text!r}") from None
        return int(v)


def _str(text):
    return str(text).strip()


SCHEMA = {
    "experiment": {"name": _str, "seed": _int},
    "dataset": {
        "kind": _str, "path": _str, "N": _int, "N_test": _int, "p": _int,
        "noise_sigma": float, "seed": _int, "n_rows": _int,
        "file_seed": _int, "normalize_target": _bool,
    },
    "features": {
        "activation": _str, "beta": float, "weight_dist": _str, "D": _int,
        "bias_augment": _bool, "lo": float, "hi": float, "loc": float, "scale": float,
    },
    "kernel": {"n_mc_samples": _int, "seed": _int},
    "ensemble": {
        "M": _int, "lambda": float, "lambda_grid": _list(float), "D_values": _list(_int),
        "M_values": _list(_int), "n_test": _int, "x_index": _int, "grid_n": _int,
        "grid_low": float, "grid_high": float, "gaussian": _bool, "replicates": _int,
        "n_pairs": _int, "lambda_max": float, "gap_M": _int, "gap_D_values": _list(_int),
        "cases": _list(_str),
    },
}

_BASE = {
    "experiment": {"seed": 0},
    "dataset": {
        "kind": "synthetic", "path": "", "N": 6, "N_test": 100, "p": 1, "noise_sigma": 0.05,
        "n_rows": 1000, "file_seed": 0, "normalize_target": False,
    },
    "features": {
        "activation": "relu", "beta": 1.0, "weight_dist": "normal", "D": 200,
        "bias_augment": True, "lo": -10.0, "hi": 10.0, "loc": 0.0, "scale": 1.0,
    },
    "kernel": {"n_mc_samples": 10**7},
    "ensemble": {"M": 1000, "lambda": 0.0, "n_test": 20},
}

_HOUSING = {"kind": "housing-like", "N": 12, "N_test": 500}

DEFAULTS = {
    "equivalence": {
        "dataset": _HOUSING, "features": {"activation": "softplus"},
        "ensemble": {"M": 10000, "n_test": 500},
    },
    "hockey-stick": {
        "features": {"activation": "softplus"},
        "ensemble": {"M": 2000, "n_test": 100, "D_values": [3, 6, 12, 24, 48, 200]},
    },
    "expectation-term": {"ensemble": {"M": 20000, "x_index": 0}},
    "variance-profile": {
        "ensemble": {"M": 20000, "grid_n": 41, "grid_low": -5.0, "grid_high": 5.0,
                     "gaussian": False},
    },
    "gaussian-variance": {"ensemble": {"M": 20000, "n_test": 20}},
    "ridge-path": {
        "ensemble": {"M": 2000, "n_test": 20, "lambda_grid": [round(0.1 * i, 10) for i in range(21)],
                     "n_pairs": 50, "lambda_max": 2.0},
    },
    "budget": {
        "dataset": _HOUSING,
        "ensemble": {"M_values": [1, 2, 4, 8], "gap_M": 4, "gap_D_values": [24, 96, 384],
                     "replicates": 5},
    },
    "underparam": {
        "dataset": {"N": 5, "N_test": 10}, "features": {"activation": "softplus", "D": 2},
        "kernel": {"n_mc_samples": 10**6}, "ensemble": {"M": 20000, "n_test": 10},
    },
    "counterexample": {"ensemble": {"cases": list(CASES)}},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved configuration: every section holds typed values."""

    experiment: str
    sections: dict = field(default_factory=dict)
    out: str = None

    @property
    def seed(self):
        return self.sections["experiment"]["seed"]

    def get(self, section, key):
        try:
            return self.sections[section][key]
        except KeyError:
            raise ConfigError("missing value", f"{section}.{key}") from None

    def feature_config(self):
        f = self.sections["features"]
        try:
            wd = WeightDistSpec(f["weight_dist"], lo=f["lo"], hi=f["hi"], loc=f["loc"], scale=f["scale"])
            act = ActivationSpec(f["activation"], f["beta"])
            return FeatureConfig(wd, act, f["D"], f["bias_augment"])
        except ValueError as exc:
            raise ConfigError(str(exc), "features") from None

    def kernel_spec(self, fc=None):
        k = self.sections["kernel"]
        return KernelSpec.limiting(fc or self.feature_config(), k["n_mc_samples"], k["seed"])

    def dataset(self):
        d = self.sections["dataset"]
        kind = d["kind"]
        if kind == "synthetic":
            return synth_dataset(d["seed"], d["N"], d["N_test"], d["p"], d["noise_sigma"])
        if kind == "housing-like":
            return housing_like_dataset(d["seed"], d["N"], d["N_test"], d["n_rows"], d["file_seed"])
        if kind == "calhousing":
            if not d["path"]:
                raise ConfigError("calhousing needs a path", "dataset.path")
            return load_calhousing(d["path"], d["seed"], d["N"], d["N_test"], d["normalize_target"])
        raise ConfigError(f"unknown dataset kind {kind!r}", "dataset.kind")

    def echo(self):
        """Canonical ``[section] key = value`` lines of the resolved config."""
        lines = []
        for sec in SECTIONS:
            for key in sorted(self.sections[sec]):
                lines.append(f"[{sec}] {key} = {_format_value(self.sections[sec][key])}")
        return lines


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_format_value(x) for x in v)
    return str(v)


def _convert(section, key, value):
    try:
        conv = SCHEMA[section][key]
    except KeyError:
        raise ConfigError("unknown key", f"{section}.{key}") from None
    try:
        return conv(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value {value!r}: {exc}", f"{section}.{key}") from None


def make_config(experiment, overrides=None, seed=None, out=None):
    """Resolve defaults for ``experiment`` and apply ``{section: {key: value}}`` overrides.

    ``seed`` (if given) wins over any seed in the overrides. Dataset and
    kernel seeds default to values derived from the experiment seed.
    """
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}",
                          "experiment.name")
    sections = {sec: dict(_BASE.get(sec, {})) for sec in SECTIONS}
    for sec, vals in DEFAULTS[experiment].items():
        sections[sec].update(vals)
    explicit = set()
    for sec, vals in (overrides or {}).items():
        if sec not in SECTIONS:
            raise ConfigError("unknown section", sec)
        for key, value in vals.items():
            if sec == "experiment" and key == "name":
                continue
            sections[sec][key] = _convert(sec, key, value)
            explicit.add((sec, key))
    if seed is not None:
        sections["experiment"]["seed"] = _convert("experiment", "seed", seed)
    s = sections["experiment"]["seed"]
    if s < 0 or s >= 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer", "experiment.seed")
    if ("dataset", "seed") not in explicit:
        sections["dataset"]["seed"] = s
    if ("kernel", "seed") not in explicit:
        sections["kernel"]["seed"] = member_seed(s, 1)
    sections["experiment"]["name"] = experiment
    cfg = ExperimentConfig(experiment, sections, out)
    _validate(cfg)
    return cfg


def load_config(path, experiment=None, seed=None, out=None):
    """Read an INI config file; ``seed`` overrides ``[experiment] seed``.

    ``experiment`` (e.g. from a CLI subcommand) supplies the name when the
    file has none and must agree with it otherwise.
    """
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (N vs n)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    name = parser.get("experiment", "name", fallback="").strip() or experiment
    if not name:
        raise ConfigError("missing value", "experiment.name")
    if experiment and name != experiment:
        raise ConfigError(f"config is for {name!r}, not {experiment!r}", "experiment.name")
    overrides = {sec: dict(parser.items(sec)) for sec in parser.sections()}
    return make_config(name, overrides, seed=seed, out=out)


def _validate(cfg):
    g = cfg.get
    for sec, key in (("dataset", "N"), ("dataset", "N_test"), ("features", "D"), ("ensemble", "M")):
        if g(sec, key) < 1:
            raise ConfigError("must be >= 1", f"{sec}.{key}")
    if g("ensemble", "lambda") < 0:
        raise ConfigError("must be >= 0", "ensemble.lambda")
    if g("kernel", "n_mc_samples") < 1:
        raise ConfigError("must be >= 1", "kernel.n_mc_samples")
    name = cfg.experiment
    n_test = cfg.sections["ensemble"].get("n_test", 1)
    if name != "counterexample" and n_test > g("dataset", "N_test"):
        raise ConfigError("exceeds dataset.N_test", "ensemble.n_test")
    if name in ("hockey-stick",) and not g("ensemble", "D_values"):
        raise ConfigError("empty list", "ensemble.D_values")
    if name == "ridge-path" and 0.0 not in g("ensemble", "lambda_grid"):
        raise ConfigError("grid must include 0", "ensemble.lambda_grid")
    if name == "underparam" and g("features", "D") >= g("dataset", "N"):
        raise ConfigError("underparam needs D < N", "features.D")
    if name in ("gaussian-variance", "variance-profile", "expectation-term") and \
            g("features", "D") <= g("dataset", "N") + 1:
        raise ConfigError("needs D > N + 1", "features.D")
    if name == "counterexample":
        bad = [c for c in g("ensemble", "cases") if c not in CASES]
        if bad:
            raise ConfigError(f"unknown cases {bad}", "ensemble.cases")
    cfg.feature_config()


# -- result tables --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ResultTable:
    """Rows of one experiment run plus its provenance.

    ``extras`` holds run-level scalars that are not per-row (written as
    ``# result`` header lines).
    """

    experiment: str
    columns: tuple
    rows: list
    provenance: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def column(self, name):
        if name not in self.columns:
            raise ConfigError(f"no column {name!r}", f"table.{name}")
        i = self.columns.index(name)
        vals = [r[i] for r in self.rows]
        if not vals:
            raise ConfigError(f"column {name!r} is empty", f"table.{name}")
        return vals

    def to_csv(self):
        buf = io.StringIO()
        for line in self.provenance:
            buf.write(f"# {line}\n")
        for key in sorted(self.extras):
            buf.write(f"# result {key} = {_format_cell(self.extras[key])}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_format_cell(v) for v in row])
        return buf.getvalue()

    def write(self, path):
        """Write the CSV atomically (temp file in the same directory, then rename)."""
        d = os.path.dirname(os.path.abspath(path))
        os.makedirs(d, exist_ok=True)
        tmp = f"{path}.tmp.{os.getpid()}"
        with open(tmp, "w", newline="") as fh:
            fh.write(self.to_csv())
        os.replace(tmp, path)
        return path


def _format_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


# -- experiments ----------------------------------------------------------------

def _test_points(cfg, data):
    return data.X_test[: cfg.get("ensemble", "n_test")]


def _run_equivalence(cfg):
    data, fc = cfg.dataset(), cfg.feature_config()
    X_star = _test_points(cfg, data)
    spec = cfg.kernel_spec(fc)
    G = spec(np.vstack([data.X, X_star]))  # one shared MC draw for K and k_N(x*)
    N = data.N
    reg = fit_kernel_regressor(spec, data.X, data.y, cfg.get("ensemble", "lambda"), K=G[:N, :N])
    kernel_pred = predict_kernel(reg, None, G[:N, N:])
    ens = mc_infinite_ensemble(
        EnsembleConfig(fc, cfg.get("ensemble", "M"), cfg.get("ensemble", "lambda"), cfg.seed),
        data.X, data.y, X_star,
    )
    rows = []
    for t in range(X_star.shape[0]):
        diff = float(ens.mean[t] - kernel_pred[t])
        se = float(ens.mc_standard_error[t])
        rows.append((t, float(ens.mean[t]), float(kernel_pred[t]), diff, se,
                     diff / se if se > 0 else float("nan")))
    cols = ("test_index", "ensemble_mean", "kernel_pred", "diff", "mc_se", "z")
    return cols, rows, {"M": ens.M, "kernel_jitter": reg.jitter_used}


def _run_hockey_stick(cfg):
    data, fc = cfg.dataset(), cfg.feature_config()
    X_star = _test_points(cfg, data)
    lam = cfg.get("ensemble", "lambda")
    spec = cfg.kernel_spec(fc)
    G = spec(np.vstack([data.X, X_star]))
    N = data.N
    reg = fit_kernel_regressor(spec, data.X, data.y, lam, K=G[:N, :N])
    kernel_pred = predict_kernel(reg, None, G[:N, N:])
    curve = hockey_stick_curve(cfg.get("ensemble", "D_values"), cfg.get("ensemble", "M"), data,
                               X_star, lam, cfg.seed, fc, kernel_pred=kernel_pred)
    cols = ("D", "mean_abs_diff", "abs_diff_sd", "member_sd")
    return cols, [tuple(r[c] for c in cols) for r in curve], {"N": N}


def _run_expectation_term(cfg):
    data, fc = cfg.dataset(), cfg.feature_config()
    x_star = data.X_test[cfg.get("ensemble", "x_index")]
    lam = cfg.get("ensemble", "lambda")
    spec = cfg.kernel_spec(fc)
    M = cfg.get("ensemble", "M")
    if lam > 0:
        s = ridge_expectation_term_samples(fc, data.X, x_star, lam, M, cfg.seed, kernel_spec=spec)
    else:
        s = expectation_term_samples(fc, data.X, x_star, M, cfg.seed, kernel_spec=spec)
    mean, se = s.mean(), s.standard_error()
    rows = [(i, float(mean[i]), float(se[i]), float(mean[i] / se[i])) for i in range(mean.size)]
    return ("coordinate", "mean", "se", "z"), rows, {"n_kept": len(s), "n_dropped": s.n_dropped}


def _run_variance_profile(cfg):
    data, fc = cfg.dataset(), cfg.feature_config()
    e = cfg.sections["ensemble"]
    if data.p != 1:
        raise ConfigError("variance-profile uses a 1-D grid", "dataset.p")
    grid = np.linspace(e["grid_low"], e["grid_high"], e["grid_n"])
    prof = variance_vs_gp_profile(fc, data, grid, e["M"], cfg.seed, gaussian=e["gaussian"],
                                  kernel_spec=cfg.kernel_spec(fc))
    rows = [(float(r["x_star"][0]), r["ensemble_variance"], r["r_perp_sq"], r["ratio"]) for r in prof]
    return ("x_star", "ensemble_variance", "r_perp_sq", "ratio"), rows, {}


def _run_gaussian_variance(cfg):
    data, fc = cfg.dataset(), cfg.feature_config()
    X_star = _test_points(cfg, data)
    spec = cfg.kernel_spec(fc)
    R, jitter = cholesky_with_jitter(spec(data.X))
    C = solve_upper_t(R, spec(data.X, X_star))
    r2 = np.maximum(spec.diag(X_star) - np.einsum("ij,ij->j", C, C), 0.0)
    r = np.sqrt(r2)
    preds = gaussian_feature_predictions(R, C, r, data.y, fc.D, cfg.get("ensemble", "M"), cfg.seed)
    var = preds.var(axis=0, ddof=1)
    rows = []
    for t in range(X_star.shape[0]):
        f = gaussian_variance_formula(R, data.y, r[t], fc.D, data.N)
        rows.append((t, float(r2[t]), float(var[t]), f, float(var[t] / f - 1.0)))
    cols = ("test_index", "r_perp_sq", "empirical_variance", "formula", "rel_err")
    return cols, rows, {"kernel_jitter": jitter}


def _run_ridge_path(cfg):
    data, fc = cfg.dataset(), cfg.feature_config()
    X_star = _test_points(cfg, data)
    spec = cfg.kernel_spec(fc)
    e = cfg.sections["ensemble"]
    rep = ensemble_lipschitz_diagnostic(fc, data, X_star, e["lambda_grid"], e["M"], cfg.seed,
                                        kernel_spec=spec)
    rows = []
    for i, lam in enumerate(rep.lambdas):
        for t in range(X_star.shape[0]):
            rows.append(("path", float(lam), 0.0, t, float(rep.krr_diffs[i, t]),
                         float(rep.ens_diffs[i, t]), float(rep.ens_mc_se[i, t]),
                         float(rep.bound_values[i, t])))
    # random (lam, lam') pairs for the bound-dominance check
    K = spec(data.X)
    K_cross = spec(data.X, X_star)
    C1 = np.abs(K_cross).max(axis=0)
    rng = make_rng(member_seed(cfg.seed, 2))
    for _ in range(e["n_pairs"]):
        lam, lam_p = rng.uniform(0.0, e["lambda_max"], 2)
        h = predict_kernel(fit_kernel_regressor(spec, data.X, data.y, lam, K=K), None, K_cross)
        hp = predict_kernel(fit_kernel_regressor(spec, data.X, data.y, lam_p, K=K), None, K_cross)
        for t in range(X_star.shape[0]):
            b = krr_lipschitz_bound(K, data.y, lam, lam_p, C1[t], data.N)
            rows.append(("pair", float(lam), float(lam_p), t, float(abs(h[t] - hp[t])),
                         float("nan"), float("nan"), b))
    cols = ("kind", "lambda", "lambda_prime", "test_index", "krr_diff", "ens_diff", "ens_se", "bound")
    # continuity at lambda = 0: halve the first grid step repeatedly
    floor = 1e-2 * float(np.linalg.eigvalsh(K)[0])
    ref = ensemble_lipschitz_diagnostic(fc, data, X_star, refinement_grid(float(rep.lambdas[1]), floor),
                                        e["M"], cfg.seed, kernel_spec=spec)
    for i, lam in enumerate(ref.lambdas[1:], start=1):
        for t in range(X_star.shape[0]):
            rows.append(("refine", float(lam), 0.0, t, float(ref.krr_diffs[i, t]),
                         float(ref.ens_diffs[i, t]), float(ref.ens_mc_se[i, t]),
                         float(ref.bound_values[i, t])))
    extras = {
        "krr_jump_intervals": len(path_jumps(rep.lambdas, rep.krr_diffs)),
        "ens_jump_intervals": len(path_jumps(rep.lambdas, rep.ens_diffs)),
        "krr_zero_discontinuities": len(shrinks_to_zero(ref.lambdas, ref.krr_diffs)),
        "ens_zero_discontinuities": len(shrinks_to_zero(ref.lambdas, ref.ens_diffs)),
    }
    return cols, rows, extras


def _run_budget(cfg):
    data, fc = cfg.dataset(), cfg.feature_config()
    e = cfg.sections["ensemble"]
    rows = []
    for M in e["M_values"]:
        r = budget_matched_comparison(fc.D * M, M, data, fc, cfg.seed)
        g = r["generalization"]
        rows.append(("generalization", M, fc.D, 0, g["ensemble_err"], g["single_err"],
                     abs(g["ensemble_err"] - g["single_err"]) / g["single_err"], r["l2_gap"]))
    M = e["gap_M"]
    for D in e["gap_D_values"]:
        for rep in range(e["replicates"]):
            r = budget_matched_comparison(D * M, M, data, fc, member_seed(cfg.seed, 100 + rep))
            g = r["generalization"]
            rows.append(("gap", M, D, rep, g["ensemble_err"], g["single_err"],
                         abs(g["ensemble_err"] - g["single_err"]) / g["single_err"], r["l2_gap"]))
    cols = ("kind", "M", "D", "replicate", "ensemble_err", "single_err", "rel_diff", "l2_gap")
    return cols, rows, {}


def _run_underparam(cfg):
    data, fc = cfg.dataset(), cfg.feature_config()
    X_star = _test_points(cfg, data)
    M = cfg.get("ensemble", "M")
    res = underparam_transformed_kernel(fc, data, X_star, M, cfg.seed, kernel_spec=cfg.kernel_spec(fc))
    # the oracle ensemble uses an independent seed stream
    ens = mc_infinite_ensemble(EnsembleConfig(fc, M, 0.0, member_seed(cfg.seed, 3)),
                               data.X, data.y, X_star)
    rows = []
    for t in range(X_star.shape[0]):
        se = float(np.hypot(res.prediction_se[t], ens.mc_standard_error[t]))
        d = float(res.predictions[t] - ens.mean[t])
        rows.append((t, float(res.predictions[t]), float(res.prediction_se[t]), float(ens.mean[t]),
                     float(ens.mc_standard_error[t]), d / se))
    cols = ("test_index", "ktilde_pred", "ktilde_se", "ensemble_mean", "ensemble_se", "z")
    extras = {
        "k_tilde_min_eig": float(np.linalg.eigvalsh(res.k_tilde_matrix)[0]),
        "projection_norm": res.projection_norm,
    }
    return cols, rows, extras


def _run_counterexample(cfg):
    rows = []
    for case in cfg.get("ensemble", "cases"):
        v = Fraction(counterexample_expectation(case))
        rows.append((case, v.numerator, v.denominator, str(v), float(v)))
    return ("case", "numerator", "denominator", "value", "value_float"), rows, {}


_RUNNERS = {
    "equivalence": _run_equivalence,
    "hockey-stick": _run_hockey_stick,
    "expectation-term": _run_expectation_term,
    "variance-profile": _run_variance_profile,
    "gaussian-variance": _run_gaussian_variance,
    "ridge-path": _run_ridge_path,
    "budget": _run_budget,
    "underparam": _run_underparam,
    "counterexample": _run_counterexample,
}


def run_experiment(config, out=None):
    """Run ``config`` and return its :class:`ResultTable`.

    The table is written to ``out`` (or ``config.out``) when one is given.
    Computation errors are re-raised with the experiment name prefixed.
    """
    try:
        cols, rows, extras = _RUNNERS[config.experiment](config)
    except ConfigError:
        raise
    except RFLabError as exc:
        raise type(exc)(f"{config.experiment}: {exc}") from exc
    prov = [f"rflab {__version__}", f"experiment = {config.experiment}"] + config.echo()
    table = ResultTable(config.experiment, tuple(cols), rows, prov, extras)
    path = out or config.out
    if path:
        table.write(path)
    return table


# -- summaries ------------------------------------------------------------------

def _f(values):
    return np.asarray(values, dtype=np.float64)


def summarize(table):
    """Experiment-specific scalars computed from the table alone."""
    if not table.rows:
        raise ConfigError("table has no rows", "table")
    name = table.experiment
    out = {"experiment": name, "rows": len(table.rows)}
    if name == "equivalence":
        z = _f(table.column("z"))
        out.update(mean_abs_diff=float(np.abs(_f(table.column("diff"))).mean()),
                   frac_within_5se=float(np.mean(np.abs(z) < 5)),
                   max_abs_z=float(np.nanmax(np.abs(z))))
    elif name == "hockey-stick":
        D = [int(d) for d in table.column("D")]
        diff = dict(zip(D, table.column("mean_abs_diff")))
        out["min_mean_abs_diff"] = float(min(diff.values()))
        N = table.extras.get("N")
        if N is not None and N // 2 in diff and 4 * N in diff:
            out["ratio_half_N_vs_4N"] = float(diff[N // 2] / diff[4 * N])
    elif name == "expectation-term":
        z = _f(table.column("z"))
        out.update(max_abs_z=float(np.abs(z).max()), n_dropped=table.extras.get("n_dropped", 0))
    elif name == "variance-profile":
        ratio = _f(table.column("ratio"))
        ratio = ratio[np.isfinite(ratio)]
        if ratio.size == 0:
            raise ConfigError("no finite ratios", "table.ratio")
        spread = ratio_spread([{"ratio": v} for v in ratio])
        out.update(ratio_cv=spread["cv"], ratio_max_over_min=spread["max_over_min"])
    elif name == "gaussian-variance":
        out["max_abs_rel_err"] = float(np.abs(_f(table.column("rel_err"))).max())
    elif name == "ridge-path":
        krr, bound = _f(table.column("krr_diff")), _f(table.column("bound"))
        out.update(bound_violations=int(np.sum(krr > bound)),
                   krr_jump_intervals=table.extras.get("krr_jump_intervals"),
                   ens_jump_intervals=table.extras.get("ens_jump_intervals"),
                   krr_zero_discontinuities=table.extras.get("krr_zero_discontinuities"),
                   ens_zero_discontinuities=table.extras.get("ens_zero_discontinuities"))
    elif name == "budget":
        kinds = table.column("kind")
        rel = _f(table.column("rel_diff"))
        gen = [r for k, r in zip(kinds, rel) if k == "generalization"]
        if gen:
            out["max_rel_diff"] = float(max(gen))
        gaps = {}
        for k, D, gap in zip(kinds, table.column("D"), table.column("l2_gap")):
            if k == "gap":
                gaps.setdefault(int(D), []).append(float(gap))
        if gaps:
            Ds = sorted(gaps)
            means = [float(np.mean(gaps[d])) for d in Ds]
            ses = [float(np.std(gaps[d], ddof=1) / np.sqrt(len(gaps[d]))) if len(gaps[d]) > 1 else 0.0
                   for d in Ds]
            out["gap_monotone"] = all(
                means[i + 1] <= means[i] + 2.0 * np.hypot(ses[i], ses[i + 1]) for i in range(len(Ds) - 1)
            )
            out["gap_means"] = ";".join(repr(m) for m in means)
    elif name == "underparam":
        z = _f(table.column("z"))
        out.update(max_abs_z=float(np.abs(z).max()),
                   k_tilde_min_eig=table.extras.get("k_tilde_min_eig"),
                   projection_norm=table.extras.get("projection_norm"))
    elif name == "counterexample":
        for case, value in zip(table.column("case"), table.column("value")):
            out[case] = value
    return out
