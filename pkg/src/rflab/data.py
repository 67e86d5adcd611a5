"""Datasets: the synthetic sine target and California-Housing-style CSV files.

The CSV reader expects one header line followed by rows of 8 numeric
feature columns and 1 target column. Feature columns are max-min
normalized over the whole file before any splitting.

No real California Housing file ships with the package (no downloads);
:func:`write_housing_like_csv` produces a synthetic file with the same
schema for tests and demos, and the bundled ``fixtures/housing_like_200.csv``
was written by it. Point :func:`load_calhousing` at the real file to use it.
"""

import csv
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import InsufficientRows, ParseError
from .features import make_rng

HOUSING_COLUMNS = (
    "MedInc", "HouseAge", "AveRooms", "AveBedrms",
    "Population", "AveOccup", "Latitude", "Longitude", "MedHouseVal",
)
N_FEATURES = 8


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def N(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


def sine_target(X, b):
    return np.sin(5.0 * (np.atleast_2d(X) @ b))


def synth_dataset(seed, N=6, N_test=1000, p=1, noise_sigma=0.05, low=-5.0, high=5.0):
    """Inputs uniform on ``[low, high]^p`` with ``y = sin(5 b^T x) + noise``.

    ``b`` is drawn standard normal from the seed and not renormalized.
    Noise is i.i.d. ``N(0, noise_sigma^2)`` on both train and test targets.
    """
    if N < 1 or N_test < 1 or p < 1:
        raise ValueError("N, N_test and p must be >= 1")
    rng = make_rng(seed)
    b = rng.standard_normal(p)
    X = rng.uniform(low, high, (N, p))
    X_test = rng.uniform(low, high, (N_test, p))
    # continuous draws collide with probability zero; guard anyway
    train_rows = {tuple(r) for r in X}
    X_test = np.array([r for r in X_test if tuple(r) not in train_rows]).reshape(-1, p)
    y = sine_target(X, b) + noise_sigma * rng.standard_normal(N)
    y_test = sine_target(X_test, b) + noise_sigma * rng.standard_normal(X_test.shape[0])
    meta = {
        "source": "synthetic",
        "seed": int(seed),
        "noise_sigma": float(noise_sigma),
        "normalization": "none",
        "b": b.tolist(),
    }
    return Dataset(X, y, X_test, y_test, meta)


def _read_numeric_csv(path, n_cols):
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc.strerror}") from exc
    rows = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path} is empty", row=1)
        if len(header) != n_cols:
            raise ParseError(f"header has {len(header)} columns, expected {n_cols}", row=1)
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) != n_cols:
                raise ParseError(f"expected {n_cols} fields, got {len(rec)}", row=lineno)
            vals = []
            for col, f in enumerate(rec, start=1):
                try:
                    v = float(f)
                except ValueError:
                    raise ParseError(f"non-numeric value {f!r}", row=lineno, column=col) from None
                if not np.isfinite(v):
                    raise ParseError(f"non-finite value {f!r}", row=lineno, column=col)
                vals.append(v)
            rows.append(vals)
    return np.array(rows, dtype=np.float64).reshape(-1, n_cols)


def max_min_normalize(A):
    """Scale every column of ``A`` to ``[0, 1]``; constant columns map to 0."""
    lo = A.min(axis=0)
    span = A.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    out = (A - lo) / safe
    out[:, span == 0] = 0.0
    return out


def split_housing(data, seed, N=12, N_test=1000, normalize_target=False, source="array"):
    """Normalize the 8 feature columns over all rows, permute by ``seed`` and split.

    The first ``N`` permuted rows train; the next rows whose features differ
    from every training row form the test set (``N_test`` of them).
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != N_FEATURES + 1:
        raise ValueError(f"expected an (n, {N_FEATURES + 1}) array")
    if N < 1 or N_test < 1:
        raise ValueError("N and N_test must be >= 1")
    if N + N_test > data.shape[0]:
        raise InsufficientRows(
            f"{source} has {data.shape[0]} rows; N + N_test = {N + N_test} requested"
        )
    X_all = max_min_normalize(data[:, :N_FEATURES])
    y_all = data[:, N_FEATURES]
    if normalize_target:
        y_all = max_min_normalize(y_all[:, None])[:, 0]
    perm = make_rng(seed).permutation(data.shape[0])
    train_idx = perm[:N]
    train_rows = {tuple(r) for r in X_all[train_idx]}
    test_idx = [i for i in perm[N:] if tuple(X_all[i]) not in train_rows][:N_test]
    if len(test_idx) < N_test:
        raise InsufficientRows(f"only {len(test_idx)} test rows distinct from training rows")
    meta = {
        "source": source,
        "seed": int(seed),
        "noise_sigma": 0.0,
        "normalization": "max-min features" + (" and target" if normalize_target else ""),
    }
    return Dataset(X_all[train_idx], y_all[train_idx], X_all[test_idx], y_all[test_idx], meta)


def load_calhousing(path, seed, N=12, N_test=1000, normalize_target=False):
    """Load a housing CSV and split it with :func:`split_housing`."""
    data = _read_numeric_csv(path, N_FEATURES + 1)
    return split_housing(data, seed, N, N_test, normalize_target, os.path.basename(str(path)))


def housing_like_rows(n_rows=1000, seed=0):
    """``n_rows`` synthetic rows in the California Housing column layout.

    Marginals are loosely modeled on the real census-block data (skewed
    income/population, coastal latitude/longitude band, capped target); the
    target is a smooth function of income and location plus noise. Values
    are rounded as they would be in a CSV file. This is a stand-in, not the
    real dataset.
    """
    rng = make_rng(seed)
    med_inc = np.clip(rng.lognormal(1.25, 0.45, n_rows), 0.5, 15.0)
    age = rng.integers(1, 53, n_rows).astype(float)
    rooms = np.clip(rng.lognormal(1.62, 0.25, n_rows) + 0.15 * med_inc, 1.0, 40.0)
    bedrms = np.clip(1.0 + rng.lognormal(-2.4, 0.6, n_rows), 0.5, 6.0)
    pop = np.clip(rng.lognormal(7.05, 0.75, n_rows), 3.0, 35000.0)
    occup = np.clip(rng.lognormal(1.05, 0.25, n_rows), 0.7, 20.0)
    lat = rng.uniform(32.5, 42.0, n_rows)
    lon = -124.3 + 0.95 * (42.0 - lat) + rng.normal(0.0, 0.9, n_rows)
    lon = np.clip(lon, -124.35, -114.3)
    coast = np.exp(-np.abs(lon + 124.3 - 0.95 * (42.0 - lat)) / 1.5)
    target = 0.45 * med_inc + 1.1 * coast + 0.006 * age - 0.05 * (occup - 3.0)
    target += rng.normal(0.0, 0.35, n_rows)
    target = np.clip(target, 0.15, 5.00001)
    cols = [med_inc, age, rooms, bedrms, pop, occup, lat, lon, target]
    rounding = [4, 0, 5, 5, 0, 5, 2, 2, 5]
    return np.column_stack([np.round(c, r) for c, r in zip(cols, rounding)])


def housing_like_dataset(seed, N=12, N_test=1000, n_rows=1000, file_seed=0):
    """Split of :func:`housing_like_rows`; equals loading the written CSV."""
    return split_housing(housing_like_rows(n_rows, file_seed), seed, N, N_test,
                         source=f"housing-like(n_rows={n_rows}, seed={file_seed})")


def write_housing_like_csv(path, n_rows=1000, seed=0):
    """Write :func:`housing_like_rows` to ``path`` atomically (temp file + rename)."""
    rows = housing_like_rows(n_rows, seed)
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HOUSING_COLUMNS)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
    os.replace(tmp, path)
    return path


def bundled_fixture_path():
    """Path of the 200-row synthetic housing fixture shipped with the package."""
    return str(resources.files("rflab").joinpath("fixtures", "housing_like_200.csv"))
