"""Datasets: file readers, standardisation, splitting and the synthetic generator.

The synthetic design follows the grouped-feature regression benchmark: 40
features, the first 15 carry coefficient 3 and come in three blocks of five
that share a latent N(0, 1) mean; the remaining 25 are independent N(0, 1).
Random numbers come from NumPy's PCG64 bit generator (``default_rng``) and
normals from its ziggurat sampler, so a seed pins the data exactly.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

__all__ = [
    "Dataset",
    "DataFormatError",
    "SyntheticSpec",
    "load_csv",
    "write_csv",
    "load_svmlight",
    "standardize",
    "split",
    "synthetic_generate",
    "population_covariance",
    "derive_seed",
]


class DataFormatError(ValueError):
    """Malformed input file; the message names the offending line/cell."""


@dataclass(frozen=True)
class Dataset:
    """Design matrix (dense ndarray or scipy CSR), response and metadata."""

    X: object
    y: np.ndarray
    feature_names: Optional[Tuple[str, ...]] = None
    kind: str = "regression"

    def __post_init__(self):
        X = self.X if sp.issparse(self.X) else np.asarray(self.X, dtype=np.float64)
        if sp.issparse(X):
            X = sp.csr_matrix(X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"X must be a nonempty 2-D matrix, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
        values = X.data if sp.issparse(X) else X
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains NaN or infinite values")
        if self.kind not in ("regression", "binary"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "binary" and not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("binary datasets need labels in {-1, +1}")
        if self.feature_names is not None and len(self.feature_names) != X.shape[1]:
            raise ValueError("feature_names length does not match the column count")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def subset(self, rows):
        return replace(self, X=self.X[rows], y=self.y[rows])


def _infer_kind(y):
    return "binary" if y.size and np.all(np.isin(y, (-1.0, 1.0))) else "regression"


def load_csv(path, has_header=True, label_column=-1, kind=None):
    """Read a rectangular comma-separated numeric table.

    `label_column` is a column index (negative counts from the end) or, when
    the file has a header, a column name.  Missing or non-numeric cells are
    rejected with their 1-based row and column in the message.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    header = None
    first = 1
    if has_header:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        first = 2
        if not rows:
            raise DataFormatError(f"{path}: header but no data rows")
    width = len(header) if header is not None else len(rows[0])
    values = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(
                f"{path}: row {i + first} has {len(row)} fields, expected {width}")
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                raise DataFormatError(
                    f"{path}: row {i + first}, column {j + 1}: bad value {cell.strip()!r}")
            values[i, j] = v
    if isinstance(label_column, str):
        if header is None or label_column not in header:
            raise DataFormatError(f"{path}: no column named {label_column!r}")
        label = header.index(label_column)
    else:
        label = int(label_column)
        if not -width <= label < width:
            raise DataFormatError(f"{path}: label column {label_column} out of range")
        label %= width
    if width < 2:
        raise DataFormatError(f"{path}: need at least one feature and a label column")
    keep = [j for j in range(width) if j != label]
    y = values[:, label]
    names = tuple(header[j] for j in keep) if header is not None else None
    return Dataset(values[:, keep], y, feature_names=names, kind=kind or _infer_kind(y))


def write_csv(path, dataset, label_name="y"):
    """Write features then label, with a header, using round-trip ``repr`` floats."""
    X = dataset.X.toarray() if sp.issparse(dataset.X) else dataset.X
    names = dataset.feature_names or tuple(f"x{j + 1}" for j in range(dataset.d))
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(list(names) + [label_name])
        for row, label in zip(X, dataset.y):
            out.writerow([repr(float(v)) for v in row] + [repr(float(label))])


def load_svmlight(path, n_features=None):
    """Read ``label idx:val idx:val ...`` lines (1-based, strictly ascending).

    Returns a Dataset with a CSR design matrix.  When the labels take exactly
    two distinct values they are mapped to -1 (smaller) and +1 (larger).
    """
    labels: List[float] = []
    indptr = [0]
    indices: List[int] = []
    data: List[float] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                labels.append(float(parts[0]))
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: bad label {parts[0]!r}") from None
            prev = 0
            for tok in parts[1:]:
                idx, sep, val = tok.partition(":")
                try:
                    j = int(idx)
                    v = float(val)
                except ValueError:
                    j = -1
                if not sep or j < 1 or not math.isfinite(v):
                    raise DataFormatError(f"{path}:{lineno}: malformed pair {tok!r}")
                if j <= prev:
                    what = "duplicate" if j == prev else "non-ascending"
                    raise DataFormatError(f"{path}:{lineno}: {what} index {j}")
                prev = j
                indices.append(j - 1)
                data.append(v)
            indptr.append(len(indices))
    if not labels:
        raise DataFormatError(f"{path}: no data lines")
    d = max(indices) + 1 if indices else 1
    if n_features is not None:
        if n_features < d:
            raise DataFormatError(f"{path}: index {d} exceeds n_features={n_features}")
        d = n_features
    X = sp.csr_matrix((np.array(data), np.array(indices, dtype=np.int64), np.array(indptr)),
                      shape=(len(labels), d))
    y = np.array(labels)
    distinct = np.unique(y)
    kind = "regression"
    if distinct.size == 2:
        y = np.where(y == distinct[0], -1.0, 1.0)
        kind = "binary"
    elif distinct.size == 1 and distinct[0] in (-1.0, 1.0):
        kind = "binary"
    return Dataset(X, y, kind=kind)


@dataclass
class Standardization:
    means: np.ndarray
    sds: np.ndarray
    constant: np.ndarray  # features with zero spread on the training split


def standardize(train, others=()):
    """Centre and scale every split with the training means and SDs.

    Constant training features are mapped to zero in every split and flagged
    in ``constant``.  Sparse designs are scaled only (centring would densify
    them); their recorded means are zero.

    Returns
    -------
    (list of Dataset, Standardization)
        The transformed ``[train, *others]``.
    """
    X = train.X
    if sp.issparse(X):
        means = np.zeros(train.d)
        sq = np.asarray(X.multiply(X).mean(axis=0)).ravel()
        mu = np.asarray(X.mean(axis=0)).ravel()
        sds = np.sqrt(np.maximum(sq - mu * mu, 0.0))
    else:
        means = X.mean(axis=0)
        sds = X.std(axis=0)
    constant = sds == 0.0
    if np.any(constant):
        logger.warning("%d constant feature(s) zeroed during standardisation",
                       int(constant.sum()))
    scale = np.where(constant, 0.0, 1.0 / np.where(constant, 1.0, sds))
    out = []
    for ds in [train, *others]:
        if sp.issparse(ds.X):
            Xs = ds.X @ sp.diags(scale)
        else:
            Xs = (ds.X - means) * scale
        out.append(replace(ds, X=Xs))
    return out, Standardization(means, sds, constant)


def split(dataset, sizes, seed):
    """Random disjoint train/validation/test split of the requested sizes."""
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != 3 or min(sizes) < 0:
        raise ValueError("sizes must be three nonnegative counts")
    if sum(sizes) > dataset.n:
        raise ValueError(f"split sizes {sizes} exceed n={dataset.n}")
    perm = np.random.default_rng(seed).permutation(dataset.n)
    a, b, c = sizes
    return (dataset.subset(perm[:a]), dataset.subset(perm[a:a + b]),
            dataset.subset(perm[a + b:a + b + c]))


def derive_seed(master_seed, index):
    """64-bit seed for replication `index`, independent of execution order.

    Uses NumPy's SeedSequence hash of the pair ``(master_seed, index)``.
    """
    seq = np.random.SeedSequence([int(master_seed), int(index)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SyntheticSpec:
    d: int = 40
    sparse_support: int = 15
    signal: float = 3.0
    group_size: int = 5
    n_groups: int = 3
    within_group_noise_sd: float = 0.1
    response_noise_sd: float = 1.0
    n_train: int = 50
    n_val: int = 50
    n_test: int = 350
    seed: int = 0

    def __post_init__(self):
        if min(self.d, self.group_size, self.n_groups, self.n_train) < 1:
            raise ValueError("counts must be positive")
        if min(self.n_val, self.n_test, self.sparse_support) < 0:
            raise ValueError("counts must be nonnegative")
        if self.group_size * self.n_groups > self.d or self.sparse_support > self.d:
            raise ValueError("groups / support do not fit in d features")
        if self.within_group_noise_sd < 0 or self.response_noise_sd < 0:
            raise ValueError("noise levels must be nonnegative")

    @property
    def w_star(self):
        w = np.zeros(self.d)
        w[: self.sparse_support] = self.signal
        return w


def _draw_features(spec, rng, n):
    X = rng.standard_normal((n, spec.d))
    grouped = spec.group_size * spec.n_groups
    # one latent mean per group and row, shared by the group's columns
    Z = rng.standard_normal((n, spec.n_groups))
    noise = rng.standard_normal((n, grouped)) * spec.within_group_noise_sd
    X[:, :grouped] = np.repeat(Z, spec.group_size, axis=1) + noise
    return X


def synthetic_generate(spec):
    """Draw train/validation/test splits and return them with ``w_star``.

    Each row gets its own latent group means ``Z_1..Z_3 ~ N(0, 1)``; grouped
    columns are ``Z_g + N(0, sigma^2)``, the rest are i.i.d. N(0, 1), and
    ``y = <w_star, x> + N(0, response_noise_sd^2)``.
    """
    rng = np.random.default_rng(spec.seed)
    w = spec.w_star
    out = []
    for n in (spec.n_train, spec.n_val, spec.n_test):
        if n == 0:
            out.append(None)
            continue
        X = _draw_features(spec, rng, n)
        y = X @ w + spec.response_noise_sd * rng.standard_normal(n)
        out.append(Dataset(X, y))
    return out[0], out[1], out[2], w


def population_covariance(spec):
    """Analytic covariance of one synthetic feature row (block diagonal)."""
    V = np.eye(spec.d)
    s2 = spec.within_group_noise_sd ** 2
    for g in range(spec.n_groups):
        block = slice(g * spec.group_size, (g + 1) * spec.group_size)
        V[block, block] = 1.0
        V[block, block] += s2 * np.eye(spec.group_size)
    return V
