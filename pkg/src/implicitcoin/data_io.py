"""Dataset ingestion, preprocessing and deterministic splitting.

Pipeline used by the benchmark harness: parse (LIBSVM or CSV), optionally
binarize the targets, shuffle-split 70/15/15 with a seeded permutation, then
standardize with training statistics and scale every row to unit norm.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

SPLIT_PRNG = "pcg64"  # numpy default_rng; recorded so splits can be replayed

# Sample and feature counts of the benchmark datasets, keyed by name.
TABLE_SHAPES = {
    "cpu-act": ("classification", 8192, 21),
    "2dplane": ("classification", 40768, 10),
    "houses": ("classification", 20640, 8),
    "rainfall": ("regression", 16755, 3),
    "bank32nh": ("regression", 8192, 32),
    "houses-8l": ("regression", 22784, 8),
}


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    task: str
    name: str = ""
    feature_names: tuple = ()

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.X.ndim != 2 or self.y.ndim != 1 or len(self.X) != len(self.y):
            raise ValueError("X must be (n, d) and y (n,) with matching n")
        if self.task not in ("classification", "regression"):
            raise ValueError(f"unknown task {self.task!r}")

    def __len__(self):
        return len(self.y)

    @property
    def n_features(self):
        return self.X.shape[1]

    def __eq__(self, other):
        return (isinstance(other, Dataset) and self.task == other.task
                and np.array_equal(self.X, other.X)
                and np.array_equal(self.y, other.y))


@dataclass(frozen=True)
class SplitSpec:
    seed: int
    repetition: int = 0
    ratios: tuple = (0.70, 0.15, 0.15)

    def __post_init__(self):
        if self.repetition < 0:
            raise ValueError("repetition must be >= 0")
        if len(self.ratios) != 3 or abs(sum(self.ratios) - 1.0) > 1e-12:
            raise ValueError(f"ratios must be three values summing to 1, got {self.ratios}")


@dataclass
class TransformRecord:
    """Everything needed to replay preprocessing on new rows."""

    mean: np.ndarray
    std: np.ndarray
    prng: str = SPLIT_PRNG
    seed: int = 0
    repetition: int = 0
    binarize_threshold: float = None
    extra: dict = field(default_factory=dict)


def _lines(stream):
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream


def _map_binary_labels(y):
    """Map a two-valued label column onto {-1, +1} (smaller value -> -1)."""
    values = np.unique(y)
    if set(values.tolist()) == {-1.0, 1.0}:
        return y, True
    if len(values) == 2:
        return np.where(y == values[0], -1.0, 1.0), True
    return y, False


def parse_libsvm(stream, task="classification", name=""):
    """Parse the sparse `label idx:val ...` text format (1-based indices).

    Classification labels such as {0,1} or {1,2} are mapped onto {-1,+1};
    many-valued classification targets are kept raw for later thresholding.
    """
    labels = []
    rows = []
    max_idx = 0
    for lineno, line in enumerate(_lines(stream), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        try:
            label = float(parts[0])
        except ValueError:
            raise ValueError(f"line {lineno}: bad label {parts[0]!r}") from None
        feats = []
        prev_idx = 0
        for tok in parts[1:]:
            idx_s, _, val_s = tok.partition(":")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ValueError(f"line {lineno}: bad feature token {tok!r}") from None
            if idx <= prev_idx:
                raise ValueError(
                    f"line {lineno}: indices must be ascending and >= 1, got {idx}")
            prev_idx = idx
            feats.append((idx - 1, val))
        max_idx = max(max_idx, prev_idx)
        labels.append(label)
        rows.append(feats)

    X = np.zeros((len(rows), max_idx))
    for i, feats in enumerate(rows):
        for j, v in feats:
            X[i, j] = v
    y = np.array(labels, dtype=np.float64)
    if task == "classification":
        y, _ = _map_binary_labels(y)
    return Dataset(X=X, y=y, task=task, name=name)


def serialize_libsvm(ds: Dataset) -> str:
    """Inverse of parse_libsvm; zero entries are omitted, floats use repr."""
    out = []
    for i in range(len(ds)):
        toks = [repr(float(ds.y[i]))]
        row = ds.X[i]
        for j in np.nonzero(row)[0]:
            toks.append(f"{j + 1}:{float(row[j])!r}")
        out.append(" ".join(toks))
    return "\n".join(out) + "\n"


def parse_csv(stream, target_column, task, name=""):
    """Parse a headered CSV; non-numeric columns are one-hot encoded in
    first-appearance category order, the named target column becomes y."""
    reader = csv.reader(_lines(stream))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty CSV: no header row") from None
    header = [h.strip() for h in header]
    if target_column not in header:
        raise ValueError(f"missing target column {target_column!r}")
    tgt = header.index(target_column)

    raw = []
    for rowno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise ValueError(
                f"row {rowno}: expected {len(header)} fields, got {len(row)}")
        raw.append([v.strip() for v in row])
    if not raw:
        raise ValueError("CSV has a header but no data rows")

    def as_float(v):
        try:
            return float(v)
        except ValueError:
            return None

    try:
        y = np.array([float(r[tgt]) for r in raw])
    except ValueError:
        raise ValueError(f"target column {target_column!r} must be numeric") from None

    cols = []
    names = []
    for j, col_name in enumerate(header):
        if j == tgt:
            continue
        vals = [r[j] for r in raw]
        floats = [as_float(v) for v in vals]
        if all(f is not None for f in floats):
            cols.append(np.array(floats))
            names.append(col_name)
        else:
            cats = list(dict.fromkeys(vals))  # first-appearance order
            for c in cats:
                cols.append(np.array([1.0 if v == c else 0.0 for v in vals]))
                names.append(f"{col_name}={c}")

    X = np.column_stack(cols) if cols else np.zeros((len(raw), 0))
    if task == "classification":
        y, _ = _map_binary_labels(y)
    return Dataset(X=X, y=y, task=task, name=name, feature_names=tuple(names))


def median_threshold(values):
    return float(np.median(np.asarray(values, dtype=np.float64)))


def binarize_by_threshold(ds: Dataset, threshold: float) -> Dataset:
    """Targets strictly above the threshold become +1, the rest -1."""
    y = np.where(ds.y > threshold, 1.0, -1.0)
    return Dataset(X=ds.X.copy(), y=y, task="classification", name=ds.name,
                   feature_names=ds.feature_names)


def shuffle_split(ds: Dataset, spec: SplitSpec):
    """Deterministic 70/15/15 split; the permutation is a pure function of
    (seed, repetition, dataset size)."""
    n = len(ds)
    if n < 10:
        raise ValueError(f"dataset too small to split: {n} rows")
    rng = np.random.default_rng([spec.seed, spec.repetition])
    perm = rng.permutation(n)
    n_train = int(spec.ratios[0] * n)
    n_val = int(spec.ratios[1] * n)
    parts = (perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:])
    return tuple(
        Dataset(X=ds.X[p], y=ds.y[p], task=ds.task, name=ds.name,
                feature_names=ds.feature_names)
        for p in parts)


def standardize_then_unit_normalize(train: Dataset, *others):
    """Center and scale with statistics of the training split only, then scale
    every row to unit Euclidean norm (zero rows stay zero).

    Returns the transformed datasets followed by the TransformRecord.
    """
    if len(train) == 0:
        raise ValueError("training split is empty")
    mean = train.X.mean(axis=0)
    std = train.X.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    record = TransformRecord(mean=mean, std=std)

    def apply(ds):
        Z = (ds.X - mean) / std
        norms = np.linalg.norm(Z, axis=1, keepdims=True)
        Z = Z / np.where(norms > 0.0, norms, 1.0)
        return Dataset(X=Z, y=ds.y.copy(), task=ds.task, name=ds.name,
                       feature_names=ds.feature_names)

    return tuple(apply(ds) for ds in (train, *others)) + (record,)


def save_transform_record(record: TransformRecord, path):
    """Key=value text dump of the preprocessing transform."""
    with open(path, "w") as fh:
        fh.write(f"prng={record.prng}\n")
        fh.write(f"seed={record.seed}\n")
        fh.write(f"repetition={record.repetition}\n")
        if record.binarize_threshold is not None:
            fh.write(f"binarize_threshold={record.binarize_threshold!r}\n")
        fh.write("mean=" + ",".join(repr(float(v)) for v in record.mean) + "\n")
        fh.write("std=" + ",".join(repr(float(v)) for v in record.std) + "\n")
        for k, v in record.extra.items():
            fh.write(f"{k}={v}\n")


def make_synthetic_regression(n=1000, dim=10, seed=0, weight_scale=4.0, noise=0.25):
    """Linear regression data with heterogeneous feature scales and Laplace
    noise, matched to the absolute loss."""
    rng = np.random.default_rng(seed)
    scales = rng.uniform(0.5, 5.0, size=dim)
    X = rng.normal(size=(n, dim)) * scales
    w_star = rng.normal(size=dim)
    w_star *= weight_scale / np.linalg.norm(w_star)
    y = X @ w_star + rng.laplace(scale=noise, size=n)
    return Dataset(X=X, y=y, task="regression", name=f"synthetic-reg-{seed}")


def expected_shape(name):
    """Benchmark-table (task, samples, features) for a known dataset name."""
    key = name.lower()
    if key not in TABLE_SHAPES:
        raise ValueError(f"no recorded shape for dataset {name!r}")
    return TABLE_SHAPES[key]
