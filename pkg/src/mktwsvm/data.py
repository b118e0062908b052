"""Datasets: loading, label filtering, standardization, splits and
synthetic fixtures.

Two on-disk formats are read:

* CSV, UTF-8, comma separated, optional header.  By default column 0 is
  the row id, column 1 the label and the remaining columns are features.
* Sparse ``<label> <index>:<value> ...`` lines with 1-based indices,
  densified to the largest index seen anywhere in the file.  Blank lines
  and ``#`` comments are skipped.

Labels are case-insensitive ``spam``, ``normal``/``nonspam``,
``unknown``/``undecided`` or the integers ``1``, ``0``, ``-1``.
"""

import csv
import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError, InputError


class Label(enum.IntEnum):
    UNKNOWN = -1
    NORMAL = 0
    SPAM = 1

    def __str__(self):
        return self.name.lower()


_LABEL_WORDS = {
    "spam": Label.SPAM,
    "normal": Label.NORMAL,
    "nonspam": Label.NORMAL,
    "unknown": Label.UNKNOWN,
    "undecided": Label.UNKNOWN,
}
_LABEL_NUMBERS = {1: Label.SPAM, 0: Label.NORMAL, -1: Label.UNKNOWN}


def parse_label(text):
    word = str(text).strip().lower()
    if word in _LABEL_WORDS:
        return _LABEL_WORDS[word]
    try:
        return _LABEL_NUMBERS[int(word)]
    except (ValueError, KeyError):
        raise InputError(f"unrecognized label {text!r}") from None


def _frozen(arr, dtype):
    arr = np.array(arr, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature rows with parallel ids and labels; immutable."""

    ids: tuple
    features: np.ndarray
    labels: np.ndarray
    name: str = ""

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2:
            raise InputError(f"features must be a matrix, got ndim={features.ndim}")
        if not np.all(np.isfinite(features)):
            raise InputError("features contain NaN or infinite values")
        labels = np.asarray([int(Label(v)) for v in np.asarray(self.labels).ravel()],
                            dtype=np.int8)
        ids = tuple(str(i) for i in self.ids)
        if not (len(ids) == features.shape[0] == labels.shape[0]):
            raise InputError(f"ids ({len(ids)}), features ({features.shape[0]}) and "
                             f"labels ({labels.shape[0]}) differ in length")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "features", _frozen(features, np.float64))
        object.__setattr__(self, "labels", _frozen(labels, np.int8))

    def __len__(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    def subset(self, index, name=None):
        index = np.asarray(index, dtype=np.int64)
        return Dataset(tuple(self.ids[i] for i in index), self.features[index],
                       self.labels[index], self.name if name is None else name)

    def with_features(self, features):
        return Dataset(self.ids, features, self.labels, self.name)

    def class_counts(self):
        return {label: int(np.sum(self.labels == label)) for label in Label}

    @property
    def spam(self):
        return self.features[self.labels == Label.SPAM]

    @property
    def normal(self):
        return self.features[self.labels == Label.NORMAL]


# -- readers and writers -----------------------------------------------------

def _column_index(spec, header, ncols, what):
    if spec is None:
        return None
    if isinstance(spec, str) and not spec.lstrip("-").isdigit():
        if header is None:
            raise InputError(f"{what} column {spec!r} given by name but the file has no header")
        try:
            return header.index(spec)
        except ValueError:
            raise InputError(f"{what} column {spec!r} not found in header {header}") from None
    idx = int(spec)
    if not -ncols <= idx < ncols:
        raise InputError(f"{what} column {idx} out of range for {ncols} columns")
    return idx % ncols


def load_csv(path, has_header=True, label_column=1, id_column=0, name=None):
    """Read a CSV feature table.

    ``label_column`` and ``id_column`` are 0-based positions or, when the
    file has a header, column names.  ``None`` means absent: labels become
    ``Unknown`` and ids become 0-based row numbers.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(lineno, row) for lineno, row in enumerate(csv.reader(fh), start=1)
                if row and any(cell.strip() for cell in row)]
    header = None
    if has_header:
        if not rows:
            raise FormatError(f"{path}: empty file")
        header = [cell.strip() for cell in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise FormatError(f"{path}: no data rows")
    ncols = len(header) if header is not None else len(rows[0][1])
    label_idx = _column_index(label_column, header, ncols, "label")
    id_idx = _column_index(id_column, header, ncols, "id")
    feature_cols = [j for j in range(ncols) if j not in (label_idx, id_idx)]
    if not feature_cols:
        raise FormatError(f"{path}: no feature columns")

    ids, labels = [], []
    features = np.empty((len(rows), len(feature_cols)))
    for r, (lineno, row) in enumerate(rows):
        if len(row) != ncols:
            raise FormatError(f"{path}: row {r} has {len(row)} columns, expected {ncols}",
                              line=lineno)
        ids.append(row[id_idx].strip() if id_idx is not None else str(r))
        if label_idx is None:
            labels.append(Label.UNKNOWN)
        else:
            try:
                labels.append(parse_label(row[label_idx]))
            except InputError as exc:
                raise FormatError(f"{path}: {exc}", line=lineno,
                                  field=header[label_idx] if header else label_idx) from None
        for c, j in enumerate(feature_cols):
            try:
                value = float(row[j])
            except ValueError:
                value = float("nan")
            if not np.isfinite(value):
                raise FormatError(f"{path}: row {r}: cell {row[j]!r} is not a finite number",
                                  line=lineno, field=header[j] if header else j)
            features[r, c] = value
    return Dataset(tuple(ids), features, labels, name or path.stem)


def save_csv(ds, path):
    """Write ``ds`` as ``id,label,f1..fd`` with 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label"] + [f"f{j + 1}" for j in range(ds.dim)])
        for i in range(len(ds)):
            writer.writerow([ds.ids[i], str(Label(ds.labels[i]))]
                            + [f"{v:.17g}" for v in ds.features[i]])


def load_sparse(path, name=None, dim=None):
    """Read ``<label> <index>:<value> ...`` lines (1-based indices).

    The feature count is the largest index seen unless ``dim`` fixes it.
    """
    path = Path(path)
    labels, entries, ids = [], [], []
    max_index = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            head, *items = line.split()
            try:
                labels.append(parse_label(head))
            except InputError as exc:
                raise FormatError(f"{path}: {exc}", line=lineno, field="label") from None
            row = {}
            for item in items:
                key, sep, value = item.partition(":")
                try:
                    index = int(key)
                    number = float(value)
                except ValueError:
                    raise FormatError(f"{path}: malformed pair {item!r}", line=lineno) from None
                if not sep or index < 1 or not np.isfinite(number):
                    raise FormatError(f"{path}: malformed pair {item!r}", line=lineno)
                if index in row:
                    raise FormatError(f"{path}: duplicate index {index}", line=lineno,
                                      field=index)
                row[index] = number
                max_index = max(max_index, index)
            entries.append(row)
            ids.append(str(len(ids)))
    if not entries:
        raise FormatError(f"{path}: empty file")
    if dim is not None:
        if max_index > dim:
            raise FormatError(f"{path}: feature index {max_index} exceeds dimension {dim}")
        max_index = dim
    if max_index == 0:
        raise FormatError(f"{path}: no features in any row")
    features = np.zeros((len(entries), max_index))
    for r, row in enumerate(entries):
        for index, value in row.items():
            features[r, index - 1] = value
    return Dataset(tuple(ids), features, labels, name or path.stem)


SPARSE_SUFFIXES = (".svm", ".libsvm", ".svmlight", ".txt")


def load_dataset(path, dim=None, **options):
    """Dispatch on extension: ``.svm``/``.libsvm``/``.svmlight``/``.txt`` are
    sparse, anything else CSV.  ``options`` go to :func:`load_csv`; ``dim``
    only matters for sparse files."""
    if Path(path).suffix.lower() in SPARSE_SUFFIXES:
        return load_sparse(path, dim=dim)
    return load_csv(path, **options)


def filter_unknown(ds):
    keep = np.flatnonzero(ds.labels != Label.UNKNOWN)
    if keep.size == 0:
        raise DataError(f"dataset {ds.name!r} has no spam or normal rows")
    if keep.size == len(ds):
        return ds
    return ds.subset(keep)


# -- standardization ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Scaler:
    """Column means and population standard deviations.

    Zero-variance columns get ``std = 1`` and are marked in ``constant``.
    """

    means: np.ndarray
    stds: np.ndarray
    constant: np.ndarray = None

    def __post_init__(self):
        means = _frozen(self.means, np.float64).ravel()
        stds = _frozen(self.stds, np.float64).ravel()
        constant = (np.zeros(means.shape, dtype=bool) if self.constant is None
                    else np.asarray(self.constant, dtype=bool).ravel())
        if means.shape != stds.shape or constant.shape != means.shape:
            raise InputError("scaler means and stds differ in length")
        if np.any(~(stds > 0)) or not np.all(np.isfinite(means)):
            raise InputError("scaler stds must be positive and means finite")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)
        object.__setattr__(self, "constant", _frozen(constant, bool))

    @classmethod
    def identity(cls, dim):
        return cls(np.zeros(dim), np.ones(dim))

    @property
    def dim(self):
        return self.means.shape[0]

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.dim:
            raise InputError(f"expected {self.dim} features, got {X.shape[-1]}")
        return (X - self.means) / self.stds

    def inverse_transform(self, Z):
        return np.asarray(Z, dtype=np.float64) * self.stds + self.means

    def __eq__(self, other):
        if not isinstance(other, Scaler):
            return NotImplemented
        return (np.array_equal(self.means, other.means)
                and np.array_equal(self.stds, other.stds)
                and np.array_equal(self.constant, other.constant))

    __hash__ = None


def fit_standardize(data):
    """Fit a :class:`Scaler` on a Dataset or a feature matrix."""
    X = data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InputError("cannot standardize an empty dataset")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    # constant columns: exact zero spread, or spread at rounding level of the mean
    constant = ~(stds > 1e-12 * np.maximum(1.0, np.abs(means)))
    stds = np.where(constant, 1.0, stds)
    means = np.where(constant & (np.ptp(X, axis=0) == 0), X[0], means)
    return Scaler(means, stds, constant)


def apply_standardize(sc, ds):
    return ds.with_features(sc.transform(ds.features))


# -- splitting ----------------------------------------------------------------

def _rng(seed):
    return np.random.default_rng(seed)


def split_indices(ds, train_fraction=0.75, seed=0, stratified=False):
    if not 0 < train_fraction < 1:
        raise InputError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    rng = _rng(seed)
    if stratified:
        train, test = [], []
        for label in (Label.SPAM, Label.NORMAL):
            members = np.flatnonzero(ds.labels == label)
            if members.size == 0:
                raise DataError(f"stratified split: no {label} rows")
            members = rng.permutation(members)
            cut = int(round(train_fraction * members.size))
            train.append(members[:cut])
            test.append(members[cut:])
        unknown = np.flatnonzero(ds.labels == Label.UNKNOWN)
        if unknown.size:
            unknown = rng.permutation(unknown)
            cut = int(round(train_fraction * unknown.size))
            train.append(unknown[:cut])
            test.append(unknown[cut:])
        train, test = np.sort(np.concatenate(train)), np.sort(np.concatenate(test))
    else:
        perm = rng.permutation(len(ds))
        cut = int(round(train_fraction * len(ds)))
        train, test = np.sort(perm[:cut]), np.sort(perm[cut:])
    if train.size == 0 or test.size == 0:
        raise DataError(f"split of {len(ds)} rows at {train_fraction} leaves an empty part")
    return train, test


def split(ds, train_fraction=0.75, seed=0, stratified=False):
    """Random train/test partition; returns ``(train, test)`` datasets."""
    train, test = split_indices(ds, train_fraction, seed, stratified)
    return ds.subset(train, f"{ds.name}-train"), ds.subset(test, f"{ds.name}-test")


def kfold(data, k=10, seed=0, stratified=False):
    """List of ``(train_index, test_index)`` pairs, one per fold.

    ``data`` is a Dataset or a row count.  Fold sizes differ by at most
    one.  Stratified folds deal each class's shuffled rows round-robin, so
    every fold also receives a near-equal share of each class.
    """
    n = data if isinstance(data, (int, np.integer)) else len(data)
    if k < 2:
        raise InputError(f"k must be >= 2, got {k}")
    if n < k:
        raise DataError(f"cannot make {k} folds from {n} rows")
    rng = _rng(seed)
    if stratified:
        if isinstance(data, (int, np.integer)):
            raise InputError("stratified folds need a labeled dataset")
        order = np.concatenate([rng.permutation(np.flatnonzero(data.labels == label))
                                for label in (Label.SPAM, Label.NORMAL, Label.UNKNOWN)])
        assign = np.empty(n, dtype=np.int64)
        assign[order] = np.arange(n) % k
        parts = [np.flatnonzero(assign == f) for f in range(k)]
    else:
        parts = [np.sort(p) for p in np.array_split(rng.permutation(n), k)]
    everything = np.arange(n)
    return [(np.setdiff1d(everything, part, assume_unique=True), part) for part in parts]


# -- synthetic fixtures -------------------------------------------------------

def _labels(n_spam, n_normal):
    return [Label.SPAM] * n_spam + [Label.NORMAL] * n_normal


def synth_blobs(n_per_class, d=2, separation=10.0, seed=0):
    """Two unit-variance Gaussian blobs centred at ``+-(separation/2) e1``;
    spam is the positive blob."""
    if n_per_class < 1 or d < 1 or not separation >= 0:
        raise InputError("synth_blobs needs n_per_class >= 1, d >= 1, separation >= 0")
    rng = _rng(seed)
    center = np.zeros(d)
    center[0] = separation / 2.0
    X = np.vstack([rng.standard_normal((n_per_class, d)) + center,
                   rng.standard_normal((n_per_class, d)) - center])
    ids = [f"b{i:05d}" for i in range(2 * n_per_class)]
    return Dataset(tuple(ids), X, _labels(n_per_class, n_per_class), "blobs")


def synth_circles(n_per_class, r_inner=1.0, r_outer=3.0, noise=0.05, seed=0):
    """Two concentric rings in the plane; spam is the inner ring.

    Angles are uniform, radii are ``r + noise * N(0, 1)``.
    """
    if n_per_class < 1 or not 0 < r_inner < r_outer or not noise >= 0:
        raise InputError("synth_circles needs n_per_class >= 1, 0 < r_inner < r_outer, noise >= 0")
    rng = _rng(seed)
    rings = []
    for radius in (r_inner, r_outer):
        theta = rng.uniform(0.0, 2.0 * np.pi, n_per_class)
        r = radius + noise * rng.standard_normal(n_per_class)
        rings.append(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))
    ids = [f"c{i:05d}" for i in range(2 * n_per_class)]
    return Dataset(tuple(ids), np.vstack(rings), _labels(n_per_class, n_per_class), "circles")


def synth_spamlike(n=500, d=20, seed=0, spam_fraction=0.3, clusters=3, radius=1.0,
                   spread=0.1, flat=0.2, flip=0.02):
    """Spam-like table mixing a linear normal class with clustered spam.

    Normal rows are standard Gaussian except the last feature, which is a
    noisy linear function of the first few (noise level ``flat``), so the
    normal class hugs a hyperplane.  Spam rows imitate templated pages:
    ``clusters`` tight Gaussian clumps (std ``spread``) at distance
    ``radius`` from the origin in random directions.  A fraction ``flip``
    of labels is then flipped and the rows are shuffled.
    """
    if n < 2 or d < 2 or not 0 < spam_fraction < 1 or clusters < 1:
        raise InputError("synth_spamlike needs n >= 2, d >= 2, 0 < spam_fraction < 1, clusters >= 1")
    if not (radius >= 0 and spread >= 0 and flat >= 0 and 0 <= flip <= 1):
        raise InputError("synth_spamlike needs non-negative radius, spread, flat and flip <= 1")
    rng = _rng(seed)
    n_spam = int(round(n * spam_fraction))
    n_normal = n - n_spam
    lead = min(6, d - 1)
    normal = rng.standard_normal((n_normal, d))
    normal[:, -1] = (normal[:, :lead].sum(axis=1) / np.sqrt(lead)
                     + flat * rng.standard_normal(n_normal))
    dirs = rng.standard_normal((clusters, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    which = rng.integers(0, clusters, n_spam)
    spam = radius * dirs[which] + spread * rng.standard_normal((n_spam, d))
    X = np.vstack([spam, normal])
    y = np.array(_labels(n_spam, n_normal), dtype=np.int8)
    flipped = rng.random(n) < flip
    y[flipped] = Label.SPAM + Label.NORMAL - y[flipped]
    perm = rng.permutation(n)
    ids = [f"s{i:05d}" for i in range(n)]
    return Dataset(tuple(ids), X[perm], y[perm], "spamlike")
