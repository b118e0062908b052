"""Metrics, cross-validation and Table-1 style benchmark grids.

Spam is the positive class throughout.
"""

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from . import svm as _svm
from . import twsvm as _tw
from .data import Label, fit_standardize, kfold, split_indices
from .errors import DataError, InputError, MkTwsvmError, TrainingError
from .kernels import CombinedSpam, Linear, Rbf, Tanh, parse_kernel

ALGORITHMS = ("svm", "twsvm-linear", "twsvm-kernel", "twsvm-multikernel")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn

    @property
    def positives(self):
        return self.tp + self.fn

    @property
    def negatives(self):
        return self.tn + self.fp

    def __add__(self, other):
        return ConfusionMatrix(self.tp + other.tp, self.tn + other.tn,
                               self.fp + other.fp, self.fn + other.fn)


def _as_labels(values, what):
    arr = np.asarray([int(Label(v)) for v in np.ravel(values)], dtype=np.int8)
    if np.any(arr == Label.UNKNOWN):
        raise InputError(f"{what} contain Unknown labels")
    return arr


def confusion(predicted, truth):
    predicted = _as_labels(predicted, "predictions")
    truth = _as_labels(truth, "true labels")
    if predicted.shape != truth.shape:
        raise InputError(f"{predicted.shape[0]} predictions for {truth.shape[0]} labels")
    p, t = predicted == Label.SPAM, truth == Label.SPAM
    return ConfusionMatrix(tp=int(np.sum(p & t)), tn=int(np.sum(~p & ~t)),
                           fp=int(np.sum(p & ~t)), fn=int(np.sum(~p & t)))


def accuracy(cm):
    if cm.total == 0:
        raise InputError("accuracy of an empty confusion matrix")
    return (cm.tp + cm.tn) / cm.total


def precision(cm):
    return cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0


def recall(cm):
    return cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0


def f_measure(cm):
    """F1 on the spam class; 0 when precision + recall is 0."""
    p, r = precision(cm), recall(cm)
    return 2 * p * r / (p + r) if p + r else 0.0


@dataclass(frozen=True)
class MetricsReport:
    """Metrics of one confusion matrix.

    For a cross-validation report ``confusion`` pools all folds, ``per_fold``
    holds the fold reports and ``mean``/``std`` are the mean and sample
    standard deviation of the fold accuracies.  For a single evaluation
    ``mean`` is the accuracy and ``std`` is 0.
    """

    confusion: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    f_measure: float
    per_fold: tuple = ()
    mean: float = 0.0
    std: float = 0.0

    @classmethod
    def from_confusion(cls, cm):
        acc = accuracy(cm)
        return cls(cm, acc, precision(cm), recall(cm), f_measure(cm), (), acc, 0.0)

    def summary(self):
        cm = self.confusion
        line = (f"accuracy={self.accuracy:.6f} precision={self.precision:.6f} "
                f"recall={self.recall:.6f} f_measure={self.f_measure:.6f} "
                f"tp={cm.tp} tn={cm.tn} fp={cm.fp} fn={cm.fn}")
        if self.per_fold:
            line += f" folds={len(self.per_fold)} mean={self.mean:.6f} std={self.std:.6f}"
        return line


def evaluate(predicted, truth):
    return MetricsReport.from_confusion(confusion(predicted, truth))


# -- trainers -----------------------------------------------------------------

@dataclass(frozen=True)
class Trainer:
    """A named training procedure with its configuration."""

    algorithm: str
    config: object

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InputError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        want = _svm.SvmConfig if self.algorithm == "svm" else _tw.TwsvmConfig
        if not isinstance(self.config, want):
            raise InputError(f"{self.algorithm} needs a {want.__name__}")

    def fit(self, ds):
        if self.algorithm == "svm":
            return _svm.train_svm(ds, self.config)
        if self.algorithm == "twsvm-linear":
            return _tw.train_linear(ds, self.config)
        if self.algorithm == "twsvm-kernel":
            return _tw.train_kernel(ds, self.config)
        return _tw.train_multikernel(ds, self.config)

    @staticmethod
    def predict(model, X):
        if isinstance(model, _svm.SvmModel):
            return _svm.predict(model, X)[0]
        return _tw.predict(model, X)[0]

    @property
    def standardize(self):
        return self.config.standardize

    @property
    def kernel_names(self):
        """``(kernel_pos, kernel_neg)`` as shown in reports."""
        if self.algorithm == "svm":
            return self.config.kernel.describe(), "-"
        if self.algorithm == "twsvm-linear":
            return "linear", "linear"
        pos = self.config.kernel_pos.describe()
        if self.algorithm == "twsvm-kernel":
            return pos, pos
        return pos, self.config.kernel_neg.describe()


def make_trainer(algorithm, kernel_pos=None, kernel_neg=None, c1=1.0, c2=1.0,
                 epsilon_reg=1e-6, C=1.0, tol=1e-6, svm_tol=1e-3, max_iters=10000,
                 max_passes=1000, seed=0, standardize=True):
    """Build a :class:`Trainer` from names and scalar options.

    ``kernel_pos`` is the SVM kernel for ``svm``.  Missing kernels default
    to linear, except the multi-kernel spam surface which defaults to the
    combined kernel.
    """
    if algorithm not in ALGORITHMS:
        raise InputError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    if algorithm == "svm":
        kernel = parse_kernel(kernel_pos) if kernel_pos is not None else Linear()
        return Trainer(algorithm, _svm.SvmConfig(C=C, kernel=kernel, tol=svm_tol,
                                                 max_passes=max_passes,
                                                 seed=seed, standardize=standardize))
    if kernel_pos is not None:
        pos = parse_kernel(kernel_pos)
    else:
        pos = CombinedSpam() if algorithm == "twsvm-multikernel" else Linear()
    neg = parse_kernel(kernel_neg) if kernel_neg is not None else Linear()
    if algorithm == "twsvm-kernel":
        neg = pos
    cfg = _tw.TwsvmConfig(c1=c1, c2=c2, epsilon_reg=epsilon_reg, kernel_pos=pos,
                          kernel_neg=neg, qp_opts=_tw.QpOptions(max_iters, tol, seed),
                          standardize=standardize)
    return Trainer(algorithm, cfg)


# -- protocols ----------------------------------------------------------------

def _require_labeled(ds):
    if np.any(ds.labels == Label.UNKNOWN):
        raise DataError("dataset still contains Unknown rows; run filter_unknown first")


def _check_no_leakage(trainer, model, train_ds):
    if not trainer.standardize:
        return
    # the trainer stacks spam rows before normal rows, so sums may differ in the last bit
    ref = fit_standardize(train_ds)
    sc = model.scaler
    if not (np.allclose(sc.means, ref.means, rtol=1e-12, atol=1e-12)
            and np.allclose(sc.stds, ref.stds, rtol=1e-12, atol=1e-12)):
        raise MkTwsvmError("scaler was not fit on the training fold alone")


def holdout(trainer, ds, train_fraction=0.75, seed=0, stratified=False):
    """Train on a random ``train_fraction`` of ``ds`` and score the rest."""
    _require_labeled(ds)
    train_idx, test_idx = split_indices(ds, train_fraction, seed, stratified)
    train_ds, test_ds = ds.subset(train_idx), ds.subset(test_idx)
    model = trainer.fit(train_ds)
    _check_no_leakage(trainer, model, train_ds)
    return evaluate(trainer.predict(model, test_ds.features), test_ds.labels)


def cross_validate(trainer, ds, k=10, seed=0, stratified=False):
    """k-fold cross-validation; every fold standardizes on its own train part."""
    _require_labeled(ds)
    folds = kfold(ds, k, seed, stratified)
    reports = []
    for f, (train_idx, test_idx) in enumerate(folds):
        train_ds, test_ds = ds.subset(train_idx), ds.subset(test_idx)
        try:
            model = trainer.fit(train_ds)
        except (TrainingError, DataError) as exc:
            diag = getattr(exc, "diagnostics", {})
            raise TrainingError(f"fold {f}: {exc}", {"fold": f, **diag}) from exc
        _check_no_leakage(trainer, model, train_ds)
        reports.append(evaluate(trainer.predict(model, test_ds.features), test_ds.labels))
    pooled = ConfusionMatrix()
    for r in reports:
        pooled = pooled + r.confusion
    accs = np.array([r.accuracy for r in reports])
    base = MetricsReport.from_confusion(pooled)
    return replace(base, per_fold=tuple(reports), mean=float(accs.mean()),
                   std=float(accs.std(ddof=1)) if len(accs) > 1 else 0.0)


@dataclass(frozen=True)
class Protocol:
    kind: str = "cv"
    k: int = 10
    seed: int = 0
    train_fraction: float = 0.75
    stratified: bool = False

    def __post_init__(self):
        if self.kind not in ("cv", "split"):
            raise InputError(f"protocol must be 'cv' or 'split', got {self.kind!r}")

    def run(self, trainer, ds):
        if self.kind == "cv":
            return cross_validate(trainer, ds, self.k, self.seed, self.stratified)
        return holdout(trainer, ds, self.train_fraction, self.seed, self.stratified)


# -- benchmark grids ----------------------------------------------------------

@dataclass(frozen=True)
class GridEntry:
    algorithm: str
    kernel_pos: object = None
    kernel_neg: object = None


def default_grid(dim):
    """The nine rows of the SVM / one-kernel / two-kernel comparison.

    RBF uses ``gamma = 1/dim`` and the plain tangent kernel ``k = 1/dim``,
    both on standardized features.  In two-kernel rows the first kernel
    named in the comparison is the normal surface's and the second is the
    spam surface's.
    """
    rbf = Rbf(1.0 / dim)
    tanh = Tanh(1.0 / dim, 0.0)
    ck = CombinedSpam()
    return [
        GridEntry("svm", Linear()),
        GridEntry("svm", rbf),
        GridEntry("svm", tanh),
        GridEntry("twsvm-linear"),
        GridEntry("twsvm-kernel", rbf),
        GridEntry("twsvm-kernel", ck),
        GridEntry("twsvm-multikernel", rbf, Linear()),
        GridEntry("twsvm-multikernel", ck, rbf),
        GridEntry("twsvm-multikernel", ck, Linear()),
    ]


def parse_grid(text):
    """One entry per line: ``algorithm [kernel_pos [kernel_neg]]``; ``#``
    starts a comment."""
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        if parts[0] not in ALGORITHMS or len(parts) > 3:
            raise InputError(f"grid line {lineno}: expected 'algorithm [kernel_pos [kernel_neg]]' "
                             f"with algorithm in {ALGORITHMS}, got {line.strip()!r}")
        kernels = [parse_kernel(p) for p in parts[1:]]
        entries.append(GridEntry(parts[0], *kernels))
    return entries


@dataclass(frozen=True)
class BenchmarkRow:
    algorithm: str
    kernel_pos: str
    kernel_neg: str
    accuracy: float
    f_measure: float
    acc_std: float
    report: MetricsReport = field(repr=False, compare=False, default=None)


CSV_HEADER = ("algorithm", "kernel_pos", "kernel_neg", "accuracy", "f_measure", "acc_std")


@dataclass(frozen=True)
class BenchmarkTable:
    rows: tuple

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow([r.algorithm, r.kernel_pos, r.kernel_neg, f"{r.accuracy:.6f}",
                             f"{r.f_measure:.6f}", f"{r.acc_std:.6f}"])
        return buf.getvalue()

    def to_text(self):
        cells = [list(CSV_HEADER)]
        for r in self.rows:
            cells.append([r.algorithm, r.kernel_pos, r.kernel_neg, f"{100 * r.accuracy:.2f}",
                          f"{r.f_measure:.4f}", f"{100 * r.acc_std:.2f}"])
        cells[0][3], cells[0][5] = "accuracy(%)", "acc_std(%)"
        widths = [max(len(row[j]) for row in cells) for j in range(len(CSV_HEADER))]
        lines = ["  ".join(c.ljust(w) if j < 3 else c.rjust(w)
                           for j, (c, w) in enumerate(zip(row, widths))).rstrip()
                 for row in cells]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def benchmark_grid(ds, grid, protocol=Protocol(), **options):
    """Run every grid entry under ``protocol``; ``options`` go to
    :func:`make_trainer` (penalties, tolerances, seed)."""
    grid = list(grid)
    if not grid:
        raise InputError("benchmark grid is empty")
    options.setdefault("seed", protocol.seed)
    rows = []
    for entry in grid:
        trainer = make_trainer(entry.algorithm, entry.kernel_pos, entry.kernel_neg, **options)
        report = protocol.run(trainer, ds)
        pos, neg = trainer.kernel_names
        rows.append(BenchmarkRow(entry.algorithm, pos, neg, report.mean, report.f_measure,
                                 report.std, report))
    return BenchmarkTable(tuple(rows))
