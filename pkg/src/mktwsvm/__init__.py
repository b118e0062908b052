"""Twin support vector machines with per-class kernels for web spam detection.

The spam hyperplane and the normal hyperplane can each use their own
kernel.  The package also ships a box-constrained QP solver, an SMO
baseline SVM, data loaders, cross-validation and a command-line tool.
"""

__version__ = "0.1.0"

from .data import (Dataset, Label, Scaler, filter_unknown, fit_standardize, kfold,
                   load_csv, load_dataset, load_sparse, save_csv, split, synth_blobs,
                   synth_circles, synth_spamlike)
from .errors import (DataError, FormatError, InputError, MkTwsvmError, TrainingError,
                     VersionError)
from .evaluation import (MetricsReport, Protocol, benchmark_grid, cross_validate,
                         default_grid, make_trainer)
from .kernels import (CombinedSpam, KernelSpec, Linear, Polynomial, Rbf, Tanh, eval_kernel,
                      gram, parse_kernel, psd_check)
from .modelio import load_model, save_model
from .qp import BoxQp, QpSolution, solve_box_qp
from .svm import SvmConfig, SvmModel, predict_svm, train_svm
from .twsvm import (TrainingSet, TwsvmConfig, TwsvmModel, decide, train_kernel,
                    train_linear, train_multikernel)

__all__ = [
    "BoxQp", "CombinedSpam", "DataError", "Dataset", "FormatError", "InputError",
    "KernelSpec", "Label", "Linear", "MetricsReport", "MkTwsvmError", "Polynomial",
    "Protocol", "QpSolution", "Rbf", "Scaler", "SvmConfig", "SvmModel", "Tanh",
    "TrainingError", "TrainingSet", "TwsvmConfig", "TwsvmModel", "VersionError",
    "benchmark_grid", "cross_validate", "decide", "default_grid", "eval_kernel",
    "filter_unknown", "fit_standardize", "gram", "kfold", "load_csv", "load_dataset",
    "load_model", "load_sparse", "make_trainer", "parse_kernel", "predict_svm",
    "psd_check", "save_csv", "save_model", "solve_box_qp", "split", "synth_blobs",
    "synth_circles", "synth_spamlike", "train_kernel", "train_linear",
    "train_multikernel", "train_svm",
]
