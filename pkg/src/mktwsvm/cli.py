"""Command-line interface: ``mktwsvm <command> [options]``.

Commands are ``train``, ``predict``, ``cv``, ``bench``, ``psd-check`` and
``synth``.  Exit codes: 0 success, 1 usage, 2 data or file format problem,
3 solver did not converge.

Every command accepts ``--config FILE`` holding ``key = value`` lines whose
keys are long option names (``kernel-pos`` or ``kernel_pos``).  Options
given on the command line win over the file.  Commands that use random
numbers take ``--seed``; without it a seed is drawn, printed to standard
error and can be passed back to reproduce the run.
"""

import argparse
import csv
import secrets
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import svm as _svm
from . import twsvm as _tw
from .data import (Label, filter_unknown, fit_standardize, load_dataset, save_csv,
                   synth_blobs, synth_circles, synth_spamlike)
from .errors import DataError, InputError, MkTwsvmError, TrainingError
from .evaluation import (ALGORITHMS, Protocol, benchmark_grid, default_grid,
                         evaluate, make_trainer, parse_grid)
from .kernels import gram, parse_kernel, psd_check
from .modelio import load_model, save_model

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 1, 2, 3

TRAIN_ALGORITHMS = ("svm", "twsvm") + ALGORITHMS[1:]


class UsageError(Exception):
    """Bad command line; reported with the usage text and exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# -- argument definitions -----------------------------------------------------

def _add_data_options(p, required=True):
    p.add_argument("--data", required=required, metavar="PATH",
                   help="CSV (id,label,f1..fd) or sparse file (.svm, .libsvm, .svmlight, .txt)")
    p.add_argument("--no-header", action="store_true", help="CSV file has no header row")
    p.add_argument("--label-column", default="1", metavar="COL",
                   help="label column, 0-based index or header name (default 1)")
    p.add_argument("--id-column", default="0", metavar="COL",
                   help="id column, 0-based index or header name; 'none' for row numbers")


def _add_seed(p):
    p.add_argument("--seed", type=int, default=None,
                   help="random seed; drawn and printed when omitted")


def _add_model_options(p, algorithms, default_algo):
    p.add_argument("--algo", choices=algorithms, default=default_algo,
                   help=f"training algorithm (default {default_algo}); 'twsvm' is the "
                        "two-kernel twin SVM")
    p.add_argument("--kernel-pos", default=None, metavar="SPEC",
                   help="spam-surface kernel, e.g. combined, linear, rbf:gamma=0.5 "
                        "(default combined for twsvm)")
    p.add_argument("--kernel-neg", default=None, metavar="SPEC",
                   help="normal-surface kernel (default linear)")
    p.add_argument("--kernel", default=None, metavar="SPEC",
                   help="SVM kernel (default linear); also sets both twin kernels "
                        "for twsvm-kernel")
    p.add_argument("--c1", type=float, default=1.0, help="spam-surface penalty (default 1.0)")
    p.add_argument("--c2", type=float, default=1.0, help="normal-surface penalty (default 1.0)")
    p.add_argument("--C", dest="C", type=float, default=1.0, help="SVM penalty (default 1.0)")
    p.add_argument("--epsilon", type=float, default=1e-6,
                   help="ridge added to the twin normal matrices (default 1e-6)")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="twin-SVM QP tolerance on the KKT residual (default 1e-6)")
    p.add_argument("--svm-tol", type=float, default=1e-3,
                   help="SVM tolerance on the KKT gap (default 1e-3)")
    p.add_argument("--max-iters", type=int, default=10000,
                   help="QP sweep limit (default 10000)")
    p.add_argument("--no-standardize", action="store_true",
                   help="train on raw features instead of z-scores")


def _add_protocol(p):
    p.add_argument("--protocol", choices=("cv", "split"), default="cv",
                   help="k-fold cross-validation or a single train/test split (default cv)")
    p.add_argument("--k", type=int, default=10, help="number of folds (default 10)")
    p.add_argument("--train-fraction", type=float, default=0.75,
                   help="train share for --protocol split (default 0.75)")
    p.add_argument("--stratified", action="store_true", help="keep class ratios per fold")
    p.add_argument("--csv", default=None, metavar="PATH", help="also write the table as CSV")


def build_parser():
    parser = _Parser(prog="mktwsvm", description="Twin SVM spam classification toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("train", help="fit a model and write it to a file")
    _add_data_options(p)
    _add_model_options(p, TRAIN_ALGORITHMS, "twsvm")
    p.add_argument("--out", required=True, metavar="PATH", help="model file to write")
    _add_seed(p)

    p = sub.add_parser("predict", help="label rows with a saved model")
    p.add_argument("--model", required=True, metavar="PATH")
    _add_data_options(p)
    p.add_argument("--out", default=None, metavar="PATH",
                   help="prediction CSV (default standard output)")

    p = sub.add_parser("cv", help="cross-validate one configuration")
    _add_data_options(p)
    _add_model_options(p, TRAIN_ALGORITHMS, "twsvm")
    _add_protocol(p)
    _add_seed(p)

    p = sub.add_parser("bench", help="run a benchmark grid")
    _add_data_options(p)
    p.add_argument("--grid", default="default",
                   help="'default' (nine rows) or a file of 'algorithm [kernel_pos [kernel_neg]]' lines")
    for name, kind, default in (("--c1", float, 1.0), ("--c2", float, 1.0), ("--C", float, 1.0),
                                ("--epsilon", float, 1e-6), ("--tol", float, 1e-6),
                                ("--svm-tol", float, 1e-3), ("--max-iters", int, 10000)):
        p.add_argument(name, dest=name[2:].replace("-", "_"), type=kind, default=default)
    p.add_argument("--no-standardize", action="store_true")
    _add_protocol(p)
    _add_seed(p)

    p = sub.add_parser("psd-check", help="smallest Gram eigenvalue of a kernel on a sample")
    _add_data_options(p)
    p.add_argument("--kernel", required=True, metavar="SPEC")
    p.add_argument("--sample", type=int, default=50, help="rows to sample (default 50)")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="eigenvalues above -tol count as PSD (default 1e-8)")
    p.add_argument("--no-standardize", action="store_true")
    _add_seed(p)

    p = sub.add_parser("synth", help="write a synthetic labeled CSV")
    p.add_argument("kind", choices=("blobs", "circles", "spamlike"))
    p.add_argument("--n", type=int, default=None,
                   help="rows per class (blobs, circles; default 50) or total rows (spamlike; default 500)")
    p.add_argument("--d", type=int, default=None,
                   help="feature count (blobs default 2, spamlike default 20)")
    p.add_argument("--sep", type=float, default=10.0, help="blob centre distance (default 10)")
    p.add_argument("--r-inner", type=float, default=1.0)
    p.add_argument("--r-outer", type=float, default=3.0)
    p.add_argument("--noise", type=float, default=0.05, help="ring radius noise (default 0.05)")
    p.add_argument("--out", required=True, metavar="PATH")
    _add_seed(p)

    for p in sub.choices.values():
        p.add_argument("--config", default=None, metavar="PATH",
                       help="key = value file of long options; command-line flags win")
    return parser


# -- config files -------------------------------------------------------------

def read_config(path):
    """``key = value`` pairs from a config file; ``#`` starts a comment."""
    pairs = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        pairs.append((key.strip().replace("_", "-"), value.strip()))
    return pairs


def _config_tokens(subparser, pairs, source):
    """Turn config pairs into option tokens understood by ``subparser``."""
    actions = {opt: a for a in subparser._actions for opt in a.option_strings}
    tokens = []
    for key, value in pairs:
        flag = f"--{key}"
        action = actions.get(flag)
        if action is None or key in ("config", "help"):
            raise UsageError(f"{source}: unknown option {key!r} for this command")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(flag)
            elif value.lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"{source}: {key} expects true or false, got {value!r}")
        else:
            tokens += [flag, value]
    return tokens


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    pairs = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    # positionals stay in place; config options go first so later flags win
    argv = list(argv)
    at = argv.index(args.command) + 1
    merged = argv[:at] + _config_tokens(sub, pairs, args.config) + argv[at:]
    return parser.parse_args(merged)


# -- helpers ------------------------------------------------------------------

def _seed(args):
    if args.seed is None:
        args.seed = secrets.randbelow(2**31)
        print(f"seed: {args.seed} (pass --seed {args.seed} to reproduce)", file=sys.stderr)
    return args.seed


def _column(value):
    return None if str(value).lower() in ("none", "") else value


def _load(args, dim=None):
    return load_dataset(args.data, dim=dim, has_header=not args.no_header,
                        label_column=_column(args.label_column),
                        id_column=_column(args.id_column))


def _load_labeled(args):
    ds = _load(args)
    before = len(ds)
    ds = filter_unknown(ds)
    if len(ds) < before:
        print(f"dropped {before - len(ds)} rows labeled unknown", file=sys.stderr)
    return ds


def _algorithm(args):
    return "twsvm-multikernel" if args.algo == "twsvm" else args.algo


def _trainer(args):
    algo = _algorithm(args)
    if algo == "svm":
        pos, neg = args.kernel, None
    elif algo == "twsvm-kernel":
        pos, neg = args.kernel or args.kernel_pos, None
    else:
        pos, neg = args.kernel_pos, args.kernel_neg
        if algo == "twsvm-linear" and (pos or neg):
            raise UsageError("twsvm-linear takes no kernel options")
    return make_trainer(algo, pos, neg, c1=args.c1, c2=args.c2, epsilon_reg=args.epsilon,
                        C=args.C, tol=args.tol, svm_tol=args.svm_tol, max_iters=args.max_iters,
                        seed=args.seed, standardize=not args.no_standardize)


def _protocol(args):
    if args.k < 2:
        raise UsageError("--k must be at least 2")
    if not 0 < args.train_fraction < 1:
        raise UsageError("--train-fraction must lie strictly between 0 and 1")
    return Protocol(args.protocol, args.k, args.seed, args.train_fraction, args.stratified)


def _fmt(x):
    return f"{x:.17g}"


# -- commands -----------------------------------------------------------------

def cmd_train(args):
    _seed(args)
    ds = _load_labeled(args)
    trainer = _trainer(args)
    model = trainer.fit(ds)
    save_model(model, args.out)
    diag = model.diagnostics
    counts = diag["class_counts"]
    pos, neg = trainer.kernel_names
    print(f"trained {trainer.algorithm} on {len(ds)} rows "
          f"({counts['spam']} spam, {counts['normal']} normal), kernels {pos} / {neg}")
    if isinstance(model, _svm.SvmModel):
        print(f"iterations: {diag['iterations']}  kkt gap: {diag['kkt_gap']:.3g}  "
              f"support vectors: {model.alphas.shape[0]}")
    else:
        its, res = diag["iterations"], diag["kkt_residual"]
        print(f"spam surface:   iterations {its[0]}  kkt residual {res[0]:.3g}")
        print(f"normal surface: iterations {its[1]}  kkt residual {res[1]:.3g}")
    print(f"model written to {args.out}")
    return EXIT_OK


def cmd_predict(args):
    model = load_model(args.model)
    ds = _load(args, dim=model.dim)
    if ds.dim != model.dim:
        raise DataError(f"{args.data} has {ds.dim} features but the model expects {model.dim}")
    is_svm = isinstance(model, _svm.SvmModel)
    if is_svm:
        labels, score = _svm.predict(model, ds.features)
        header, extra = ["id", "label", "score"], [score]
    else:
        labels, d_plus, d_minus = _tw.predict(model, ds.features)
        header, extra = ["id", "label", "dist_plus", "dist_minus"], [d_plus, d_minus]

    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        for i in range(len(ds)):
            writer.writerow([ds.ids[i], str(Label(int(labels[i])))]
                            + [_fmt(col[i]) for col in extra])
    finally:
        if args.out:
            out.close()
    known = ds.labels != Label.UNKNOWN
    if np.any(known):
        report = evaluate(labels[known], ds.labels[known])
        print(f"# {report.summary()} rows={int(known.sum())}")
    return EXIT_OK


def cmd_cv(args):
    _seed(args)
    ds = _load_labeled(args)
    trainer = _trainer(args)
    report = _protocol(args).run(trainer, ds)
    pos, neg = trainer.kernel_names
    print(f"{trainer.algorithm} kernels {pos} / {neg}, {args.protocol} seed {args.seed}")
    rows = report.per_fold or (report,)
    for f, r in enumerate(rows):
        print(f"fold {f}: {r.summary()}")
    print(f"overall: {report.summary()}")
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["fold", "accuracy", "precision", "recall", "f_measure",
                             "tp", "tn", "fp", "fn"])
            for f, r in enumerate(rows):
                cm = r.confusion
                writer.writerow([f, f"{r.accuracy:.6f}", f"{r.precision:.6f}", f"{r.recall:.6f}",
                                 f"{r.f_measure:.6f}", cm.tp, cm.tn, cm.fp, cm.fn])
    return EXIT_OK


def cmd_bench(args):
    _seed(args)
    ds = _load_labeled(args)
    if args.grid == "default":
        grid = default_grid(ds.dim)
    else:
        try:
            grid = parse_grid(Path(args.grid).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read grid file {args.grid}: {exc.strerror}") from None
    table = benchmark_grid(ds, grid, _protocol(args), c1=args.c1, c2=args.c2,
                           epsilon_reg=args.epsilon, C=args.C, tol=args.tol,
                           svm_tol=args.svm_tol, max_iters=args.max_iters,
                           standardize=not args.no_standardize)
    sys.stdout.write(table.to_text())
    if args.csv:
        Path(args.csv).write_text(table.to_csv(), encoding="utf-8")
    return EXIT_OK


def cmd_psd_check(args):
    _seed(args)
    spec = parse_kernel(args.kernel)
    if args.sample < 1:
        raise UsageError("--sample must be positive")
    ds = _load(args)
    rng = np.random.default_rng(args.seed)
    take = min(args.sample, len(ds))
    rows = ds.features[np.sort(rng.choice(len(ds), size=take, replace=False))]
    if not args.no_standardize:
        rows = fit_standardize(rows).transform(rows)
    report = psd_check(gram(spec, rows), tol=args.tol)
    print(f"kernel {spec.describe()} on {take} rows: min eigenvalue "
          f"{report.min_eigenvalue:.6g} ({'PSD' if report.is_psd else 'not PSD'} at tol {args.tol:g})")
    return EXIT_OK


def cmd_synth(args):
    _seed(args)
    if args.kind == "blobs":
        ds = synth_blobs(args.n or 50, args.d or 2, args.sep, args.seed)
    elif args.kind == "circles":
        ds = synth_circles(args.n or 50, args.r_inner, args.r_outer, args.noise, args.seed)
    else:
        ds = synth_spamlike(args.n or 500, args.d or 20, seed=args.seed)
    save_csv(ds, args.out)
    print(f"wrote {len(ds)} rows with {ds.dim} features to {args.out}")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "cv": cmd_cv,
    "bench": cmd_bench,
    "psd-check": cmd_psd_check,
    "synth": cmd_synth,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MkTwsvmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
