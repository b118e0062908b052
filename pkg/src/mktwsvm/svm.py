"""Soft-margin kernel SVM trained by pairwise (SMO-style) updates.

The dual in minimization form is

    min  f(a) = 1/2 a'Qa - e'a,   Q_ij = y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C,  sum_i y_i a_i = 0.

Each step moves two multipliers along ``a_i += y_i t, a_j -= y_j t`` which
leaves the equality constraint untouched.  ``i`` is the maximal KKT
violator and ``j`` the partner with the best second-order gain (Fan, Chen
and Lin, JMLR 2005).
"""

from dataclasses import dataclass, field

import numba
import numpy as np

from .data import Dataset, Label, Scaler, fit_standardize
from .errors import InputError, TrainingError
from .kernels import KernelSpec, Linear, as_points, gram

_TAU = 1e-12


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    kernel: KernelSpec = field(default_factory=Linear)
    tol: float = 1e-3
    max_passes: int = 1000
    seed: int = 0
    standardize: bool = True

    def __post_init__(self):
        if not (self.C > 0 and np.isfinite(self.C)):
            raise InputError(f"C must be a positive number, got {self.C}")
        if not self.tol > 0:
            raise InputError(f"tol must be positive, got {self.tol}")
        if self.max_passes < 1:
            raise InputError(f"max_passes must be >= 1, got {self.max_passes}")


@dataclass(frozen=True, eq=False)
class SvmModel:
    alphas: np.ndarray
    bias: float
    support_points: np.ndarray
    support_labels: np.ndarray
    kernel: KernelSpec
    scaler: Scaler
    C: float = 1.0
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self):
        return self.scaler.dim


@dataclass(frozen=True)
class SvmPrediction:
    label: Label
    score: float


@numba.njit(cache=True)
def _violators(alpha, G, y, C):
    """Largest -y_t G_t over I_up and smallest over I_low."""
    i = -1
    gmax = -np.inf
    gmin = np.inf
    for t in range(alpha.shape[0]):
        v = -y[t] * G[t]
        if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
            if v > gmax:
                gmax = v
                i = t
        if (y[t] < 0 and alpha[t] < C) or (y[t] > 0 and alpha[t] > 0):
            if v < gmin:
                gmin = v
    return i, gmax, gmin


@numba.njit(cache=True)
def _pair_step(alpha, G, y, K, C, i, j):
    """Move (i, j) to the optimum of the pair subproblem; return step t."""
    a = K[i, i] + K[j, j] - 2.0 * K[i, j]
    if a <= 0.0:
        a = _TAU
    b = -y[i] * G[i] + y[j] * G[j]
    t = b / a
    # a_i + y_i t in [0, C] and a_j - y_j t in [0, C]
    if y[i] > 0:
        hi_i, lo_i = C - alpha[i], -alpha[i]
    else:
        hi_i, lo_i = alpha[i], alpha[i] - C
    if y[j] > 0:
        hi_j, lo_j = alpha[j], alpha[j] - C
    else:
        hi_j, lo_j = C - alpha[j], -alpha[j]
    hi = min(hi_i, hi_j)
    lo = max(lo_i, lo_j)
    clip_i = False
    clip_j = False
    if t >= hi:
        t = hi
        clip_i = hi == hi_i
        clip_j = not clip_i
    elif t <= lo:
        t = lo
        clip_i = lo == lo_i
        clip_j = not clip_i
    if t == 0.0:
        return 0.0
    new_i = alpha[i] + y[i] * t
    new_j = alpha[j] - y[j] * t
    # land exactly on the bound that limited the step
    if clip_i:
        new_i = 0.0 if new_i < 0.5 * C else C
    if clip_j:
        new_j = 0.0 if new_j < 0.5 * C else C
    new_i = min(max(new_i, 0.0), C)
    new_j = min(max(new_j, 0.0), C)
    di = new_i - alpha[i]
    dj = new_j - alpha[j]
    alpha[i] = new_i
    alpha[j] = new_j
    for k in range(alpha.shape[0]):
        G[k] += y[k] * (y[i] * di * K[k, i] + y[j] * dj * K[k, j])
    return t


@numba.njit(cache=True)
def _smo(K, y, C, tol, max_iter, seed, alpha, G, history, balance, record):
    np.random.seed(seed)
    n = alpha.shape[0]
    it = 0
    gap = np.inf
    stalls = 0
    while it < max_iter:
        i, gmax, gmin = _violators(alpha, G, y, C)
        gap = gmax - gmin
        if i < 0 or gap < tol:
            break
        # second-order partner among I_low members with -y_t G_t < gmax
        j = -1
        best = np.inf
        for t in range(n):
            if not ((y[t] < 0 and alpha[t] < C) or (y[t] > 0 and alpha[t] > 0)):
                continue
            bt = gmax + y[t] * G[t]
            if bt <= 0.0:
                continue
            a = K[i, i] + K[t, t] - 2.0 * K[i, t]
            if a <= 0.0:
                a = _TAU
            score = -(bt * bt) / a
            if score < best:
                best = score
                j = t
        step = 0.0
        if j >= 0:
            step = _pair_step(alpha, G, y, K, C, i, j)
        if step == 0.0:
            # numerical stall: try a random partner from I_low
            stalls += 1
            if stalls > n + 10:
                break
            j = np.random.randint(0, n)
            if j != i and ((y[j] < 0 and alpha[j] < C) or (y[j] > 0 and alpha[j] > 0)):
                _pair_step(alpha, G, y, K, C, i, j)
        else:
            stalls = 0
        if record:
            obj = 0.0
            eq = 0.0
            for k in range(n):
                obj += alpha[k] * (G[k] - 1.0)
                eq += alpha[k] * y[k]
            history[it] = -0.5 * obj
            balance[it] = abs(eq)
        it += 1
    return it, gap


def _bias(alpha, G, y, C):
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        return -float(np.mean(yG[free]))
    upper = alpha >= C
    lower = alpha <= 0
    ub_mask = (upper & (y < 0)) | (lower & (y > 0))
    lb_mask = (upper & (y > 0)) | (lower & (y < 0))
    ub = np.min(yG[ub_mask]) if np.any(ub_mask) else np.inf
    lb = np.max(yG[lb_mask]) if np.any(lb_mask) else -np.inf
    if np.isinf(ub) or np.isinf(lb):
        return -float(ub if np.isfinite(ub) else lb)
    return -float(0.5 * (ub + lb))


def dual_objective(K, y, alpha):
    """Maximization-form SVM dual ``e'a - 1/2 a'Qa``."""
    v = alpha * y
    return float(np.sum(alpha) - 0.5 * v @ K @ v)


@dataclass(frozen=True, eq=False)
class DualSolution:
    """Result of :func:`solve_svm_dual`.

    ``history`` and ``balance`` are filled only when recording: the dual
    objective and ``|sum a_i y_i|`` after every pairwise update.
    """

    alpha: np.ndarray
    gradient: np.ndarray
    iterations: int
    kkt_gap: float
    history: np.ndarray
    balance: np.ndarray


def solve_svm_dual(K, y, C, tol=1e-6, max_iter=None, seed=0, record=False):
    """Pairwise-update solver on a precomputed Gram matrix.

    Stops when the maximal KKT violation gap drops below ``tol`` or after
    ``max_iter`` updates (default ``1000 n``).
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if max_iter is None:
        max_iter = 1000 * max(n, 1)
    alpha = np.zeros(n)
    G = -np.ones(n)
    size = max_iter if record else 0
    history, balance = np.empty(size), np.empty(size)
    it, gap = _smo(K, y, float(C), float(tol), int(max_iter), int(seed),
                   alpha, G, history, balance, bool(record))
    return DualSolution(alpha, G, int(it), float(gap), history[:it] if record else history,
                        balance[:it] if record else balance)


def train_svm(ts, cfg=SvmConfig()):
    """Fit the SVM on a TrainingSet (spam rows ``A``, normal rows ``B``) or
    a labeled Dataset."""
    from .twsvm import TrainingSet

    if isinstance(ts, Dataset):
        ts = TrainingSet.from_dataset(ts)
    X = ts.stacked()
    y = np.concatenate([np.ones(ts.A.shape[0]), -np.ones(ts.B.shape[0])])
    scaler = fit_standardize(X) if cfg.standardize else Scaler.identity(ts.dim)
    Z = scaler.transform(X)
    K = gram(cfg.kernel, Z, Z).entries
    n = y.shape[0]
    sol = solve_svm_dual(K, y, cfg.C, cfg.tol, cfg.max_passes * n, cfg.seed)
    alpha, G, it, gap = sol.alpha, sol.gradient, sol.iterations, sol.kkt_gap
    diag = {
        "iterations": it,
        "kkt_gap": gap,
        "equality_residual": float(abs(alpha @ y)),
        "dual": alpha,
        "dual_objective": dual_objective(K, y, alpha),
        "class_counts": {"spam": ts.A.shape[0], "normal": ts.B.shape[0]},
    }
    if not gap < cfg.tol:
        raise TrainingError(f"SMO did not converge after {it} updates (KKT gap {gap:.3g})", diag)
    support = alpha > 0
    return SvmModel(
        alphas=alpha[support],
        bias=_bias(alpha, G, y, cfg.C) + 0.0,
        support_points=Z[support],
        support_labels=y[support],
        kernel=cfg.kernel,
        scaler=scaler,
        C=cfg.C,
        diagnostics=diag,
    )


def scores(m, X):
    X = as_points(X, "x")
    if X.shape[1] != m.dim:
        raise InputError(f"model expects {m.dim} features, got {X.shape[1]}")
    Z = m.scaler.transform(X)
    if m.alphas.size == 0:
        return np.full(Z.shape[0], m.bias)
    return gram(m.kernel, Z, m.support_points).entries @ (m.alphas * m.support_labels) + m.bias


def predict(m, X):
    """Labels and decision scores for a batch of raw rows."""
    s = scores(m, X)
    return np.where(s > 0, Label.SPAM, Label.NORMAL).astype(np.int8), s


def predict_svm(m, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InputError("predict_svm expects a single feature vector")
    labels, s = predict(m, x)
    return SvmPrediction(Label(int(labels[0])), float(s[0]))
