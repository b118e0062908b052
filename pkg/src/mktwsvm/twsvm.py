"""Twin support vector machines with one kernel per hyperplane.

A twin SVM fits two non-parallel surfaces: the spam surface lies close to
the spam rows and at least unit distance (in surface value) from the
normal rows, the normal surface the other way round.  A point takes the
class of the nearer surface.

For the spam surface with ``H = [A e]`` (spam rows) and ``G = [B e]``
(normal rows) the dual is

    min  1/2 a' G (H'H + eps I)^-1 G' a - e'a    s.t.  0 <= a <= c1

and ``[w; b] = -(H'H + eps I)^-1 G' a``.  The normal surface swaps the
roles of ``A`` and ``B`` with bound ``c2`` and recovers
``[w; b] = +(G'G + eps I)^-1 H' g``.  In kernel mode ``A`` and ``B`` are
replaced by their kernel blocks ``K(A, C)`` and ``K(B, C)`` against the
reference set ``C = [A; B]``, each surface using its own kernel.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .data import Dataset, Label, Scaler, fit_standardize
from .errors import DataError, InputError, TrainingError
from .kernels import CombinedSpam, KernelSpec, Linear, as_points, gram
from .qp import DEFAULT_MAX_ITERS, DEFAULT_TOL, BoxQp, solve_box_qp


@dataclass(frozen=True)
class QpOptions:
    max_iters: int = DEFAULT_MAX_ITERS
    tol: float = DEFAULT_TOL
    seed: int = 0


@dataclass(frozen=True)
class TwsvmConfig:
    c1: float = 1.0
    c2: float = 1.0
    epsilon_reg: float = 1e-6
    kernel_pos: KernelSpec = field(default_factory=CombinedSpam)
    kernel_neg: KernelSpec = field(default_factory=Linear)
    qp_opts: QpOptions = field(default_factory=QpOptions)
    standardize: bool = True
    parallel: bool = False

    def __post_init__(self):
        for name in ("c1", "c2", "epsilon_reg"):
            value = getattr(self, name)
            if not (value > 0 and np.isfinite(value)):
                raise InputError(f"{name} must be a positive number, got {value}")

    @property
    def single_kernel(self):
        return self.kernel_pos == self.kernel_neg


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Spam rows ``A`` and normal rows ``B``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = as_points(self.A, "spam rows")
        B = as_points(self.B, "normal rows")
        if A.shape[0] == 0 or B.shape[0] == 0:
            raise DataError("training needs at least one spam and one normal row")
        if A.shape[1] != B.shape[1]:
            raise InputError(f"spam rows have {A.shape[1]} features, normal rows {B.shape[1]}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_dataset(cls, ds):
        counts = ds.class_counts()
        if counts[Label.SPAM] == 0 or counts[Label.NORMAL] == 0:
            raise DataError(f"dataset {ds.name!r} needs both classes, has "
                            f"{counts[Label.SPAM]} spam and {counts[Label.NORMAL]} normal rows")
        return cls(ds.spam, ds.normal)

    @property
    def dim(self):
        return self.A.shape[1]

    def stacked(self):
        return np.vstack([self.A, self.B])


@dataclass(frozen=True, eq=False)
class TwsvmModel:
    mode: str
    u_plus: np.ndarray
    b_plus: float
    norm_plus: float
    u_minus: np.ndarray
    b_minus: float
    norm_minus: float
    reference_points: np.ndarray
    kernel_pos: KernelSpec
    kernel_neg: KernelSpec
    scaler: Scaler
    epsilon_reg: float = 1e-6
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self):
        return self.scaler.dim

    def surfaces(self, X):
        """Raw surface values ``(f_plus(x), f_minus(x))`` of standardized rows."""
        if self.mode == "linear":
            return X @ self.u_plus + self.b_plus, X @ self.u_minus + self.b_minus
        C = self.reference_points
        f_plus = gram(self.kernel_pos, X, C).entries @ self.u_plus + self.b_plus
        f_minus = gram(self.kernel_neg, X, C).entries @ self.u_minus + self.b_minus
        return f_plus, f_minus


@dataclass(frozen=True)
class Decision:
    label: Label
    dist_plus: float
    dist_minus: float


def _solve_plane(near, far, bound, eps, opts, sign):
    """One twin-SVM dual.  ``near``/``far`` are the (kernelized) rows the
    surface should pass close to / stay away from."""
    H = np.hstack([near, np.ones((near.shape[0], 1))])
    G = np.hstack([far, np.ones((far.shape[0], 1))])
    M = H.T @ H
    M[np.diag_indices_from(M)] += eps
    try:
        factor = cho_factor(M, lower=True)
    except np.linalg.LinAlgError as exc:
        raise TrainingError(f"normal matrix is not positive definite: {exc}") from None
    Y = solve_triangular(factor[0], G.T, lower=True)
    Q = Y.T @ Y
    Q = 0.5 * (Q + Q.T)
    problem = BoxQp(Q, -np.ones(G.shape[0]), 0.0, bound)
    sol = solve_box_qp(problem, max_iters=opts.max_iters, tol=opts.tol, seed=opts.seed)
    z = sign * cho_solve(factor, G.T @ sol.alpha)
    return z[:-1], float(z[-1]), sol


def _check_solutions(sols):
    diag = {
        "iterations": [s.iterations for s in sols],
        "kkt_residual": [s.kkt_residual for s in sols],
        "objective": [s.objective for s in sols],
    }
    failed = [name for name, s in zip(("spam", "normal"), sols) if not s.converged]
    if failed:
        raise TrainingError(
            f"QP for the {' and '.join(failed)} surface did not converge "
            f"(kkt residuals {diag['kkt_residual']}, iterations {diag['iterations']})", diag)
    return diag


def _prepare(ts, cfg):
    if isinstance(ts, Dataset):
        ts = TrainingSet.from_dataset(ts)
    scaler = fit_standardize(ts.stacked()) if cfg.standardize else Scaler.identity(ts.dim)
    return ts, scaler, scaler.transform(ts.A), scaler.transform(ts.B)


def _run_pair(jobs, parallel):
    if parallel:
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = [pool.submit(_solve_plane, *job) for job in jobs]
            return [f.result() for f in futures]
    return [_solve_plane(*job) for job in jobs]


def train_linear(ts, cfg=TwsvmConfig()):
    """Linear twin SVM; ``ts`` is a :class:`TrainingSet` or a labeled Dataset."""
    ts, scaler, A, B = _prepare(ts, cfg)
    eps, opts = cfg.epsilon_reg, cfg.qp_opts
    (w_p, b_p, sol_p), (w_m, b_m, sol_m) = _run_pair(
        [(A, B, cfg.c1, eps, opts, -1.0), (B, A, cfg.c2, eps, opts, 1.0)], cfg.parallel)
    diag = _check_solutions([sol_p, sol_m])
    diag["class_counts"] = {"spam": ts.A.shape[0], "normal": ts.B.shape[0]}
    return TwsvmModel(
        mode="linear",
        u_plus=w_p, b_plus=b_p, norm_plus=_linear_norm(w_p, eps),
        u_minus=w_m, b_minus=b_m, norm_minus=_linear_norm(w_m, eps),
        reference_points=np.empty((0, ts.dim)),
        kernel_pos=Linear(), kernel_neg=Linear(),
        scaler=scaler, epsilon_reg=eps, diagnostics=diag,
    )


def _linear_norm(w, eps):
    norm = float(np.linalg.norm(w))
    # w == 0 only for coincident data; fall back to the kernel-mode guard
    return norm if norm > 0 else float(np.sqrt(eps))


def train_multikernel(ts, cfg=TwsvmConfig()):
    """Twin SVM whose spam surface uses ``cfg.kernel_pos`` and whose normal
    surface uses ``cfg.kernel_neg``, both expanded over ``C = [A; B]``."""
    ts, scaler, A, B = _prepare(ts, cfg)
    C = np.vstack([A, B])
    na = A.shape[0]
    eps, opts = cfg.epsilon_reg, cfg.qp_opts

    K_pos = gram(cfg.kernel_pos, C, C).entries
    K_neg = K_pos if cfg.single_kernel else gram(cfg.kernel_neg, C, C).entries
    (u_p, b_p, sol_p), (u_m, b_m, sol_m) = _run_pair(
        [(K_pos[:na], K_pos[na:], cfg.c1, eps, opts, -1.0),
         (K_neg[na:], K_neg[:na], cfg.c2, eps, opts, 1.0)], cfg.parallel)
    diag = _check_solutions([sol_p, sol_m])
    diag["class_counts"] = {"spam": na, "normal": ts.B.shape[0]}
    return TwsvmModel(
        mode="kernel",
        u_plus=u_p, b_plus=b_p, norm_plus=_kernel_norm(u_p, K_pos, eps),
        u_minus=u_m, b_minus=b_m, norm_minus=_kernel_norm(u_m, K_neg, eps),
        reference_points=C,
        kernel_pos=cfg.kernel_pos, kernel_neg=cfg.kernel_neg,
        scaler=scaler, epsilon_reg=eps, diagnostics=diag,
    )


def _kernel_norm(u, K, eps):
    # an indefinite kernel can make u'Ku negative; clamp before the guard
    return float(np.sqrt(max(float(u @ K @ u), 0.0) + eps))


def train_kernel(ts, cfg=TwsvmConfig(kernel_pos=Linear(), kernel_neg=Linear())):
    """Single-kernel twin SVM: ``cfg.kernel_pos`` on both surfaces."""
    return train_multikernel(ts, replace(cfg, kernel_neg=cfg.kernel_pos))


def distances(m, X):
    """Distances of raw (unstandardized) rows to both surfaces."""
    X = as_points(X, "x")
    if X.shape[1] != m.dim:
        raise InputError(f"model expects {m.dim} features, got {X.shape[1]}")
    f_plus, f_minus = m.surfaces(m.scaler.transform(X))
    return np.abs(f_plus) / m.norm_plus, np.abs(f_minus) / m.norm_minus


def predict(m, X):
    """Labels (``Label`` codes) and both distances for a batch of rows."""
    d_plus, d_minus = distances(m, X)
    labels = np.where(d_plus < d_minus, Label.SPAM, Label.NORMAL).astype(np.int8)
    return labels, d_plus, d_minus


def decide(m, x):
    """Class of one feature vector: the nearer surface, normal on a tie."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InputError("decide expects a single feature vector")
    labels, d_plus, d_minus = predict(m, x)
    return Decision(Label(int(labels[0])), float(d_plus[0]), float(d_minus[0]))
