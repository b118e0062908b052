"""Box-constrained convex quadratic programs.

    minimize    f(a) = 1/2 a'Qa + q'a
    subject to  lower <= a <= upper

solved by cyclic coordinate descent with exact one-dimensional
minimization clipped to the box.  This is the engine behind both dual
problems of the twin SVM, which have no equality constraint.

Twin-SVM duals are often heavily rank deficient, and plain coordinate
descent then needs tens of thousands of sweeps to push the KKT residual of
the free coordinates below 1e-6.  Every ``polish_every`` sweeps the solver
therefore also minimizes exactly over the current free set (minimum-norm
least squares) and moves as far towards that point as the box allows.
Such a step never increases a convex objective, so the per-sweep objective
stays monotone.
"""

from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.linalg import eigh

from .errors import InputError

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 10000
DEFAULT_POLISH_EVERY = 10
_ZERO_DIAG = 1e-12


@dataclass(frozen=True)
class BoxQp:
    Q: np.ndarray
    q: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        Q = np.ascontiguousarray(self.Q, dtype=np.float64)
        q = np.ascontiguousarray(self.q, dtype=np.float64).ravel()
        n = q.shape[0]
        lower = np.broadcast_to(np.asarray(self.lower, dtype=np.float64), (n,)).copy()
        upper = np.broadcast_to(np.asarray(self.upper, dtype=np.float64), (n,)).copy()
        if Q.shape != (n, n):
            raise InputError(f"Q has shape {Q.shape}, expected {(n, n)}")
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(q))):
            raise InputError("Q and q must be finite")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower > upper):
            raise InputError("box bounds must satisfy lower <= upper")
        if n and np.max(np.abs(Q - Q.T)) > 1e-9 * max(1.0, np.max(np.abs(Q))):
            raise InputError("Q is not symmetric")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def size(self):
        return self.q.shape[0]

    def objective(self, alpha):
        alpha = np.asarray(alpha, dtype=np.float64)
        return float(0.5 * alpha @ (self.Q @ alpha) + self.q @ alpha)


@dataclass
class QpSolution:
    alpha: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)


@numba.njit(cache=True)
def _projected_gradient(alpha, g, lower, upper):
    worst = 0.0
    for i in range(alpha.shape[0]):
        gi = g[i]
        at_lower = alpha[i] <= lower[i]
        at_upper = alpha[i] >= upper[i]
        if at_lower and at_upper:
            v = 0.0
        elif at_lower:
            v = -gi if gi < 0.0 else 0.0
        elif at_upper:
            v = gi if gi > 0.0 else 0.0
        else:
            v = abs(gi)
        if v > worst:
            worst = v
    return worst


@numba.njit(cache=True)
def _sweeps(Q, q, lower, upper, alpha, g, order, max_iters, tol, history):
    n = alpha.shape[0]
    trace = 0.0
    for i in range(n):
        trace += Q[i, i]
    sweeps = 0
    resid = _projected_gradient(alpha, g, lower, upper)
    while resid > tol and sweeps < max_iters:
        for t in range(n):
            i = order[t]
            qii = Q[i, i]
            if qii > _ZERO_DIAG:
                target = alpha[i] - g[i] / qii
            elif trace > _ZERO_DIAG:
                target = alpha[i] - g[i] / trace
            elif g[i] > 0.0:
                target = lower[i]
            elif g[i] < 0.0:
                target = upper[i]
            else:
                target = alpha[i]
            if target < lower[i]:
                target = lower[i]
            elif target > upper[i]:
                target = upper[i]
            delta = target - alpha[i]
            if delta != 0.0:
                alpha[i] = target
                for j in range(n):
                    g[j] += delta * Q[j, i]
        sweeps += 1
        obj = 0.0
        for i in range(n):
            obj += alpha[i] * (g[i] + q[i])
        history[sweeps - 1] = 0.5 * obj
        resid = _projected_gradient(alpha, g, lower, upper)
    return sweeps, resid


def kkt_residual(p, alpha):
    """Largest projected-gradient component of ``p`` at ``alpha``.

    Free coordinates contribute ``|g_i|``, coordinates at the lower bound
    ``max(0, -g_i)``, at the upper bound ``max(0, g_i)``, with
    ``g = Q alpha + q``.
    """
    alpha = np.asarray(alpha, dtype=np.float64).ravel()
    if alpha.shape != p.q.shape:
        raise InputError(f"alpha has length {alpha.shape[0]}, expected {p.size}")
    if np.any(alpha < p.lower) or np.any(alpha > p.upper) or not np.all(np.isfinite(alpha)):
        raise InputError("alpha is not feasible for the box")
    g = p.Q @ alpha + p.q
    return float(_projected_gradient(alpha, g, p.lower, p.upper))


def _subspace_direction(Qf, gf, width):
    """Newton direction on the well-conditioned part of ``Qf`` plus a
    steepest-descent component of length ``width`` on its near-null part."""
    w, V = eigh(Qf)
    c = V.T @ gf
    big = w > 1e-10 * max(float(w[-1]), 0.0)
    d = -V[:, big] @ (c[big] / w[big])
    flat = c[~big]
    size = float(np.linalg.norm(flat))
    if size > 0:
        d -= V[:, ~big] @ (flat * (width / size))
    return d


def _polish(p, alpha):
    """Subspace steps on the free coordinates; returns True if alpha moved.

    Each step minimizes exactly along a descent direction for the free
    block, stopping early where a coordinate reaches its bound.  That
    coordinate is then pinned and the smaller block is handled again.
    """
    free = np.flatnonzero((alpha > p.lower) & (alpha < p.upper))
    trial = alpha.copy()
    before = p.objective(alpha)
    while free.size:
        g = p.Q @ trial + p.q
        Qf = p.Q[np.ix_(free, free)]
        width = float(np.max(p.upper[free] - p.lower[free]))
        d = _subspace_direction(Qf, g[free], width if np.isfinite(width) else 1.0)
        slope = float(g[free] @ d)
        if not np.all(np.isfinite(d)) or not slope < 0:
            break
        curv = float(d @ Qf @ d)
        best = -slope / curv if curv > 0 else np.inf
        a = trial[free]
        with np.errstate(divide="ignore", invalid="ignore"):
            room = np.where(d > 0, (p.upper[free] - a) / d,
                            np.where(d < 0, (p.lower[free] - a) / d, np.inf))
        hit = int(np.argmin(room))
        t = min(best, float(room[hit]))
        if not np.isfinite(t):
            break
        trial[free] = np.clip(a + max(t, 0.0) * d, p.lower[free], p.upper[free])
        if best < room[hit]:
            break
        trial[free[hit]] = p.upper[free[hit]] if d[hit] > 0 else p.lower[free[hit]]
        free = np.delete(free, hit)
    if not p.objective(trial) <= before or np.array_equal(trial, alpha):
        return False
    alpha[:] = trial
    return True


def solve_box_qp(p, max_iters=DEFAULT_MAX_ITERS, tol=DEFAULT_TOL, seed=0, alpha0=None,
                 polish_every=DEFAULT_POLISH_EVERY):
    """Minimize a box-constrained convex quadratic.

    Coordinates are visited in a fixed order drawn once from ``seed``;
    one iteration is a full sweep over all coordinates.  ``Q`` must be
    positive semidefinite (callers regularize).  Running out of sweeps is
    not an error: the result has ``converged=False`` and holds the last
    (and best) feasible iterate.  ``polish_every=0`` disables the subspace
    step and leaves pure coordinate descent.
    """
    if max_iters < 0 or not tol > 0:
        raise InputError("max_iters must be >= 0 and tol > 0")
    n = p.size
    start = np.zeros(n) if alpha0 is None else np.asarray(alpha0, dtype=np.float64)
    alpha = np.clip(start, p.lower, p.upper)
    order = np.random.default_rng(seed).permutation(n).astype(np.int64)
    history = np.empty(max(int(max_iters), 0), dtype=np.float64)
    chunk = int(polish_every) if polish_every and polish_every > 0 else int(max_iters)
    sweeps = 0
    resid = kkt_residual(p, alpha)
    while resid > tol and sweeps < max_iters:
        # fresh gradient each round keeps the final residual exact
        g = p.Q @ alpha + p.q
        budget = min(chunk, int(max_iters) - sweeps)
        done, _ = _sweeps(p.Q, p.q, p.lower, p.upper, alpha, g, order,
                          budget, float(tol), history[sweeps:])
        sweeps += done
        resid = kkt_residual(p, alpha)
        if resid > tol and polish_every and done == budget and _polish(p, alpha):
            history[sweeps - 1] = p.objective(alpha)
            resid = kkt_residual(p, alpha)
        if done == 0:
            break
    assert np.all(alpha >= p.lower) and np.all(alpha <= p.upper)
    return QpSolution(
        alpha=alpha,
        objective=p.objective(alpha),
        kkt_residual=resid,
        iterations=sweeps,
        converged=bool(resid <= tol),
        history=history[:sweeps].tolist(),
    )
