"""Brute-force reference solvers used as test oracles.

They enumerate every active-set pattern (each variable at its lower bound,
at its upper bound, or free) and are only meant for n <= 4.  The optimum of
a convex box QP is a KKT point of some face of the box, and on that face
the free variables solve a linear system, so the best feasible candidate
over all 3**n patterns is the global minimum.
"""

import itertools

import mpmath
import numpy as np

FEAS_TOL = 1e-9


def _objective(Q, q, x):
    return 0.5 * x @ Q @ x + q @ x


def box_qp_oracle(Q, q, lower, upper):
    """Minimum of ``1/2 x'Qx + q'x`` over ``lower <= x <= upper``.

    Returns ``(objective, x)``.
    """
    Q = np.asarray(Q, dtype=float)
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (n,))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (n,))
    best, arg = np.inf, None
    for pattern in itertools.product((0, 1, 2), repeat=n):
        pattern = np.array(pattern)
        x = np.where(pattern == 1, upper, lower).astype(float)
        free = np.flatnonzero(pattern == 2)
        fixed = np.flatnonzero(pattern != 2)
        if free.size:
            rhs = -(q[free] + Q[np.ix_(free, fixed)] @ x[fixed])
            x[free] = np.linalg.lstsq(Q[np.ix_(free, free)], rhs, rcond=None)[0]
        if np.any(x < lower - FEAS_TOL) or np.any(x > upper + FEAS_TOL):
            continue
        x = np.clip(x, lower, upper)
        val = _objective(Q, q, x)
        if val < best:
            best, arg = val, x
    return best, arg


def svm_dual_oracle(K, y, C):
    """Maximum of ``e'a - 1/2 a'(yy'*K)a`` subject to ``0 <= a <= C`` and
    ``y'a = 0``.  Returns ``(objective, a)``."""
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    Q = np.outer(y, y) * K
    q = -np.ones(n)
    best, arg = np.inf, None
    for pattern in itertools.product((0, 1, 2), repeat=n):
        pattern = np.array(pattern)
        a = np.where(pattern == 1, C, 0.0)
        free = np.flatnonzero(pattern == 2)
        fixed = np.flatnonzero(pattern != 2)
        if free.size:
            m = free.size
            lhs = np.zeros((m + 1, m + 1))
            lhs[:m, :m] = Q[np.ix_(free, free)]
            lhs[:m, m] = y[free]
            lhs[m, :m] = y[free]
            rhs = np.concatenate([-(q[free] + Q[np.ix_(free, fixed)] @ a[fixed]),
                                  [-(y[fixed] @ a[fixed])]])
            a[free] = np.linalg.lstsq(lhs, rhs, rcond=None)[0][:m]
        if np.any(a < -FEAS_TOL) or np.any(a > C + FEAS_TOL) or abs(y @ a) > FEAS_TOL:
            continue
        a = np.clip(a, 0.0, C)
        val = _objective(Q, q, a)
        if val < best:
            best, arg = val, a
    return -best, arg


def combined_scalar(s, k=1, b=0, digits=30):
    """``tanh(k s - b)**2 + s`` evaluated with ``digits`` significant digits."""
    with mpmath.workdps(digits):
        s = mpmath.mpf(s)
        return float(mpmath.tanh(k * s - b) ** 2 + s)


def twsvm_linear_oracle(A, B, c1=1.0, c2=1.0, eps=1e-6):
    """Both linear twin-SVM surfaces computed with explicit inverses and the
    enumeration oracle above.  Rows must already be standardized.

    Returns ``((w_plus, b_plus), (w_minus, b_minus))``.
    """
    H = np.hstack([A, np.ones((len(A), 1))])
    G = np.hstack([B, np.ones((len(B), 1))])
    eye = np.eye(H.shape[1])
    Hinv = np.linalg.inv(H.T @ H + eps * eye)
    Ginv = np.linalg.inv(G.T @ G + eps * eye)
    _, alpha = box_qp_oracle(G @ Hinv @ G.T, -np.ones(len(B)), 0.0, c1)
    _, gamma = box_qp_oracle(H @ Ginv @ H.T, -np.ones(len(A)), 0.0, c2)
    zp = -Hinv @ G.T @ alpha
    zm = Ginv @ H.T @ gamma
    return (zp[:-1], zp[-1]), (zm[:-1], zm[-1])


def random_psd(rng, n, rank=None):
    """A random PSD matrix of the given rank (full rank by default)."""
    rank = n if rank is None else rank
    F = rng.standard_normal((n, rank))
    return F @ F.T
