"""Kernel functions, Gram matrices and a numerical Mercer diagnostic.

Every kernel here is a function of the inner product ``<x, y>`` or of the
squared distance ``|x - y|^2``.  Both are computed by one broadcast routine
(elementwise products reduced along the feature axis), so a Gram entry is
bit-identical to the scalar evaluation of the same pair and ``k(x, y)`` is
bit-identical to ``k(y, x)``.
"""

from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.linalg import eigh

from .errors import InputError

# Upper bound on the temporary (rows x cols x dim) product block.
_BLOCK_ELEMENTS = 1 << 22


def as_points(x, name="points"):
    """Return ``x`` as a finite float64 matrix of shape (n, d)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise InputError(f"{name} must be a vector or a matrix, got ndim={arr.ndim}")
    if arr.shape[1] == 0:
        raise InputError(f"{name} have zero features")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contain NaN or infinite values")
    return arr


def _reduce_pairs(X, Y, op):
    n, d = X.shape
    m = Y.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    step = max(1, _BLOCK_ELEMENTS // max(1, m * d))
    for start in range(0, n, step):
        block = X[start:start + step, np.newaxis, :]
        out[start:start + step] = np.sum(op(block, Y[np.newaxis, :, :]), axis=-1)
    return out


def pairwise_dot(X, Y):
    """Matrix of inner products, accumulated identically for every pair."""
    return _reduce_pairs(X, Y, np.multiply)


def pairwise_sqdist(X, Y):
    """Matrix of squared Euclidean distances."""
    return _reduce_pairs(X, Y, lambda a, b: np.square(a - b))


@dataclass(frozen=True)
class KernelSpec:
    """Base class of the kernel variants.

    Subclasses implement :meth:`_from_dot` or override :meth:`matrix`.
    """

    name: ClassVar[str] = ""

    def matrix(self, X, Y):
        return self._from_dot(pairwise_dot(X, Y))

    def _from_dot(self, dots):
        raise NotImplementedError

    def params(self):
        return {}

    def describe(self):
        """Canonical text form, parseable by :func:`parse_kernel`."""
        params = self.params()
        if not params:
            return self.name
        body = ",".join(f"{key}={_fmt_param(value)}" for key, value in params.items())
        return f"{self.name}:{body}"

    def __str__(self):
        return self.describe()


@dataclass(frozen=True)
class Linear(KernelSpec):
    """``<x, y> + b``."""

    b: float = 0.0
    name: ClassVar[str] = "linear"

    def _from_dot(self, dots):
        return dots + self.b

    def params(self):
        return {"b": self.b}


@dataclass(frozen=True)
class Rbf(KernelSpec):
    """``exp(-gamma * |x - y|^2)``."""

    gamma: float = 1.0
    name: ClassVar[str] = "rbf"

    def __post_init__(self):
        if not self.gamma > 0 or not np.isfinite(self.gamma):
            raise InputError(f"rbf gamma must be a positive finite number, got {self.gamma}")

    def matrix(self, X, Y):
        return np.exp(-self.gamma * pairwise_sqdist(X, Y))

    def params(self):
        return {"gamma": self.gamma}


@dataclass(frozen=True)
class Tanh(KernelSpec):
    """Hyperbolic tangent kernel ``tanh(k * <x, y> - b)``."""

    k: float = 1.0
    b: float = 0.0
    name: ClassVar[str] = "tanh"

    def _from_dot(self, dots):
        return np.tanh(self.k * dots - self.b)

    def params(self):
        return {"k": self.k, "b": self.b}


@dataclass(frozen=True)
class Polynomial(KernelSpec):
    """``(<x, y> + coef) ** degree``."""

    degree: int = 2
    coef: float = 1.0
    name: ClassVar[str] = "poly"

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise InputError(f"polynomial degree must be an integer >= 1, got {self.degree}")
        object.__setattr__(self, "degree", int(self.degree))

    def _from_dot(self, dots):
        return (dots + self.coef) ** self.degree

    def params(self):
        return {"degree": self.degree, "coef": self.coef}


SQUARE_MODES = ("value", "argument")


@dataclass(frozen=True)
class CombinedSpam(KernelSpec):
    """Squared tangent plus linear term: ``tanh(k * <x, y> - b)^2 + <x, y>``.

    ``square="argument"`` selects the alternative reading
    ``tanh((k * <x, y> - b)^2) + <x, y>``.  Neither reading is positive
    semidefinite in general; use :func:`psd_check` on the data at hand.
    """

    k: float = 1.0
    b: float = 0.0
    square: str = field(default="value")
    name: ClassVar[str] = "combined"

    def __post_init__(self):
        if self.square not in SQUARE_MODES:
            raise InputError(f"combined square must be one of {SQUARE_MODES}, got {self.square!r}")

    def _from_dot(self, dots):
        arg = self.k * dots - self.b
        if self.square == "value":
            return np.square(np.tanh(arg)) + dots
        return np.tanh(np.square(arg)) + dots

    def params(self):
        params = {"k": self.k, "b": self.b}
        if self.square != "value":
            params["square"] = self.square
        return params


KERNELS = {cls.name: cls for cls in (Linear, Rbf, Tanh, Polynomial, CombinedSpam)}
_ALIASES = {"sigmoid": "tanh", "hyperbolic": "tanh", "polynomial": "poly", "ck": "combined",
            "custom": "combined", "gaussian": "rbf"}


def _fmt_param(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def parse_kernel(text):
    """Parse ``name`` or ``name:key=value,...`` into a :class:`KernelSpec`.

    >>> parse_kernel("rbf:gamma=0.5")
    Rbf(gamma=0.5)
    """
    if isinstance(text, KernelSpec):
        return text
    text = str(text).strip()
    name, _, body = text.partition(":")
    name = name.strip().lower()
    name = _ALIASES.get(name, name)
    if name not in KERNELS:
        raise InputError(f"unknown kernel {name!r}; expected one of {sorted(KERNELS)}")
    cls = KERNELS[name]
    kwargs = {}
    for item in filter(None, (part.strip() for part in body.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in cls.__dataclass_fields__:
            raise InputError(f"bad parameter {item!r} for kernel {name!r}")
        value = value.strip()
        if key == "square":
            kwargs[key] = value
        elif key == "degree":
            try:
                kwargs[key] = int(value)
            except ValueError:
                raise InputError(f"kernel degree must be an integer, got {value!r}") from None
        else:
            try:
                kwargs[key] = float(value)
            except ValueError:
                raise InputError(f"kernel parameter {key}={value!r} is not a number") from None
    return cls(**kwargs)


@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray
    spec: KernelSpec

    @property
    def row_count(self):
        return self.entries.shape[0]

    @property
    def col_count(self):
        return self.entries.shape[1]


def eval_kernel(spec, x, y):
    """Evaluate ``spec`` on a single pair of feature vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise InputError("eval_kernel expects two feature vectors")
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    return float(gram(spec, x, y).entries[0, 0])


def gram(spec, rows, cols=None):
    """Gram matrix ``entries[i, j] = k(rows[i], cols[j])``.

    ``cols=None`` means ``cols = rows``.
    """
    rows = as_points(rows, "rows")
    cols = rows if cols is None else as_points(cols, "cols")
    if rows.shape[1] != cols.shape[1]:
        raise InputError(f"dimension mismatch: rows have {rows.shape[1]} features, "
                         f"cols have {cols.shape[1]}")
    entries = spec.matrix(rows, cols)
    if not np.all(np.isfinite(entries)):
        raise InputError(f"kernel {spec} produced non-finite entries")
    return GramMatrix(entries, spec)


@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: float
    is_psd: bool
    tol: float


def psd_check(g, tol=1e-8):
    """Smallest eigenvalue of a symmetric Gram matrix and the verdict
    ``min_eigenvalue >= -tol``.

    Eigenvalues come from LAPACK's symmetric solver (``scipy.linalg.eigh``),
    whose absolute error is on the order of ``n * eps * |G|_2``; choose
    ``tol`` above that for large matrices.
    """
    entries = g.entries if isinstance(g, GramMatrix) else np.asarray(g, dtype=np.float64)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise InputError(f"psd_check needs a square matrix, got shape {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise InputError("matrix contains non-finite entries")
    asym = np.max(np.abs(entries - entries.T)) if entries.size else 0.0
    if asym > 1e-10:
        raise InputError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    eigvals = eigh(entries, eigvals_only=True, subset_by_index=[0, 0])
    lam = float(eigvals[0])
    return PsdReport(lam, lam >= -tol, tol)
