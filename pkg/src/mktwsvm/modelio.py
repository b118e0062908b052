"""Plain-text model files.

Twin SVM layout::

    TWSVM-MODEL v1
    mode: kernel
    kernel_pos: combined:k=1.0,b=0.0
    kernel_neg: linear:b=0.0
    dim: 20
    reference_rows: 450
    epsilon_reg: 9.9999999999999995e-07
    scaler_means: <dim numbers>
    scaler_stds: <dim numbers>
    scaler_constant: <dim 0/1 flags>
    [u_plus]
    <numbers>
    [b_plus]
    <number>
    [norm_plus]
    <number>
    [u_minus]
    ...
    [b_minus]
    ...
    [norm_minus]
    ...
    [reference]
    <one row of dim numbers per line>

``u_*`` have ``dim`` entries in linear mode and ``reference_rows`` entries
in kernel mode.  The SVM layout (``SVM-MODEL v1``) has keys ``kernel``,
``dim``, ``support_count``, ``C``, ``bias`` and the scaler keys, then
sections ``[alphas]``, ``[labels]`` (+1/-1) and ``[support]``.  Numbers are
written with 17 significant digits so that they read back bit-identical.
Every file ends with a newline; a file without one is rejected as truncated.
"""

import re
from pathlib import Path

import numpy as np

from .data import Scaler
from .errors import FormatError, InputError, VersionError
from .kernels import parse_kernel
from .svm import SvmModel
from .twsvm import TwsvmModel

FORMAT_VERSION = 1
_HEADER = re.compile(r"^(TWSVM|SVM)-MODEL v(\d+)$")


def _num(x):
    return f"{float(x):.17g}"


def _vec(v):
    return " ".join(_num(x) for x in np.ravel(v))


def _scaler_lines(sc):
    return [
        f"scaler_means: {_vec(sc.means)}",
        f"scaler_stds: {_vec(sc.stds)}",
        f"scaler_constant: {' '.join('1' if c else '0' for c in sc.constant)}",
    ]


def dumps(m):
    if isinstance(m, TwsvmModel):
        lines = [
            f"TWSVM-MODEL v{FORMAT_VERSION}",
            f"mode: {m.mode}",
            f"kernel_pos: {m.kernel_pos.describe()}",
            f"kernel_neg: {m.kernel_neg.describe()}",
            f"dim: {m.dim}",
            f"reference_rows: {m.reference_points.shape[0]}",
            f"epsilon_reg: {_num(m.epsilon_reg)}",
            *_scaler_lines(m.scaler),
        ]
        for name in ("u_plus", "b_plus", "norm_plus", "u_minus", "b_minus", "norm_minus"):
            lines += [f"[{name}]", _vec(getattr(m, name))]
        lines.append("[reference]")
        lines += [_vec(row) for row in m.reference_points]
    elif isinstance(m, SvmModel):
        lines = [
            f"SVM-MODEL v{FORMAT_VERSION}",
            f"kernel: {m.kernel.describe()}",
            f"dim: {m.dim}",
            f"support_count: {m.alphas.shape[0]}",
            f"C: {_num(m.C)}",
            f"bias: {_num(m.bias)}",
            *_scaler_lines(m.scaler),
            "[alphas]", _vec(m.alphas),
            "[labels]", " ".join("1" if v > 0 else "-1" for v in m.support_labels),
            "[support]",
        ]
        lines += [_vec(row) for row in m.support_points]
    else:
        raise InputError(f"cannot serialize {type(m).__name__}")
    return "\n".join(lines) + "\n"


def save_model(m, path):
    Path(path).write_text(dumps(m), encoding="utf-8")


class _Reader:
    def __init__(self, text, source):
        self.source = source
        self.lines = text.splitlines()
        self.complete = text.endswith("\n")
        self.keys = {}
        self.sections = {}

    def fail(self, message, line=None, field=None):
        raise FormatError(f"{self.source}: {message}", line=line, field=field)

    def parse(self, expected_kind=None):
        if not self.lines:
            self.fail("empty model file", line=1)
        match = _HEADER.match(self.lines[0].strip())
        if not match:
            self.fail(f"bad header {self.lines[0][:40]!r}", line=1)
        kind, version = match.group(1), int(match.group(2))
        if version != FORMAT_VERSION:
            raise VersionError(f"{self.source}: model format version {version} is not "
                               f"supported (this build reads version {FORMAT_VERSION})", line=1)
        if not self.complete:
            # writers always end the file with a newline, so a missing one
            # means the last line may have been cut mid-number
            self.fail("file does not end with a newline (truncated?)", line=len(self.lines))
        current = None
        for lineno, raw in enumerate(self.lines[1:], start=2):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1]
                if current in self.sections:
                    self.fail(f"duplicate section [{current}]", line=lineno)
                self.sections[current] = []
            elif current is not None:
                self.sections[current].append((lineno, line))
            else:
                key, sep, value = line.partition(":")
                if not sep:
                    self.fail(f"expected 'key: value', got {line[:40]!r}", line=lineno)
                self.keys[key.strip()] = (lineno, value.strip())
        return kind

    def key(self, name):
        if name not in self.keys:
            self.fail(f"missing key {name!r}", field=name)
        return self.keys[name]

    def number(self, name, cast=float):
        lineno, value = self.key(name)
        try:
            return cast(value)
        except ValueError:
            self.fail(f"{name} is not a number: {value!r}", line=lineno, field=name)

    def numbers(self, lineno, text, name, count=None, cast=float):
        try:
            values = np.array([cast(tok) for tok in text.split()], dtype=np.float64)
        except ValueError:
            self.fail(f"non-numeric entry in {name}", line=lineno, field=name)
        if count is not None and values.shape[0] != count:
            self.fail(f"{name} has {values.shape[0]} entries, expected {count}",
                      line=lineno, field=name)
        return values

    def vector_key(self, name, count):
        lineno, value = self.key(name)
        return self.numbers(lineno, value, name, count)

    def section(self, name, count, rows=None):
        """A section holding ``count`` numbers (one line) or ``rows`` lines of
        ``count`` numbers each."""
        if name not in self.sections:
            self.fail(f"missing section [{name}] (truncated file?)", field=name)
        body = self.sections[name]
        if rows is None:
            if count == 0 and not body:
                return np.empty(0)
            if len(body) != 1:
                self.fail(f"section [{name}] must hold exactly one line",
                          line=body[0][0] if body else None, field=name)
            return self.numbers(body[0][0], body[0][1], name, count)
        if len(body) != rows:
            self.fail(f"section [{name}] has {len(body)} rows, expected {rows}",
                      line=body[-1][0] if body else None, field=name)
        if rows == 0:
            return np.empty((0, count))
        return np.vstack([self.numbers(ln, text, name, count) for ln, text in body])

    def kernel(self, name):
        lineno, value = self.key(name)
        try:
            return parse_kernel(value)
        except InputError as exc:
            self.fail(str(exc), line=lineno, field=name)

    def scaler(self, dim):
        means = self.vector_key("scaler_means", dim)
        stds = self.vector_key("scaler_stds", dim)
        constant = self.vector_key("scaler_constant", dim)
        try:
            return Scaler(means, stds, constant.astype(bool))
        except InputError as exc:
            self.fail(str(exc), field="scaler_stds")


def loads(text, source="<string>"):
    r = _Reader(text, source)
    kind = r.parse()
    dim = r.number("dim", int)
    if dim < 1:
        r.fail("dim must be positive", field="dim")
    scaler = r.scaler(dim)
    if kind == "TWSVM":
        mode = r.key("mode")[1]
        if mode not in ("linear", "kernel"):
            r.fail(f"unknown mode {mode!r}", line=r.key("mode")[0], field="mode")
        nref = r.number("reference_rows", int)
        width = dim if mode == "linear" else nref
        return TwsvmModel(
            mode=mode,
            u_plus=r.section("u_plus", width),
            b_plus=float(r.section("b_plus", 1)[0]),
            norm_plus=float(r.section("norm_plus", 1)[0]),
            u_minus=r.section("u_minus", width),
            b_minus=float(r.section("b_minus", 1)[0]),
            norm_minus=float(r.section("norm_minus", 1)[0]),
            reference_points=r.section("reference", dim, rows=nref),
            kernel_pos=r.kernel("kernel_pos"),
            kernel_neg=r.kernel("kernel_neg"),
            scaler=scaler,
            epsilon_reg=r.number("epsilon_reg"),
        )
    count = r.number("support_count", int)
    labels = r.section("labels", count)
    if not np.all(np.abs(labels) == 1):
        r.fail("labels must be +1 or -1", field="labels")
    return SvmModel(
        alphas=r.section("alphas", count),
        bias=r.number("bias"),
        support_points=r.section("support", dim, rows=count),
        support_labels=labels,
        kernel=r.kernel("kernel"),
        scaler=scaler,
        C=r.number("C"),
    )


def load_model(path):
    """Read a twin-SVM or SVM model file, whichever the header names."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: not a UTF-8 text file") from None
    return loads(text, str(path))
