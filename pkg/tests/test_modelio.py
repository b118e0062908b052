import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mktwsvm.data import Scaler, synth_blobs, synth_circles
from mktwsvm.errors import FormatError, VersionError
from mktwsvm.kernels import CombinedSpam, Linear, Rbf, Tanh
from mktwsvm.modelio import dumps, load_model, loads, save_model
from mktwsvm.svm import SvmConfig, SvmModel, predict as svm_predict, train_svm
from mktwsvm.twsvm import TwsvmConfig, TwsvmModel, distances, train_linear, train_multikernel

finite = st.floats(-1e300, 1e300, allow_nan=False, allow_infinity=False)
kernels = st.sampled_from([Linear(), Linear(0.5), Rbf(0.3), Tanh(0.1, -1.0), CombinedSpam(1.5, 0.2)])


def _assert_same(a, b):
    assert type(a) is type(b)
    for name, value in vars(a).items():
        if name == "diagnostics":
            continue
        other = getattr(b, name)
        if isinstance(value, np.ndarray):
            assert value.dtype == other.dtype and value.shape == other.shape
            assert value.tobytes() == other.tobytes(), name
        elif isinstance(value, Scaler):
            for part in ("means", "stds", "constant"):
                assert getattr(value, part).tobytes() == getattr(other, part).tobytes()
        else:
            assert value == other, name


@st.composite
def scalers(draw, dim):
    means = np.array(draw(st.lists(finite, min_size=dim, max_size=dim)))
    stds = np.array(draw(st.lists(st.floats(1e-300, 1e300), min_size=dim, max_size=dim)))
    constant = np.array(draw(st.lists(st.booleans(), min_size=dim, max_size=dim)))
    return Scaler(means, np.where(constant, 1.0, stds), constant)


@st.composite
def twsvm_models(draw):
    dim = draw(st.integers(1, 4))
    mode = draw(st.sampled_from(["linear", "kernel"]))
    rows = draw(st.integers(1, 5))
    width = dim if mode == "linear" else rows
    vec = lambda k: np.array(draw(st.lists(finite, min_size=k, max_size=k)))
    return TwsvmModel(mode, vec(width), draw(finite), abs(draw(finite)), vec(width), draw(finite),
                      abs(draw(finite)), vec(rows * dim).reshape(rows, dim), draw(kernels),
                      draw(kernels), draw(scalers(dim)), draw(st.floats(1e-12, 1.0)))


@st.composite
def svm_models(draw):
    dim = draw(st.integers(1, 4))
    count = draw(st.integers(0, 5))
    vec = lambda k: np.array(draw(st.lists(finite, min_size=k, max_size=k)), dtype=np.float64)
    labels = np.array(draw(st.lists(st.sampled_from([1.0, -1.0]), min_size=count, max_size=count)),
                      dtype=np.float64)
    return SvmModel(vec(count), draw(finite), vec(count * dim).reshape(count, dim), labels,
                    draw(kernels), draw(scalers(dim)), draw(st.floats(1e-6, 1e6)))


@settings(max_examples=100, deadline=None)
@given(st.one_of(twsvm_models(), svm_models()))
def test_round_trip_bit_identical(model):
    back = loads(dumps(model))
    _assert_same(model, back)
    assert dumps(back) == dumps(model)


def test_trained_models_round_trip(tmp_path):
    ds = synth_circles(20, seed=4)
    probes = np.random.default_rng(1).uniform(-3, 3, (30, 2))
    for model in (train_linear(ds), train_multikernel(ds, TwsvmConfig(kernel_neg=Rbf(1.0)))):
        path = tmp_path / "m.txt"
        save_model(model, path)
        back = load_model(path)
        for a, b in zip(distances(model, probes), distances(back, probes)):
            assert np.array_equal(a, b)
    svm = train_svm(synth_blobs(20, 2, 6.0, seed=2), SvmConfig(kernel=Rbf(0.5)))
    save_model(svm, tmp_path / "s.txt")
    back = load_model(tmp_path / "s.txt")
    assert np.array_equal(svm_predict(svm, probes)[1], svm_predict(back, probes)[1])


@pytest.fixture(scope="module")
def model_text():
    return dumps(train_multikernel(synth_circles(10, seed=1)))


def test_header_lines(model_text):
    lines = model_text.splitlines()
    assert lines[0] == "TWSVM-MODEL v1"
    assert lines[1] == "mode: kernel"
    assert lines[2] == "kernel_pos: combined:k=1.0,b=0.0"
    assert lines[3] == "kernel_neg: linear:b=0.0"


@pytest.mark.parametrize("keep", [0.3, 0.6, 0.9])
def test_truncated_file(model_text, keep):
    lines = model_text.splitlines()
    cut = "\n".join(lines[:int(len(lines) * keep)]) + "\n"
    with pytest.raises(FormatError):
        loads(cut)


def test_truncated_mid_line(model_text):
    with pytest.raises(FormatError):
        loads(model_text[:-5])


def test_future_version(model_text):
    with pytest.raises(VersionError) as info:
        loads(model_text.replace("TWSVM-MODEL v1", "TWSVM-MODEL v2", 1))
    assert "version 2" in str(info.value) and "version 1" in str(info.value)


@pytest.mark.parametrize("text", ["", "TWSVM MODEL v1\n", "hello\nmode: linear\n"])
def test_bad_header(text):
    with pytest.raises(FormatError):
        loads(text)


def test_bad_value_located(model_text):
    text = model_text.replace("dim: 2", "dim: two")
    with pytest.raises(FormatError) as info:
        loads(text)
    assert info.value.field == "dim" and info.value.line == 5


def test_non_utf8(tmp_path):
    path = tmp_path / "m.bin"
    path.write_bytes(b"\xff\xfe\x00binary")
    with pytest.raises(FormatError):
        load_model(path)
