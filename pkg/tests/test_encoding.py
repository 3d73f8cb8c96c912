import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from decoyforge.devices import DeviceConfig, ServiceEntry, build_vocabulary
from decoyforge.encoding import (SHAPE, check_matrix, decode, discretize, encode, encode_many, is_valid,
                                 line_to_matrix, matrix_to_line, random_valid, read_matrices,
                                 to_signed, write_matrices)
from decoyforge.errors import InvalidMatrix


def test_all_closed_ports(vocab):
    m = encode(DeviceConfig("Linux 3.x"), vocab)
    assert (m[0, 2:] == 1).all() and (m[32, 2:] == 1).all()
    assert m[:, 2:].sum() == 60


def test_windows_server_columns(windows_server):
    v = build_vocabulary([windows_server, DeviceConfig("Linux", None, (ServiceEntry(22, "ssh"),))])
    m = encode(windows_server, v)
    open_cols = [j for j in range(2, 32) if m[:32, j].argmax() != 0]
    assert [v.ports[j - 2] for j in open_cols] == [135, 139, 445]
    # column 0: OS string over build, column 1: version token over the absent marker
    assert m[v.os_index["Windows Server 2019"], 0] == 1
    assert m[32 + v.build_index["17763"], 0] == 1
    assert m[v.version_index["2019"], 1] == 1 and m[32, 1] == 1


def test_column_sums(corpus, vocab):
    mats = encode_many(corpus[:200], vocab)
    assert (mats.sum(axis=1) == 2).all()
    assert (mats.reshape(len(mats), -1).sum(axis=1) == 64).all()
    assert all(is_valid(m) for m in mats)


def test_round_trip(corpus, vocab):
    for c in corpus[:300]:
        assert decode(encode(c, vocab), vocab) == c


def test_out_of_vocabulary_symbols(vocab):
    port = vocab.ports[0]
    c = DeviceConfig("Plan 9", "b1", (ServiceEntry(port, "gopher", "cpe:/a:x:y"), ServiceEntry(7, "echo")))
    back = decode(encode(c, vocab), vocab)
    assert back.os_family == "<other>" and back.os_build == "<other>"
    # port 7 is outside the vocabulary and is dropped
    assert back.services == (ServiceEntry(port, "<other>", "<other>"),)


def test_padding_ports_never_open():
    v = build_vocabulary([DeviceConfig("Linux", None, (ServiceEntry(80, "http"),))])
    m = np.zeros(SHAPE, dtype=np.uint8)
    m[2, :] = 1  # every column claims service index 2
    m[32, :] = 1
    assert decode(m, v).ports == (80,)


def test_decode_all_sentinel(vocab):
    m = np.zeros(SHAPE, dtype=np.uint8)
    m[0, :] = 1
    m[32, :] = 1
    c = decode(m, vocab)
    assert c.services == () and c.os_family == "" and c.os_build is None


def test_decode_rejects_invalid(vocab, windows_server):
    m = encode(windows_server, vocab)
    m[5, 4] = 1 - m[5, 4] if m[5, 4] == 0 else 0
    with pytest.raises(InvalidMatrix):
        decode(m, vocab)
    with pytest.raises(InvalidMatrix):
        decode(np.zeros((64, 31)), vocab)
    bad = encode(windows_server, vocab).astype(float)
    bad[bad == 1] = 0.5
    with pytest.raises(InvalidMatrix):
        check_matrix(bad)


@settings(max_examples=200)
@given(arrays(np.uint8, SHAPE, elements=st.integers(0, 1)))
def test_check_rejects_every_non_two_hot(m):
    ok = (m[:32].sum(0) == 1).all() and (m[32:].sum(0) == 1).all()
    assert is_valid(m) == ok
    if not ok:
        with pytest.raises(InvalidMatrix):
            check_matrix(m)


def test_discretize_keeps_valid_input(corpus, vocab):
    m = encode(corpus[0], vocab)
    assert np.array_equal(discretize(m), m)
    assert np.array_equal(discretize(to_signed(m)), m)


def test_discretize_tie_goes_to_first_row():
    out = discretize(np.zeros(SHAPE))
    assert (out[0] == 1).all() and (out[32] == 1).all() and out.sum() == 64


def test_discretize_random_batch(rng):
    x = rng.normal(size=(1000,) + SHAPE)
    out = discretize(x)
    assert out.shape == (1000,) + SHAPE
    assert (out.sum(axis=1) == 2).all()
    assert np.array_equal(discretize(out), out)
    assert np.array_equal(out[17], discretize(x[17]))


@given(arrays(np.float64, SHAPE, elements=st.floats(-1e6, 1e6)))
def test_discretize_valid_and_idempotent(x):
    d = discretize(x)
    assert is_valid(d)
    assert np.array_equal(discretize(d), d)


def test_discretize_rejects_non_finite():
    x = np.zeros(SHAPE)
    x[3, 3] = np.nan
    with pytest.raises(ValueError):
        discretize(x)


def test_random_valid(rng):
    mats = random_valid(50, rng)
    assert all(is_valid(m) for m in mats)


def test_text_format(tmp_path, corpus, vocab):
    mats = encode_many(corpus[:20], vocab)
    line = matrix_to_line(mats[0])
    assert len(line) == 2048 and set(line) <= {"0", "1"}
    # row-major: first 32 characters are row 0
    assert line[:32] == "".join(map(str, mats[0][0]))
    assert np.array_equal(line_to_matrix(line), mats[0])
    write_matrices(mats, tmp_path / "m.txt")
    text = (tmp_path / "m.txt").read_text()
    assert text.count("\n") == 20 and text.endswith("\n")
    assert np.array_equal(read_matrices(tmp_path / "m.txt"), mats)
    with pytest.raises(InvalidMatrix):
        line_to_matrix("01" * 10)
