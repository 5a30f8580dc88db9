import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from warpends.io import MAGIC, FormatError, read_csv, read_ends, write_csv, write_ends


@settings(max_examples=30, deadline=None)
@given(a=arrays(np.float64, st.lists(st.integers(1, 5), min_size=1, max_size=3).map(tuple),
                elements=st.floats(allow_nan=False, width=64)))
def test_ends_round_trip_is_exact(tmp_path_factory, a):
    path = tmp_path_factory.mktemp("ends") / "u.ends"
    write_ends(path, a)
    b = read_ends(path)
    assert b.shape == a.shape and np.array_equal(a, b)


def test_ends_header_layout(tmp_path):
    path = tmp_path / "u.ends"
    write_ends(path, np.arange(6.0).reshape(2, 3))
    data = path.read_bytes()
    assert data[:4] == MAGIC
    assert struct.unpack_from("<IIII", data, 4) == (1, 2, 2, 3)
    assert len(data) == 20 + 6 * 8
    assert struct.unpack_from("<d", data, 20 + 8 * 4)[0] == 4.0  # C order


@pytest.mark.parametrize("mutate, match", [
    (lambda d: b"ENDZ" + d[4:], "magic"),
    (lambda d: d[:4] + struct.pack("<I", 2) + d[8:], "version"),
    (lambda d: d[:-8], "payload"),
    (lambda d: d[:10], "truncated"),
])
def test_malformed_ends_files(tmp_path, mutate, match):
    path = tmp_path / "u.ends"
    write_ends(path, np.ones((2, 2)))
    path.write_bytes(mutate(path.read_bytes()))
    with pytest.raises(FormatError, match=match):
        read_ends(path)


def test_csv_round_trip(tmp_path):
    th = np.linspace(0, 2 * np.pi, 5, endpoint=False)
    r = np.array([1.0, 1.5, 2.0])
    u = np.cos(th)[:, None] * r[None, :] / 3
    path = tmp_path / "u.csv"
    write_csv(path, ["theta"], [th], r, u)
    header, table = read_csv(path)
    assert header == ["theta", "r", "u"]
    assert table.shape == (15, 3)
    assert np.array_equal(table[:, 2], u.ravel())
    assert np.array_equal(table[:3, 1], r)


def test_csv_shape_mismatch(tmp_path):
    with pytest.raises(ValueError, match="shape"):
        write_csv(tmp_path / "u.csv", ["theta"], [np.zeros(4)], np.zeros(3), np.zeros((3, 4)))
