import struct

import numpy as np
import pytest

from lrtfr import io
from lrtfr.errors import FormatError
from lrtfr.model import init_model


def test_tensor_roundtrip_is_bitwise(tmp_path):
    t = np.random.default_rng(0).normal(size=(3, 4, 5))
    path = tmp_path / "t.t3b"
    io.save_tensor(t, path)
    back = io.load_tensor(path)
    assert back.tobytes() == t.tobytes()
    assert back.shape == t.shape


def test_tensor_header_layout():
    t = np.arange(24.0).reshape(2, 3, 4)
    raw = io.tensor_to_bytes(t)
    assert raw[:4] == b"LRT1"
    assert struct.unpack("<3Q", raw[4:28]) == (2, 3, 4)
    assert len(raw) == 28 + 24 * 8
    # element (i, j, k) at offset (i*n2 + j)*n3 + k
    assert struct.unpack_from("<d", raw, 28 + 8 * ((1 * 3 + 2) * 4 + 3))[0] == t[1, 2, 3]


def test_corrupt_inputs():
    raw = io.tensor_to_bytes(np.ones((2, 2, 2)))
    with pytest.raises(FormatError, match="magic"):
        io.tensor_from_bytes(b"XXXX" + raw[4:])
    with pytest.raises(FormatError, match="truncated"):
        io.tensor_from_bytes(raw[:-8])
    with pytest.raises(FormatError, match="trailing"):
        io.tensor_from_bytes(raw + b"\0")
    huge = b"LRT1" + struct.pack("<3Q", 2**40, 2**40, 2)
    with pytest.raises(FormatError):
        io.tensor_from_bytes(huge)
    with pytest.raises(FormatError):
        io.tensor_from_bytes(b"LRT1" + struct.pack("<3Q", 0, 1, 1))


def test_mask_values_checked(tmp_path):
    io.save_mask(np.ones((2, 2, 2)), tmp_path / "m.t3b")
    assert io.load_mask(tmp_path / "m.t3b").all()
    with pytest.raises(FormatError):
        io.save_mask(np.full((2, 2, 2), 0.5), tmp_path / "bad.t3b")
    io.save_tensor(np.full((2, 2, 2), 0.5), tmp_path / "half.t3b")
    with pytest.raises(FormatError):
        io.load_mask(tmp_path / "half.t3b")


def test_model_roundtrip(tmp_path):
    m = init_model((2, 3, 2), ((0, 4), (-1, 1), (2, 5)), hidden=6, depth=(2, 3, 4), omega0=(1.5, 2, 3), seed=1)
    io.save_model(m, tmp_path / "m.lrf")
    back = io.load_model(tmp_path / "m.lrf")
    assert back.domain == m.domain
    assert all(np.array_equal(a, b) for a, b in zip(m.parameters(), back.parameters()))
    assert [x.omega0 for x in back.mlps] == [1.5, 2.0, 3.0]
    assert np.array_equal(back.superresolve((3, 2, 4)), m.superresolve((3, 2, 4)))


def test_model_layout_and_corruption():
    m = init_model((1, 1, 1), (2, 2, 2), hidden=2, depth=2, seed=0)
    raw = io.model_to_bytes(m)
    assert raw[:4] == b"LRF1"
    assert raw[4 + 24 + 8:4 + 24 + 8 + 4] == b"LRM1"
    with pytest.raises(FormatError):
        io.model_from_bytes(raw[:-3])
    # depth record disagreeing with the stored matrices
    bad = raw[:-24] + struct.pack("<3Q", 3, 2, 2)
    with pytest.raises(FormatError, match="depth"):
        io.model_from_bytes(bad)


def test_points_text(tmp_path):
    pts = np.random.default_rng(2).normal(size=(5, 3))
    path = tmp_path / "p.txt"
    io.save_points(pts, path)
    text = path.read_bytes()
    assert b"\r" not in text and text.endswith(b"\n")
    assert all(len(line.split(b" ")) == 3 for line in text.splitlines())
    assert np.array_equal(io.load_points(path), pts)
    path.write_text("1 2\n")
    with pytest.raises(FormatError):
        io.load_points(path)
    path.write_text("1 2 x\n")
    with pytest.raises(FormatError):
        io.load_points(path)
    path.write_text("")
    with pytest.raises(FormatError):
        io.load_points(path)


def test_hpo_axes(tmp_path):
    path = tmp_path / "axes.txt"
    io.save_hpo_axes([0.1, 1.0, 10.0], [2.0, 4.0], path)
    a, b = io.load_hpo_axes(path)
    assert a.tolist() == [0.1, 1.0, 10.0] and b.tolist() == [2.0, 4.0]
    path.write_text("1,2\n")
    with pytest.raises(FormatError):
        io.load_hpo_axes(path)


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "out.t3b"
    io.save_tensor(np.zeros((1, 1, 1)), target)

    with pytest.raises(TypeError):
        io.atomic_write(target, 12345)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out.t3b"]
    assert io.load_tensor(target).shape == (1, 1, 1)
