import struct

import numpy as np
import pytest

from subgeo.errors import FormatError, InputError
from subgeo.io import read_binary, read_points, read_text, write_binary, write_points, write_text


def test_text_roundtrip_exact(tmp_path, rng):
    X = rng.normal(size=(40, 3)) * 10.0 ** rng.integers(-300, 300, size=(40, 3))
    path = tmp_path / "p.txt"
    write_text(path, X)
    assert np.array_equal(read_text(path).coords, X)
    assert path.read_text().splitlines()[0] == "GPTS 1 40 3"


def test_binary_roundtrip_bitexact(tmp_path, rng):
    X = rng.normal(size=(25, 4))
    X[0, 0] = -0.0
    path = tmp_path / "p.bin"
    write_binary(path, X)
    Y = read_binary(path).coords
    assert Y.tobytes() == X.tobytes()
    assert path.stat().st_size == 17 + 8 * 100


def test_hand_built_files(tmp_path):
    path = tmp_path / "two.txt"
    path.write_text("GPTS 1 2 2\n0 0\n3 4\n")
    assert np.array_equal(read_points(path).coords, [[0.0, 0.0], [3.0, 4.0]])
    b = tmp_path / "two.bin"
    b.write_bytes(struct.pack("<4sBQI", b"GPTS", 1, 2, 2) + struct.pack("<4d", 0, 0, 3, 4))
    assert np.array_equal(read_points(b).coords, [[0.0, 0.0], [3.0, 4.0]])


def test_write_points_dispatch(tmp_path):
    X = np.eye(3)
    write_points(tmp_path / "a.bin", X)
    write_points(tmp_path / "a.txt", X)
    assert (tmp_path / "a.bin").read_bytes()[:4] == b"GPTS"
    assert np.array_equal(read_points(tmp_path / "a.bin").coords, read_points(tmp_path / "a.txt").coords)
    with pytest.raises(InputError):
        write_points(tmp_path / "a.x", X, "csv")
    with pytest.raises(InputError):
        write_points(tmp_path / "a.txt", [[np.nan, 0.0]])


def test_truncated_binary_reports_offset(tmp_path):
    path = tmp_path / "t.bin"
    write_binary(path, np.ones((3, 2)))
    raw = path.read_bytes()
    path.write_bytes(raw[:-5])
    with pytest.raises(FormatError, match=f"byte {len(raw) - 5}"):
        read_binary(path)
    path.write_bytes(raw + b"\0")
    with pytest.raises(FormatError, match="trailing"):
        read_binary(path)
    path.write_bytes(b"XPTS" + raw[4:])
    with pytest.raises(FormatError, match="magic"):
        read_binary(path)
    path.write_bytes(raw[:4] + b"\x02" + raw[5:])
    with pytest.raises(FormatError, match="version"):
        read_binary(path)
    bad = bytearray(raw)
    bad[17 + 8:17 + 16] = struct.pack("<d", np.inf)
    path.write_bytes(bytes(bad))
    with pytest.raises(FormatError, match="byte 25"):
        read_binary(path)


@pytest.mark.parametrize(
    "body,line",
    [
        ("GPTS 1 2 2\n0 0\n", "line"),
        ("GPTS 1 1 2\n0 0\n1 1\n", "trailing"),
        ("GPTS 1 1 2\n0 nan\n", "non-finite"),
        ("GPTS 1 1 2\n0\n", "expected 2"),
        ("GPTZ 1 1 2\n0 0\n", "magic"),
        ("GPTS 2 1 2\n0 0\n", "version"),
        ("GPTS 1 1 2\n0 x\n", "not a number"),
    ],
)
def test_text_errors(tmp_path, body, line):
    path = tmp_path / "bad.txt"
    path.write_text(body)
    with pytest.raises(FormatError, match=line):
        read_text(path)


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        read_points(tmp_path / "nope.txt")
