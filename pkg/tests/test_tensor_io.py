import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsrprune.focus import AttentionInput
from fsrprune.tensor_io import (
    HEADER,
    BadMagicError,
    KindError,
    NonFiniteError,
    ShapeError,
    SizeMismatchError,
    TensorFormatError,
    VersionMismatchError,
    check_dims,
    decode_tensor,
    encode_tensor,
    read_document,
    read_tensor,
    read_tensor_raw,
    write_document,
    write_tensor,
)


def test_header_layout_is_seventeen_bytes():
    blob = encode_tensor(np.arange(6.0).reshape(2, 3), 0)
    assert HEADER.size == 17
    assert blob[:4] == b"FSRT"
    assert struct.unpack("<I", blob[4:8]) == (1,)
    assert blob[8] == 0
    assert struct.unpack("<II", blob[9:17]) == (2, 3)
    assert np.frombuffer(blob[17:], "<f4").tolist() == [0, 1, 2, 3, 4, 5]


def test_token_matrix_round_trip(tmp_path):
    path = tmp_path / "t.fsrt"
    data = np.arange(6.0).reshape(2, 3)
    write_tensor(data, path)
    out = read_tensor(path)
    assert out.shape == (2, 3) and out.dtype == np.float64
    np.testing.assert_array_equal(out, data)


def test_roles_by_kind(tmp_path):
    write_tensor(AttentionInput.from_cls_rows(np.full((2, 4), 0.25)), tmp_path / "a")
    write_tensor(AttentionInput.from_self_attention(np.eye(3)), tmp_path / "s")
    write_tensor(np.array([1.0, 2.0]), tmp_path / "q")
    a = read_tensor(tmp_path / "a")
    assert a.mode == "cls_attention" and a.data.shape == (2, 4)
    assert read_tensor(tmp_path / "s").mode == "self_attention_aggregate"
    q = read_tensor(tmp_path / "q")
    assert q.shape == (2,)
    assert read_tensor_raw(tmp_path / "q")[0] == 3


def test_truncated_payload():
    blob = encode_tensor(np.ones((2, 3)), 0)
    with pytest.raises(SizeMismatchError):
        decode_tensor(blob[:-1])
    with pytest.raises(SizeMismatchError):
        decode_tensor(blob + b"\0")
    with pytest.raises(SizeMismatchError):
        decode_tensor(blob[:10])


def test_bad_magic_and_version():
    blob = bytearray(encode_tensor(np.ones((1, 1)), 0))
    with pytest.raises(BadMagicError):
        decode_tensor(b"XXXX" + bytes(blob[4:]))
    blob[4] = 2
    with pytest.raises(VersionMismatchError):
        decode_tensor(bytes(blob))


def test_non_finite_payload():
    blob = HEADER.pack(b"FSRT", 1, 0, 1, 2) + np.array([1.0, np.nan], "<f4").tobytes()
    with pytest.raises(NonFiniteError):
        decode_tensor(blob)
    with pytest.raises(NonFiniteError):
        encode_tensor([[np.inf]], 0)
    with pytest.raises(NonFiniteError):
        encode_tensor([[1e39]], 0)


def test_error_codes_are_distinct():
    codes = {cls.code for cls in (BadMagicError, VersionMismatchError, SizeMismatchError,
                                  NonFiniteError, KindError, ShapeError)}
    assert len(codes) == 6


@pytest.mark.parametrize(
    "kind, rows, cols",
    [(0, 0, 3), (0, 3, 0), (7, 1, 1), (3, 2, 4), (2, 2, 3), (0, 2**32, 1), (0, 2**16, 2**16)],
)
def test_invalid_dimensions(kind, rows, cols):
    with pytest.raises(TensorFormatError):
        check_dims(kind, rows, cols)


def test_empty_matrix_rejected():
    with pytest.raises(ShapeError):
        encode_tensor(np.empty((0, 3)), 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0, 1, 2, 3]))
def test_write_read_write_is_byte_identical(tmp_path_factory, seed, kind):
    rng = np.random.default_rng(seed)
    rows = 1 if kind == 3 else 7
    cols = 7 if kind == 2 else 5
    data = np.abs(rng.standard_normal((rows, cols))) * 10.0 ** rng.integers(-30, 30)
    blob = encode_tensor(data, kind)
    k, values = decode_tensor(blob)
    assert k == kind
    assert encode_tensor(values, kind) == blob
    path = tmp_path_factory.mktemp("rt") / "x.fsrt"
    path.write_bytes(blob)
    write_tensor(read_tensor(path), path)
    assert path.read_bytes() == blob


def test_document_validation(tmp_path):
    doc = {"kept_indices": [0, 2], "origins": ["focus", "scan"], "k_f": 1, "k_s": 1, "m": 0,
           "coverage_radius": 0.1, "retained_priority_mass": 0.5, "config": {}}
    write_document(doc, tmp_path / "ok.json")
    assert read_document(tmp_path / "ok.json") == doc
    write_document({**doc, "kept_indices": [2, 0]}, tmp_path / "bad.json")
    with pytest.raises(TensorFormatError):
        read_document(tmp_path / "bad.json")
    write_document({k: v for k, v in doc.items() if k != "m"}, tmp_path / "short.json")
    with pytest.raises(TensorFormatError):
        read_document(tmp_path / "short.json")
