"""FSRT binary tensor files and JSON result documents.

FSRT layout (all little-endian)::

    offset  size  field
    0       4     magic  b"FSRT"
    4       4     version  u32 = 1
    8       1     kind  u8: 0 token matrix, 1 cls attention (H x N),
                         2 self attention (N x N), 3 query vector (1 x d)
    9       4     rows  u32
    13      4     cols  u32
    17      ...   rows * cols float32, row-major

Values are widened to float64 on read and narrowed to float32 on write.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .focus import AttentionInput

MAGIC = b"FSRT"
VERSION = 1
HEADER = struct.Struct("<4sIBII")
U32_MAX = 2**32 - 1

KIND_TOKENS = 0
KIND_CLS_ATTENTION = 1
KIND_SELF_ATTENTION = 2
KIND_QUERY = 3
KINDS = (KIND_TOKENS, KIND_CLS_ATTENTION, KIND_SELF_ATTENTION, KIND_QUERY)


class TensorFormatError(ValueError):
    code = "format"


class BadMagicError(TensorFormatError):
    code = "bad_magic"


class VersionMismatchError(TensorFormatError):
    code = "version"


class SizeMismatchError(TensorFormatError):
    code = "size"


class NonFiniteError(TensorFormatError):
    code = "non_finite"


class KindError(TensorFormatError):
    code = "kind"


class ShapeError(TensorFormatError):
    code = "shape"


def check_dims(kind: int, rows: int, cols: int) -> None:
    if kind not in KINDS:
        raise KindError(f"unknown tensor kind {kind}")
    if rows < 1 or cols < 1:
        raise ShapeError(f"empty tensor ({rows} x {cols})")
    if rows > U32_MAX or cols > U32_MAX:
        raise ShapeError(f"dimensions {rows} x {cols} do not fit in u32")
    if rows * cols > U32_MAX:
        raise ShapeError(f"element count {rows * cols} overflows u32")
    if kind == KIND_QUERY and rows != 1:
        raise ShapeError(f"query tensors must have one row, got {rows}")
    if kind == KIND_SELF_ATTENTION and rows != cols:
        raise ShapeError(f"self attention must be square, got {rows} x {cols}")


def encode_tensor(array, kind: int) -> bytes:
    arr = np.asarray(array, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ShapeError(f"expected a 1-D or 2-D array, got shape {arr.shape}")
    rows, cols = arr.shape
    check_dims(kind, rows, cols)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("tensor contains non-finite values")
    if np.abs(arr).max() > np.finfo(np.float32).max:
        raise NonFiniteError("tensor values overflow float32")
    payload = np.ascontiguousarray(arr, dtype="<f4")
    return HEADER.pack(MAGIC, VERSION, kind, rows, cols) + payload.tobytes()


def decode_tensor(blob: bytes) -> tuple[int, np.ndarray]:
    """Parse an FSRT byte string into ``(kind, float64 array of shape rows x cols)``."""
    if len(blob) < HEADER.size:
        raise SizeMismatchError(f"file is {len(blob)} bytes, shorter than the {HEADER.size}-byte header")
    magic, version, kind, rows, cols = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise VersionMismatchError(f"unsupported version {version}")
    check_dims(kind, rows, cols)
    expected = rows * cols * 4
    actual = len(blob) - HEADER.size
    if actual != expected:
        raise SizeMismatchError(f"payload is {actual} bytes, expected {expected}")
    data = np.frombuffer(blob, dtype="<f4", offset=HEADER.size).reshape(rows, cols)
    if not np.all(np.isfinite(data)):
        raise NonFiniteError("payload contains non-finite values")
    return kind, data.astype(np.float64)


def read_tensor_raw(path) -> tuple[int, np.ndarray]:
    return decode_tensor(Path(path).read_bytes())


def read_tensor(path):
    """Load an FSRT file as the value its kind describes.

    Returns an N x d float64 array (kind 0), an :class:`AttentionInput`
    (kinds 1 and 2) or a 1-D query vector (kind 3).
    """
    kind, data = read_tensor_raw(path)
    if kind == KIND_TOKENS:
        return data
    if kind == KIND_CLS_ATTENTION:
        return AttentionInput.from_cls_rows(data)
    if kind == KIND_SELF_ATTENTION:
        return AttentionInput.from_self_attention(data)
    return data[0]


def infer_kind(value) -> int:
    if isinstance(value, AttentionInput):
        return KIND_CLS_ATTENTION if value.mode == "cls_attention" else KIND_SELF_ATTENTION
    return KIND_QUERY if np.ndim(value) == 1 else KIND_TOKENS


def write_tensor(value, path, kind: int | None = None) -> None:
    if kind is None:
        kind = infer_kind(value)
    data = value.data if isinstance(value, AttentionInput) else value
    Path(path).write_bytes(encode_tensor(data, kind))


def dumps_document(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_document(doc: dict, path) -> None:
    Path(path).write_text(dumps_document(doc))


def read_document(path) -> dict:
    doc = json.loads(Path(path).read_text())
    missing = {"kept_indices", "origins", "k_f", "k_s", "m", "coverage_radius",
               "retained_priority_mass", "config"} - doc.keys()
    if missing:
        raise TensorFormatError(f"result document lacks keys {sorted(missing)}")
    kept = doc["kept_indices"]
    if len(kept) != len(doc["origins"]):
        raise TensorFormatError("kept_indices and origins differ in length")
    if any(b <= a for a, b in zip(kept, kept[1:])):
        raise TensorFormatError("kept_indices are not strictly ascending")
    return doc

