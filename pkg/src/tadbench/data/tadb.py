"""The "TADB" binary embedding-set format.

Layout (all integers little-endian):

    offset 0   magic  b"TADB"
    offset 4   u32    format version, currently 1
    offset 8   u32    n, number of rows
    offset 12  u32    d, embedding dimension (must be > 0)
    offset 16  u8     label flag: 1 if a label block follows the matrix
    offset 17  f32[n*d]  row-major embedding matrix
    then       u8[n]  labels (only when the flag is 1), each 0 or 1

Payloads round-trip bit-exactly. The format carries no names; the loader
uses the file stem for both ``name`` and ``embedding_source``.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from ..errors import EmbeddingFormatError
from .types import LabeledEmbeddingSet

MAGIC = b"TADB"
VERSION = 1
_HEADER = struct.Struct("<4sIIIB")  # magic, version, n, d, label flag

_OFF_MAGIC = 0
_OFF_VERSION = 4
_OFF_N = 8
_OFF_D = 12
_OFF_FLAG = 16
_OFF_PAYLOAD = 17


def save_embedding_file(path: str | os.PathLike, eset: LabeledEmbeddingSet) -> None:
    """Write ``eset`` to ``path`` in TADB format."""
    flag = 1 if eset.labels is not None else 0
    blob = _HEADER.pack(MAGIC, VERSION, eset.n, eset.dim, flag)
    blob += eset.matrix.astype("<f4", copy=False).tobytes()
    if flag:
        blob += eset.labels.astype(np.uint8, copy=False).tobytes()
    Path(path).write_bytes(blob)


def load_embedding_file(path: str | os.PathLike) -> LabeledEmbeddingSet:
    """Read a TADB file back into a LabeledEmbeddingSet.

    Raises:
        EmbeddingFormatError: on bad magic, version, truncation, trailing
            bytes, non-finite values, or non-binary labels; the message and
            the exception's ``offset`` name the offending byte position.
    """
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise EmbeddingFormatError(
            f"truncated header: {len(data)} bytes, need {_HEADER.size}",
            offset=len(data),
        )
    magic, version, n, d, flag = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise EmbeddingFormatError(f"bad magic {magic!r}", offset=_OFF_MAGIC)
    if version != VERSION:
        raise EmbeddingFormatError(
            f"unsupported version {version}", offset=_OFF_VERSION
        )
    if d == 0:
        raise EmbeddingFormatError("dimension d must be > 0", offset=_OFF_D)
    if flag not in (0, 1):
        raise EmbeddingFormatError(f"bad label flag {flag}", offset=_OFF_FLAG)

    matrix_bytes = 4 * n * d
    expected = _OFF_PAYLOAD + matrix_bytes + (n if flag else 0)
    if len(data) < expected:
        raise EmbeddingFormatError(
            f"truncated payload: {len(data)} bytes, need {expected}",
            offset=len(data),
        )
    if len(data) > expected:
        raise EmbeddingFormatError(
            f"{len(data) - expected} trailing bytes", offset=expected
        )

    matrix = np.frombuffer(data, dtype="<f4", count=n * d, offset=_OFF_PAYLOAD)
    finite = np.isfinite(matrix)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise EmbeddingFormatError(
            "non-finite value in matrix", offset=_OFF_PAYLOAD + 4 * bad
        )
    matrix = matrix.reshape(n, d)

    labels = None
    if flag:
        labels_off = _OFF_PAYLOAD + matrix_bytes
        labels = np.frombuffer(data, dtype=np.uint8, count=n, offset=labels_off)
        bad_labels = np.flatnonzero(labels > 1)
        if bad_labels.size:
            raise EmbeddingFormatError(
                f"label byte {int(labels[bad_labels[0]])} is not 0/1",
                offset=labels_off + int(bad_labels[0]),
            )

    stem = Path(path).stem
    return LabeledEmbeddingSet(
        name=stem, embedding_source=stem, matrix=matrix, labels=labels
    )
