"""Binary model files and CSV outputs.

Model file layout (all little-endian)::

    magic      8 bytes   b"WRLDAMDL"
    version    uint32
    K          uint32
    V          uint32
    alpha      K  x float64
    beta       K*V x float64, row-major
    vocab      V  x (uint32 byte length, UTF-8 bytes)
"""
from __future__ import annotations

import struct

import numpy as np

from .corpus import Vocabulary
from .errors import DataError
from .lda import ModelParams

MAGIC = b"WRLDAMDL"
VERSION = 1
_HEADER = struct.Struct("<8sIII")


def save_model(path, params: ModelParams, vocab: Vocabulary):
    K, V = params.beta.shape
    if len(vocab) != V:
        raise DataError("vocabulary size does not match beta")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, K, V))
        fh.write(np.ascontiguousarray(params.alpha, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(params.beta, dtype="<f8").tobytes())
        for tok in vocab.tokens:
            raw = tok.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)


def load_model(path) -> tuple[ModelParams, Vocabulary]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise DataError(f"{path}: truncated model file")
    magic, version, K, V = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DataError(f"{path}: not a wrlda model file")
    if version != VERSION:
        raise DataError(f"{path}: unsupported model version {version}")
    off = _HEADER.size
    need = off + 8 * (K + K * V)
    if len(data) < need:
        raise DataError(f"{path}: truncated model file")
    alpha = np.frombuffer(data, dtype="<f8", count=K, offset=off).astype(np.float64)
    off += 8 * K
    beta = np.frombuffer(data, dtype="<f8", count=K * V, offset=off).astype(np.float64).reshape(K, V)
    off += 8 * K * V
    tokens = []
    try:
        for _ in range(V):
            (n,) = struct.unpack_from("<I", data, off)
            off += 4
            if off + n > len(data):
                raise DataError(f"{path}: truncated vocabulary")
            tokens.append(data[off:off + n].decode("utf-8"))
            off += n
    except (struct.error, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: corrupt vocabulary ({exc})") from None
    if off != len(data):
        raise DataError(f"{path}: trailing bytes after vocabulary")
    return ModelParams(alpha, beta), Vocabulary(tokens)


def write_matrix_csv(path, matrix, header=None):
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in matrix:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_matrix_csv(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if lines and not _is_number(lines[0].split(",")[0]):
        lines = lines[1:]
    return np.array([[float(x) for x in ln.split(",")] for ln in lines])


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def write_trace_csv(path, trace):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iter,L,R,O,delta\n")
        for r in trace:
            fh.write(f"{r.iteration},{r.L!r},{r.R!r},{r.O!r},{r.delta!r}\n")
