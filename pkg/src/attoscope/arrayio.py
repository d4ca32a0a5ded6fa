"""Binary array files ("ASF1") and CSV emission helpers.

Layout (all integers little-endian):

    bytes 0..3   magic b"ASF1"
    byte  4      flags: bit 0 set when the payload is complex
    byte  5      rank (number of dimensions)
    bytes 6..7   reserved, zero
    per dimension:
        uint64   size
        16 bytes axis name, utf-8, NUL-padded
        float64  axis minimum
        float64  axis step
    payload      float64 little-endian, C order; complex values stored as
                 interleaved (re, im) pairs

The header fully determines the payload length; reads reject trailing bytes,
so round-trips are bit-exact.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"ASF1"
_FLAG_COMPLEX = 0x01
_AXIS_NAME_BYTES = 16


@dataclass
class Axis:
    name: str
    minimum: float
    step: float

    def values(self, n: int) -> np.ndarray:
        return self.minimum + self.step * np.arange(n)


def write_array(path, data: np.ndarray, axes: list[Axis]) -> None:
    data = np.asarray(data)
    if data.ndim != len(axes):
        raise ValueError(f"rank {data.ndim} does not match {len(axes)} axes")
    is_complex = np.iscomplexobj(data)
    header = bytearray()
    header += MAGIC
    header += struct.pack("<BBH", _FLAG_COMPLEX if is_complex else 0,
                          data.ndim, 0)
    for size, axis in zip(data.shape, axes):
        name = axis.name.encode("utf-8")
        if len(name) > _AXIS_NAME_BYTES:
            raise ValueError(f"axis name too long: {axis.name!r}")
        header += struct.pack("<Q", size)
        header += name.ljust(_AXIS_NAME_BYTES, b"\0")
        header += struct.pack("<dd", axis.minimum, axis.step)
    if is_complex:
        payload = np.ascontiguousarray(data, dtype="<c16").tobytes()
    else:
        payload = np.ascontiguousarray(data, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(header))
        fh.write(payload)


def read_array(path) -> tuple[np.ndarray, list[Axis]]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ValueError(f"{path}: not an ASF1 file")
    flags, rank, _ = struct.unpack_from("<BBH", blob, 4)
    off = 8
    shape, axes = [], []
    for _ in range(rank):
        (size,) = struct.unpack_from("<Q", blob, off)
        off += 8
        name = blob[off:off + _AXIS_NAME_BYTES].rstrip(b"\0").decode("utf-8")
        off += _AXIS_NAME_BYTES
        minimum, step = struct.unpack_from("<dd", blob, off)
        off += 16
        shape.append(int(size))
        axes.append(Axis(name=name, minimum=minimum, step=step))
    count = int(np.prod(shape)) if shape else 1
    is_complex = bool(flags & _FLAG_COMPLEX)
    itemsize = 16 if is_complex else 8
    expected = off + count * itemsize
    if len(blob) != expected:
        raise ValueError(f"{path}: payload length {len(blob) - off} does not "
                         f"match header ({count * itemsize} bytes expected)")
    dtype = "<c16" if is_complex else "<f8"
    data = np.frombuffer(blob[off:], dtype=dtype).reshape(shape).copy()
    return data, axes


def write_csv(path, columns: dict) -> None:
    """Plain CSV with a header row; columns is {name: sequence}. Numbers are
    written with repr (lossless round trip); anything else with str."""
    names = list(columns)
    arrays = [list(columns[n]) for n in names]
    n = len(arrays[0])
    if any(len(a) != n for a in arrays):
        raise ValueError("CSV columns must have equal length")

    def fmt(v):
        if isinstance(v, (int, float, np.floating, np.integer, np.bool_)):
            return repr(float(v))
        return str(v)

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(fmt(a[i]) for a in arrays) + "\n")


def read_csv(path) -> dict:
    """Columns come back as float arrays where every entry parses as float,
    otherwise as lists of strings."""
    with open(path, "r", encoding="utf-8") as fh:
        names = fh.readline().strip().split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    out = {}
    for j, name in enumerate(names):
        col = [r[j] for r in rows]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = col
    return out
