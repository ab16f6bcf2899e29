"""Reading and writing signals.

Two formats:

* CSV: a header line ``N=<n>,dims=<1|2>`` followed by one ``re,im`` pair per
  line, row-major for 2-D signals.
* Binary: 16-byte header (magic ``DFEXSIG1``, little-endian u32 N, u32 dims)
  followed by little-endian float64 values with real and imaginary parts
  interleaved.
"""
from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigError, ShapeError
from .signal import as_signal

SIGNAL_MAGIC = b"DFEXSIG1"
_HEADER = struct.Struct("<8sII")


def atomic_write(path, data: bytes) -> None:
    """Write ``data`` to a temp file beside ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def interleave(values: np.ndarray) -> np.ndarray:
    flat = np.ascontiguousarray(values, dtype=np.complex128).reshape(-1)
    out = np.empty(2 * flat.size, dtype="<f8")
    out[0::2] = flat.real
    out[1::2] = flat.imag
    return out


def deinterleave(raw: np.ndarray) -> np.ndarray:
    return raw[0::2].astype(np.float64) + 1j * raw[1::2].astype(np.float64)


def signal_to_csv(f) -> str:
    f = as_signal(f)
    lines = [f"N={f.shape[0]},dims={f.ndim}"]
    lines.extend(f"{float(z.real)!r},{float(z.imag)!r}" for z in f.reshape(-1))
    return "\n".join(lines) + "\n"


def signal_from_csv(text: str) -> np.ndarray:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigError("empty signal file")
    try:
        fields = dict(kv.split("=", 1) for kv in lines[0].split(","))
        n, dims = int(fields["N"]), int(fields["dims"])
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad CSV signal header {lines[0]!r}") from exc
    if dims not in (1, 2) or n < 1:
        raise ShapeError(f"bad signal header: N={n}, dims={dims}")
    body = lines[1:]
    if len(body) != n**dims:
        raise ShapeError(f"expected {n**dims} samples, found {len(body)}")
    try:
        pairs = np.array([[float(x) for x in ln.split(",")] for ln in body], dtype=np.float64)
    except ValueError as exc:
        raise ConfigError("malformed re,im pair in signal CSV") from exc
    if pairs.shape != (len(body), 2):
        raise ConfigError("each CSV sample line must hold exactly one re,im pair")
    return (pairs[:, 0] + 1j * pairs[:, 1]).reshape((n,) * dims)


def signal_to_bytes(f) -> bytes:
    f = as_signal(f)
    return _HEADER.pack(SIGNAL_MAGIC, f.shape[0], f.ndim) + interleave(f).tobytes()


def signal_from_bytes(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise ConfigError("truncated signal file")
    magic, n, dims = _HEADER.unpack_from(data)
    if magic != SIGNAL_MAGIC:
        raise ConfigError(f"bad signal magic {magic!r}")
    if dims not in (1, 2) or n < 1:
        raise ShapeError(f"bad signal header: N={n}, dims={dims}")
    raw = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if raw.size != 2 * n**dims:
        raise ShapeError(f"expected {n**dims} complex samples, found {raw.size / 2}")
    return deinterleave(raw).reshape((n,) * dims)


def read_signal(path) -> np.ndarray:
    """Read a signal, dispatching on the binary magic rather than the file extension."""
    data = Path(path).read_bytes()
    if data.startswith(SIGNAL_MAGIC):
        return signal_from_bytes(data)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path}: neither a DFEXSIG1 file nor UTF-8 CSV") from exc
    return signal_from_csv(text)


def write_signal(path, f, fmt: str | None = None) -> None:
    """Write ``f``; ``fmt`` is ``"csv"`` or ``"bin"``, inferred from the suffix if omitted."""
    if fmt is None:
        fmt = "csv" if str(path).endswith(".csv") else "bin"
    if fmt == "csv":
        atomic_write(path, signal_to_csv(f).encode("utf-8"))
    elif fmt == "bin":
        atomic_write(path, signal_to_bytes(f))
    else:
        raise ValueError(f"unknown signal format {fmt!r}")
