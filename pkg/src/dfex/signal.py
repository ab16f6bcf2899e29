"""Periodic discrete signals.

A signal is a complex128 numpy array of shape ``(N,)`` or ``(N, N)``.
Indexing is cyclic, so every operation here treats the array as one period
of an N-periodic sequence.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import ShapeError

Shift = Union[int, Sequence[int]]


def as_signal(values, *, copy: bool = False) -> np.ndarray:
    """Coerce ``values`` to a complex128 signal array and validate its shape.

    Raises
    ------
    ShapeError
        If the array is empty, not 1-D or 2-D, or 2-D but not square.
    """
    arr = np.array(values, dtype=np.complex128, copy=copy) if copy else np.asarray(values, dtype=np.complex128)
    if arr.ndim not in (1, 2):
        raise ShapeError(f"signals must be 1-D or 2-D, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ShapeError("signal length must be at least 1")
    if arr.ndim == 2 and arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"2-D signals must be square, got shape {arr.shape}")
    return arr


def length(f: np.ndarray) -> int:
    """Per-dimension period N."""
    return int(f.shape[0])


def delta(n: int, dims: int = 1) -> np.ndarray:
    """The unit impulse: 1 at the origin, 0 elsewhere."""
    if n < 1:
        raise ShapeError("signal length must be at least 1")
    if dims not in (1, 2):
        raise ShapeError(f"dims must be 1 or 2, got {dims}")
    out = np.zeros((n,) * dims, dtype=np.complex128)
    out[(0,) * dims] = 1.0
    return out


def exponential(n: int, k, dims: int = 1) -> np.ndarray:
    """Complex exponential ``e^{2 pi i <k, x> / N}`` at frequency bin ``k``."""
    grid = np.arange(n)
    if dims == 1:
        return np.exp(2j * np.pi * int(k) * grid / n)
    k1, k2 = k
    return np.exp(2j * np.pi * (k1 * grid[:, None] + k2 * grid[None, :]) / n)


def dft(f, method: str = "fft") -> np.ndarray:
    """Unnormalized DFT, ``fhat[k] = sum_n f[n] e^{-2 pi i k n / N}``.

    ``method="fft"`` uses numpy's pocketfft, which stays O(N log N) for every
    length (Bluestein for awkward primes).  ``method="direct"`` builds the
    DFT matrix explicitly and is kept as an independent reference path.
    """
    f = as_signal(f)
    if method == "fft":
        return np.fft.fftn(f)
    if method == "direct":
        return dft_direct(f)
    raise ValueError(f"unknown DFT method {method!r}")


def idft(fhat, method: str = "fft") -> np.ndarray:
    """Inverse of :func:`dft`."""
    fhat = as_signal(fhat)
    if method == "fft":
        return np.fft.ifftn(fhat)
    if method == "direct":
        n = length(fhat)
        w = np.conj(_dft_matrix(n)) / n
        return w @ fhat if fhat.ndim == 1 else w @ fhat @ w.T
    raise ValueError(f"unknown DFT method {method!r}")


def _dft_matrix(n: int) -> np.ndarray:
    idx = np.arange(n)
    # exponent reduced mod n before scaling keeps the phases accurate for large n
    return np.exp(-2j * np.pi * (np.outer(idx, idx) % n) / n)


def dft_direct(f) -> np.ndarray:
    """O(N^2) DFT by explicit matrix product (separable in 2-D)."""
    f = as_signal(f)
    w = _dft_matrix(length(f))
    return w @ f if f.ndim == 1 else w @ f @ w.T


def _check_same_shape(f: np.ndarray, g: np.ndarray) -> None:
    if f.shape != g.shape:
        raise ShapeError(f"shape mismatch: {f.shape} vs {g.shape}")


def circ_conv(f, g, method: str = "fft") -> np.ndarray:
    """Circular convolution ``(f * g)[n] = sum_k f[k] g[n - k]``.

    Parameters
    ----------
    f, g : array_like
        Signals of identical shape.
    method : {"fft", "direct"}
        Pointwise product of DFTs, or explicit summation over the period.
    """
    f = as_signal(f)
    g = as_signal(g)
    _check_same_shape(f, g)
    if method == "fft":
        return np.fft.ifftn(np.fft.fftn(f) * np.fft.fftn(g))
    if method != "direct":
        raise ValueError(f"unknown convolution method {method!r}")
    n = length(f)
    idx = np.arange(n)
    circulant = (idx[:, None] - idx[None, :]) % n
    if f.ndim == 1:
        return g[circulant] @ f
    out = np.zeros_like(f)
    for k1 in range(n):
        for k2 in range(n):
            if f[k1, k2] != 0:
                out += f[k1, k2] * np.roll(g, (k1, k2), axis=(0, 1))
    return out


def circ_conv_separable(f, column, row) -> np.ndarray:
    """Convolve a 2-D signal with the separable atom ``column[n1] * row[n2]``.

    Runs a 1-D circular convolution along each row (axis 1) with ``row``,
    then along each column (axis 0) with ``column``.
    """
    f = as_signal(f)
    column = np.asarray(column, dtype=np.complex128)
    row = np.asarray(row, dtype=np.complex128)
    n = length(f)
    if f.ndim != 2 or column.shape != (n,) or row.shape != (n,):
        raise ShapeError("separable convolution needs an N x N signal and two length-N factors")
    tmp = np.fft.ifft(np.fft.fft(f, axis=1) * np.fft.fft(row)[None, :], axis=1)
    return np.fft.ifft(np.fft.fft(tmp, axis=0) * np.fft.fft(column)[:, None], axis=0)


def translate(f, m: Shift) -> np.ndarray:
    """Cyclic translation ``(T_m f)[n] = f[n - m]``; ``m`` is reduced mod N.

    For 2-D signals ``m`` is a pair, or a single integer applied to both axes.
    """
    f = as_signal(f)
    if f.ndim == 1:
        return np.roll(f, int(m))
    if np.ndim(m) == 0:
        m = (int(m), int(m))
    return np.roll(f, tuple(int(x) for x in m), axis=(0, 1))


class Norms(NamedTuple):
    l1: float
    l2: float
    sup: float


def norms(f) -> Norms:
    """The l1, l2 and sup norms over one period."""
    a = np.abs(as_signal(f))
    return Norms(float(a.sum()), float(np.sqrt(np.sum(a * a))), float(a.max()))


def l2(f) -> float:
    a = np.abs(np.asarray(f))
    return float(np.sqrt(np.sum(a * a)))


def random_signal(rng: np.random.Generator, n: int, dims: int = 1) -> np.ndarray:
    """Component-wise complex standard normal signal (unit variance per sample)."""
    shape = (n,) * dims
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
