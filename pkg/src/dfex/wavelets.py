"""Shipped wavelet banks built with the algorithme a trous.

The transform is undecimated: at scale ``j`` the base low- and high-pass
filters are dilated by inserting ``2^(j-1) - 1`` zeros between their taps,
and each band-pass atom is the full-length equivalent filter of the cascade

    psi_j = h_1 * ... * h_{j-1} * g_j,      phi_J = h_1 * ... * h_J,

so that propagating through the bank is a plain circular convolution per
atom.  In 2-D, the atoms at scale ``j`` are the three tensor products of
``psi_j`` and ``phi_j``; the output atom is ``phi_J`` times itself.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import PreconditionError
from .filterbank import DIRECTIONS_2D, Atom, FilterBank, WaveletLabel

_S2 = math.sqrt(2.0)
_S3 = math.sqrt(3.0)

# Analysis low-pass / high-pass pairs, leading and trailing zero taps dropped.
# High-pass filters use the sign convention g[0] > 0; only |ghat| matters.
FILTERS = {
    "haar": (
        np.array([1.0, 1.0]) / _S2,
        np.array([1.0, -1.0]) / _S2,
    ),
    "db2": (
        np.array([1 - _S3, 3 - _S3, 3 + _S3, 1 + _S3]) / (4 * _S2),
        np.array([1 + _S3, -(3 + _S3), 3 - _S3, -(1 - _S3)]) / (4 * _S2),
    ),
    "rbio2_2": (
        _S2 * np.array([0.25, 0.5, 0.25]),
        _S2 * np.array([-0.125, -0.25, 0.75, -0.25, -0.125]),
    ),
}

FAMILY_ALIASES = {"rbio2.2": "rbio2_2", "bior2.2": "rbio2_2"}


def family_filters(family: str) -> tuple[np.ndarray, np.ndarray]:
    key = FAMILY_ALIASES.get(family.lower(), family.lower())
    if key not in FILTERS:
        raise PreconditionError(f"unknown wavelet family {family!r}; choose from {sorted(FILTERS)}")
    return FILTERS[key]


def dilate(taps: np.ndarray, step: int) -> np.ndarray:
    """Insert ``step - 1`` zeros between consecutive taps."""
    out = np.zeros((len(taps) - 1) * step + 1, dtype=taps.dtype)
    out[::step] = taps
    return out


def wrap(taps: np.ndarray, n: int) -> np.ndarray:
    """Fold a finite filter onto one period of length ``n``."""
    out = np.zeros(n, dtype=np.complex128)
    np.add.at(out, np.arange(len(taps)) % n, taps)
    return out


def atrous_cascade(lo: np.ndarray, hi: np.ndarray, J: int, n: int):
    """Band-pass filters ``psi_1..psi_J``, the matching low-pass ``phi_1..phi_J``.

    Products are formed with exact linear convolution of the finite tap arrays
    and folded onto the period at the end, so zero taps stay exactly zero.
    """
    low = np.array([1.0])
    psis, phis = [], []
    for j in range(1, J + 1):
        step = 2 ** (j - 1)
        psis.append(wrap(np.convolve(low, dilate(hi, step)), n))
        low = np.convolve(low, dilate(lo, step))
        phis.append(wrap(low, n))
    return psis, phis


def wavelet_bank(family: str, J: int, N: int, dims: int = 1, strict: bool = True) -> FilterBank:
    """Undecimated wavelet bank with ``J`` scales and a low-pass output atom.

    Parameters
    ----------
    family : {"haar", "db2", "rbio2_2"}
    J : int
        Number of scales, at least 1.
    N : int
        Period of the signals the bank acts on.
    dims : {1, 2}
        1-D gives ``J`` atoms labelled ``(j, "none")``; 2-D gives ``3J``
        atoms labelled ``(j, direction)``.
    strict : bool
        Require ``N`` divisible by ``2^J`` (dyadic lengths).  Pass ``False`` for
        sizes like 28 or 14 where the coarse filters simply wrap around the
        period.

    Raises
    ------
    PreconditionError
        On an unknown family, ``J < 1``, or a non-dyadic ``N`` under ``strict``.
    """
    lo, hi = family_filters(family)
    if J < 1:
        raise PreconditionError("J must be at least 1")
    if N < 2:
        raise PreconditionError("N must be at least 2")
    if strict and N % (2**J) != 0:
        raise PreconditionError(f"N={N} is not divisible by 2^J={2**J}")
    if dims not in (1, 2):
        raise PreconditionError(f"dims must be 1 or 2, got {dims}")
    psis, phis = atrous_cascade(lo, hi, J, N)
    name = f"{family}-J{J}-N{N}-{dims}d"
    if dims == 1:
        atoms = [Atom(psis[j - 1], WaveletLabel(j)) for j in range(1, J + 1)]
        return FilterBank(atoms, phis[-1], name=name)
    atoms = []
    for j in range(1, J + 1):
        psi, phi = psis[j - 1], phis[j - 1]
        pairs = {"horizontal": (psi, phi), "vertical": (phi, psi), "diagonal": (psi, psi)}
        for direction in DIRECTIONS_2D:
            col, row = pairs[direction]
            atoms.append(Atom(np.outer(col, row), WaveletLabel(j, direction), (col, row)))
    return FilterBank(atoms, np.outer(phis[-1], phis[-1]), name=name)


def lowpass(family: str, J: int, N: int, dims: int = 1) -> np.ndarray:
    """The scale-``J`` low-pass atom on its own (no divisibility check)."""
    lo, hi = family_filters(family)
    phi = atrous_cascade(lo, hi, J, N)[1][-1]
    return phi if dims == 1 else np.outer(phi, phi)
