"""Convolutional sets of atoms and their frame bounds.

A :class:`FilterBank` is a finite collection of atoms that all live in the
same signal space.  Because every finite collection satisfies the Bessel
inequality, the interesting quantities are the bounds themselves, which are
read off the summed power spectrum ``sum_l |ghat_l[k]|^2``: its maximum is the
tightest Bessel bound, its minimum the lower frame bound.

A bank may carry one extra *output atom* (the low-pass or delta filter that
generates the previous layer's features).  When present it takes part in all
bound computations, which is how the augmented set enters the admissibility
condition.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import ShapeError
from .signal import as_signal, exponential, l2


class WaveletLabel(NamedTuple):
    """Index of a wavelet atom: scale ``j >= 1`` and direction."""

    scale: int
    direction: str = "none"


DIRECTIONS_2D = ("horizontal", "vertical", "diagonal")


@dataclass(frozen=True, eq=False)
class Atom:
    """One filter of a bank.

    ``factors`` holds the ``(column, row)`` 1-D filters of a separable 2-D
    atom so that convolution can be done as a row pass and a column pass.
    """

    filter: np.ndarray
    label: Hashable
    factors: Optional[tuple] = None

    def scaled(self, c: complex) -> "Atom":
        factors = None
        if self.factors is not None:
            # put the whole factor on the column filter; the product is what matters
            factors = (self.factors[0] * c, self.factors[1])
        return Atom(self.filter * c, self.label, factors)


class FilterBank:
    """An immutable convolutional set with cached spectra and frame bounds."""

    def __init__(self, atoms: Sequence[Atom], output_atom=None, name: str | None = None):
        atoms = tuple(atoms)
        if not atoms:
            raise ShapeError("a filter bank needs at least one atom")
        shape = as_signal(atoms[0].filter).shape
        frozen = []
        for atom in atoms:
            filt = as_signal(atom.filter, copy=True)
            if filt.shape != shape:
                raise ShapeError(f"atom {atom.label!r} has shape {filt.shape}, expected {shape}")
            filt.setflags(write=False)
            frozen.append(Atom(filt, atom.label, atom.factors))
        labels = [a.label for a in frozen]
        if len(set(labels)) != len(labels):
            raise ShapeError("atom labels must be unique")
        if output_atom is not None:
            output_atom = as_signal(output_atom, copy=True)
            if output_atom.shape != shape:
                raise ShapeError(f"output atom has shape {output_atom.shape}, expected {shape}")
            output_atom.setflags(write=False)

        self.atoms = tuple(frozen)
        self.output_atom = output_atom
        self.name = name
        self.shape = shape
        self._index = {label: i for i, label in enumerate(labels)}

        self.spectra = np.stack([np.fft.fftn(a.filter) for a in self.atoms])
        self.spectra.setflags(write=False)
        self.output_spectrum = None if output_atom is None else np.fft.fftn(output_atom)
        self.plain_power = np.sum(np.abs(self.spectra) ** 2, axis=0)
        power = self.plain_power
        if self.output_spectrum is not None:
            power = power + np.abs(self.output_spectrum) ** 2
        self.power = power
        self.frame_bounds = (float(power.min()), float(power.max()))

    @property
    def signal_length(self) -> int:
        return self.shape[0]

    @property
    def dims(self) -> int:
        return len(self.shape)

    @property
    def labels(self) -> tuple:
        return tuple(a.label for a in self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __repr__(self) -> str:
        name = f"{self.name!r}, " if self.name else ""
        chi = ", +output" if self.output_atom is not None else ""
        return f"FilterBank({name}{len(self)} atoms, shape={self.shape}{chi})"

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown atom label {label!r}") from None

    def atom(self, label) -> Atom:
        return self.atoms[self.index(label)]

    def spectrum(self, label) -> np.ndarray:
        return self.spectra[self.index(label)]

    def scaled(self, c: float) -> "FilterBank":
        """Every atom, and the output atom, multiplied by ``c``."""
        chi = None if self.output_atom is None else self.output_atom * c
        return FilterBank([a.scaled(c) for a in self.atoms], chi, self.name)

    def with_output_atom(self, chi) -> "FilterBank":
        return FilterBank(self.atoms, chi, self.name)


def bessel_bound(bank: FilterBank, include_output: bool = True) -> float:
    """Tightest Bessel bound ``max_k sum_l |ghat_l[k]|^2``."""
    power = bank.power if include_output else bank.plain_power
    return float(power.max())


def frame_bounds(bank: FilterBank, include_output: bool = True) -> tuple[float, float]:
    """``(A, B)``: min and max of the summed power spectrum.

    ``A > 0`` means the translates of the atoms span the whole signal space.
    ``A == 0`` is legal; nothing downstream needs a lower bound.
    """
    power = bank.power if include_output else bank.plain_power
    return float(power.min()), float(power.max())


def maximizing_bin(bank: FilterBank, include_output: bool = True):
    """Frequency bin where the summed power spectrum attains the Bessel bound."""
    power = bank.power if include_output else bank.plain_power
    flat = int(np.argmax(power))
    if bank.dims == 1:
        return flat
    return tuple(int(i) for i in np.unravel_index(flat, power.shape))


def tight_signal(bank: FilterBank) -> np.ndarray:
    """The complex exponential that turns the Bessel inequality into an equality."""
    return exponential(bank.signal_length, maximizing_bin(bank), bank.dims)


class BesselCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def verify_bessel_inequality(bank: FilterBank, f) -> BesselCheck:
    """Evaluate ``sum_l ||f * g_l||^2 <= B* ||f||^2`` by actual convolution."""
    f = as_signal(f)
    if f.shape != bank.shape:
        raise ShapeError(f"signal shape {f.shape} does not match bank shape {bank.shape}")
    fhat = np.fft.fftn(f)
    lhs = 0.0
    filters = [a.filter for a in bank.atoms]
    if bank.output_atom is not None:
        filters.append(bank.output_atom)
    for g in filters:
        lhs += l2(np.fft.ifftn(fhat * np.fft.fftn(g))) ** 2
    rhs = bessel_bound(bank) * l2(f) ** 2
    return BesselCheck(lhs, rhs, lhs <= rhs + 1e-9 * rhs)


def normalize_for_admissibility(bank: FilterBank, L: float, R: float) -> FilterBank:
    """Scale the bank so that ``B <= min{1, 1/(R^2 L^2)}``.

    Every atom and the output atom are divided by ``sqrt(C)`` with
    ``C = B* max{1, R^2 L^2}``, giving the new bound ``1 / max{1, R^2 L^2}``.
    """
    if L <= 0 or R <= 0:
        raise ValueError("Lipschitz constants must be positive")
    b = bessel_bound(bank)
    if b <= 0:
        raise ValueError("cannot normalize a bank whose atoms are all zero")
    c = b * max(1.0, (R * L) ** 2)
    return bank.scaled(1.0 / np.sqrt(c))


def random_bank(
    rng: np.random.Generator,
    n_atoms: int,
    n: int,
    dims: int = 1,
    support: int | None = None,
    output_atom: bool = False,
) -> FilterBank:
    """Gaussian random atoms, optionally with compact support at the origin."""
    shape = (n,) * dims
    atoms = []
    for i in range(n_atoms + int(output_atom)):
        g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        if support is not None:
            mask = np.zeros(shape, dtype=bool)
            mask[(slice(0, support),) * dims] = True
            g = np.where(mask, g, 0)
        atoms.append(Atom(g, f"random{i}"))
    chi = atoms.pop().filter if output_atom else None
    return FilterBank(atoms, chi, name="random")
