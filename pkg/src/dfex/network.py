"""Module-sequences and the feature extractor built on them.

A module-sequence is an ordered list of ``(filter bank, non-linearity,
pooling)`` triplets.  Layer ``d`` (0-based, ``0 <= d < D``) holds the maps
``U[q]f`` for paths ``q`` of length ``d``; its features are ``(U[q]f) * chi_d``.

The output atom ``chi_d`` lives in the signal space of module ``d + 1`` and
is stored as the ``output_atom`` of that module's bank, so the bank's Bessel
bound is automatically the bound of the augmented set.  In 0-based terms:
``chi_d == sequence.modules[d].bank.output_atom``.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import PreconditionError, ShapeError
from .filterbank import DIRECTIONS_2D, FilterBank, WaveletLabel, bessel_bound, normalize_for_admissibility
from .ops import NonLinearity, PoolingOp
from .signal import as_signal, l2

Path = tuple

PRUNING_MODES = ("full", "frequency_decreasing")


def default_workers() -> int:
    """Worker cap from ``DFEX_THREADS`` (default 1, i.e. serial)."""
    try:
        return max(1, int(os.environ.get("DFEX_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Module:
    """One ``(Psi_d, rho_d, P_d)`` triplet."""

    bank: FilterBank
    rho: NonLinearity
    pooling: PoolingOp

    def __post_init__(self):
        self.pooling.output_length(self.bank.signal_length)

    @property
    def input_length(self) -> int:
        return self.bank.signal_length

    @property
    def output_length(self) -> int:
        return self.pooling.output_length(self.bank.signal_length)

    @property
    def dims(self) -> int:
        return self.bank.dims

    @property
    def B(self) -> float:
        return bessel_bound(self.bank)

    @property
    def L(self) -> float:
        return self.rho.lipschitz_L

    @property
    def R(self) -> float:
        return self.pooling.lipschitz(self.dims)

    @property
    def zero_preserving(self) -> bool:
        return self.rho.maps_zero_to_zero and self.pooling.maps_zero_to_zero

    def admissibility_value(self) -> float:
        return max(self.B, self.B * (self.R * self.L) ** 2)

    def normalized(self) -> "Module":
        return Module(normalize_for_admissibility(self.bank, self.L, self.R), self.rho, self.pooling)


ModuleDescriptor = Module


class ModuleSequence:
    """An ordered, shape-consistent list of modules.

    Parameters
    ----------
    modules : sequence of Module
        Module ``d`` must accept signals of the length module ``d - 1`` emits.
    strict_scale_order : bool
        Use ``j_next > max`` instead of ``j_next >= max`` when pruning to
        frequency-decreasing paths.
    """

    def __init__(self, modules: Sequence[Module], strict_scale_order: bool = False):
        modules = tuple(modules)
        if not modules:
            raise ShapeError("a module-sequence needs at least one module")
        dims = modules[0].dims
        for d, (prev, nxt) in enumerate(zip(modules, modules[1:]), start=1):
            if nxt.dims != dims:
                raise ShapeError(f"module {d + 1} is {nxt.dims}-D, module 1 is {dims}-D")
            if nxt.input_length != prev.output_length:
                raise ShapeError(
                    f"module {d + 1} expects length {nxt.input_length}, "
                    f"module {d} produces {prev.output_length}"
                )
        self.modules = modules
        self.strict_scale_order = strict_scale_order

    def __len__(self) -> int:
        return len(self.modules)

    def __repr__(self) -> str:
        return f"ModuleSequence(D={self.depth}, lengths={self.lengths}, dims={self.dims})"

    @property
    def depth(self) -> int:
        return len(self.modules)

    @property
    def dims(self) -> int:
        return self.modules[0].dims

    @property
    def input_length(self) -> int:
        return self.modules[0].input_length

    @property
    def input_shape(self) -> tuple:
        return (self.input_length,) * self.dims

    @property
    def lengths(self) -> list[int]:
        """``[N_1, ..., N_D, N_{D+1}]`` (per-dimension lengths)."""
        return [m.input_length for m in self.modules] + [self.modules[-1].output_length]

    def output_atom(self, d: int) -> Optional[np.ndarray]:
        """``chi_d`` for ``0 <= d < D``, or ``None`` if layer ``d`` does not contribute."""
        if not 0 <= d < self.depth:
            raise IndexError(f"layer {d} outside 0..{self.depth - 1}")
        return self.modules[d].bank.output_atom

    @property
    def output_atoms(self) -> list:
        return [self.output_atom(d) for d in range(self.depth)]

    def contributes(self, d: int) -> bool:
        return self.output_atom(d) is not None

    def scale_bounds(self) -> list[float]:
        return [m.B for m in self.modules]

    @property
    def admissible(self) -> bool:
        return check_admissibility(self)[1]

    def normalized(self) -> "ModuleSequence":
        """Every bank scaled so the sequence satisfies the admissibility condition."""
        return ModuleSequence([m.normalized() for m in self.modules], self.strict_scale_order)

    def zero_preserving_up_to(self, d: int) -> bool:
        """Whether modules ``1..d`` all satisfy ``rho(0) = 0`` and ``P(0) = 0``."""
        return all(m.zero_preserving for m in self.modules[:d])


def _scale(label) -> int:
    scale = getattr(label, "scale", None)
    if scale is None:
        raise PreconditionError(f"label {label!r} has no wavelet scale; frequency-decreasing pruning needs one")
    return int(scale)


def _admits(path: Path, label, strict: bool) -> bool:
    """Frequency-decreasing rule: the next scale never drops below the running maximum."""
    if not path:
        return True
    top = max(_scale(x) for x in path)
    return _scale(label) > top if strict else _scale(label) >= top


def _check_pruning(pruning: str) -> str:
    if pruning in ("freq-dec", "frequency-decreasing"):
        pruning = "frequency_decreasing"
    if pruning not in PRUNING_MODES:
        raise PreconditionError(f"unknown pruning mode {pruning!r}; choose from {PRUNING_MODES}")
    return pruning


def enumerate_paths(omega: ModuleSequence, depth: int, pruning: str = "full") -> list[Path]:
    """All paths of length ``depth`` in lexicographic order of bank positions."""
    pruning = _check_pruning(pruning)
    if depth > omega.depth:
        raise PreconditionError(f"path length {depth} exceeds network depth {omega.depth}")
    paths: list[Path] = [()]
    for k in range(depth):
        labels = omega.modules[k].bank.labels
        if pruning == "full":
            paths = [q + (lab,) for q in paths for lab in labels]
        else:
            paths = [q + (lab,) for q in paths for lab in labels if _admits(q, lab, omega.strict_scale_order)]
    return paths


def frequency_decreasing_paths(J: int, directions: int, depth: int, strict: bool = False) -> list[Path]:
    """Paths over labels ``(j, k)``, ``j in 1..J``, whose scales never decrease.

    ``directions`` is 1 (1-D labels) or 3 (horizontal, vertical, diagonal).
    """
    if depth < 0:
        raise PreconditionError("depth must be non-negative")
    names = {1: ("none",), 3: DIRECTIONS_2D}.get(directions)
    if names is None:
        raise PreconditionError(f"directions must be 1 or 3, got {directions}")
    labels = [WaveletLabel(j, k) for j in range(1, J + 1) for k in names]
    out = []
    for q in itertools.product(labels, repeat=depth):
        if all(_admits(q[:i], q[i], strict) for i in range(1, depth)):
            out.append(q)
    return out


def count_paths(omega: ModuleSequence, depth: int, pruning: str = "full") -> int:
    """Number of paths of length ``depth`` without materialising them."""
    pruning = _check_pruning(pruning)
    if pruning == "full":
        return int(np.prod([len(m.bank) for m in omega.modules[:depth]], dtype=np.int64))
    # dynamic programme over the running maximum scale
    counts: dict = {None: 1}
    for k in range(depth):
        nxt: dict = {}
        for top, c in counts.items():
            for lab in omega.modules[k].bank.labels:
                s = _scale(lab)
                if top is None or (s > top if omega.strict_scale_order else s >= top):
                    key = s if top is None else max(top, s)
                    nxt[key] = nxt.get(key, 0) + c
        counts = nxt
    return int(sum(counts.values()))


def feature_dimension(omega: ModuleSequence, pruning: str = "full") -> int:
    """Total scalar count: sum over contributing layers of ``paths(d) * N_{d+1}^dims``."""
    lengths = omega.lengths
    total = 0
    for d in range(omega.depth):
        if omega.contributes(d):
            total += count_paths(omega, d, pruning) * lengths[d] ** omega.dims
    return total


def _check_input(module: Module, f) -> np.ndarray:
    f = as_signal(f)
    if f.shape != module.bank.shape:
        raise ShapeError(f"signal shape {f.shape} does not match module input {module.bank.shape}")
    return f


def _propagate_hat(module: Module, fhat: np.ndarray, index: int) -> np.ndarray:
    y = np.fft.ifftn(fhat * module.bank.spectra[index])
    return module.pooling(module.rho(y))


def propagate_one(module: Module, label, f) -> np.ndarray:
    """``P(rho(f * g_label))``."""
    f = _check_input(module, f)
    return _propagate_hat(module, np.fft.fftn(f), module.bank.index(label))


def propagate_path(omega: ModuleSequence, q: Path, f) -> np.ndarray:
    """``U[q]f``; the empty path returns ``f`` unchanged."""
    if len(q) > omega.depth:
        raise PreconditionError(f"path length {len(q)} exceeds network depth {omega.depth}")
    out = as_signal(f)
    if out.shape != omega.input_shape:
        raise ShapeError(f"signal shape {out.shape} does not match network input {omega.input_shape}")
    for module, label in zip(omega.modules, q):
        out = propagate_one(module, label, out)
    return out


@dataclass
class FeatureVector:
    """Per-layer features keyed by path.

    ``layers[d]`` maps each path of length ``d`` to ``(U[q]f) * chi_d``; the
    dict is empty for layers that do not contribute.  Iteration order of each
    dict is the canonical path order, which fixes summation order in norms.
    """

    layers: list = field(default_factory=list)
    dims: int = 1

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def dimension(self) -> int:
        return sum(v.size for layer in self.layers for v in layer.values())

    def items(self) -> Iterator[tuple[int, Path, np.ndarray]]:
        for d, layer in enumerate(self.layers):
            for q, v in layer.items():
                yield d, q, v

    def layer_norm(self, d: int) -> float:
        return float(np.sqrt(sum(l2(v) ** 2 for v in self.layers[d].values())))

    def norm(self) -> float:
        return float(np.sqrt(sum(l2(v) ** 2 for _, _, v in self.items())))

    def __sub__(self, other: "FeatureVector") -> "FeatureVector":
        if [list(a) for a in self.layers] != [list(b) for b in other.layers]:
            raise ShapeError("feature vectors have different path sets")
        return FeatureVector(
            [{q: a[q] - b[q] for q in a} for a, b in zip(self.layers, other.layers)], self.dims
        )

    def to_array(self) -> np.ndarray:
        """All features concatenated in canonical order."""
        parts = [v.reshape(-1) for _, _, v in self.items()]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.complex128)

    def equals(self, other: "FeatureVector") -> bool:
        if self.dims != other.dims or [list(a) for a in self.layers] != [list(b) for b in other.layers]:
            return False
        return all(np.array_equal(v, other.layers[d][q]) for d, q, v in self.items())


def feature_space_norm(phi: FeatureVector, layer: Optional[int] = None) -> float:
    """Root of the summed squared l2 norms, over all layers or just ``layer``."""
    return phi.norm() if layer is None else phi.layer_norm(layer)


def extract(
    omega: ModuleSequence,
    f,
    pruning: str = "full",
    workers: Optional[int] = None,
) -> FeatureVector:
    """Feature vector ``{(U[q]f) * chi_d}`` over all layers ``0 <= d < D``.

    Each ``U[q]f`` is computed once and shared by all descendants.  With
    ``workers > 1`` the first-level subtrees run in a thread pool; the result
    does not depend on scheduling because each subtree is computed
    independently and reassembled in canonical order.
    """
    pruning = _check_pruning(pruning)
    f = as_signal(f)
    if f.shape != omega.input_shape:
        raise ShapeError(f"signal shape {f.shape} does not match network input {omega.input_shape}")
    D = omega.depth
    strict = omega.strict_scale_order
    chi_hats = [None if chi is None else np.fft.fftn(chi) for chi in omega.output_atoms]
    # deepest layer with an output; nothing below it needs propagating
    last = max((d for d in range(D) if chi_hats[d] is not None), default=-1)

    def walk(d: int, q: Path, fq: np.ndarray, out: list) -> None:
        fhat = np.fft.fftn(fq)
        if chi_hats[d] is not None:
            out[d][q] = np.fft.ifftn(fhat * chi_hats[d])
        if d >= last:
            return
        module = omega.modules[d]
        for i, lab in enumerate(module.bank.labels):
            if pruning == "frequency_decreasing" and not _admits(q, lab, strict):
                continue
            walk(d + 1, q + (lab,), _propagate_hat(module, fhat, i), out)

    layers: list = [dict() for _ in range(D)]
    if last < 0:
        return FeatureVector(layers, omega.dims)
    workers = default_workers() if workers is None else workers
    if workers <= 1 or last == 0:
        walk(0, (), f, layers)
        return FeatureVector(layers, omega.dims)

    fhat = np.fft.fftn(f)
    if chi_hats[0] is not None:
        layers[0][()] = np.fft.ifftn(fhat * chi_hats[0])
    module = omega.modules[0]

    def subtree(i: int) -> list:
        out: list = [dict() for _ in range(D)]
        lab = module.bank.labels[i]
        walk(1, (lab,), _propagate_hat(module, fhat, i), out)
        return out

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(subtree, range(len(module.bank))))
    for part in parts:
        for d in range(1, D):
            layers[d].update(part[d])
    # pool.map preserves submission order, so every dict is already canonical
    return FeatureVector(layers, omega.dims)


def check_admissibility(omega: ModuleSequence, tol: float = 1e-12) -> tuple[list[float], bool]:
    """Per-module ``max{B_d, B_d R_d^2 L_d^2}`` and whether all are at most 1."""
    values = [m.admissibility_value() for m in omega.modules]
    return values, all(v <= 1.0 + tol for v in values)


def layer_gain(module: Module) -> float:
    """``B L^2 R^2`` of one module."""
    return module.B * (module.L * module.R) ** 2


def local_lipschitz(omega: ModuleSequence, d: int, substitute_bessel: bool = False) -> float:
    """Lipschitz constant of the layer-``d`` features.

    ``||chi_d||_1 * sqrt(prod_{k<=d} B_k L_k^2 R_k^2)``.  With
    ``substitute_bessel`` the factor ``||chi_d||_1`` is replaced by
    ``sqrt(B_{d+1})``, which also bounds ``||h * chi_d|| / ||h||``.
    """
    chi = omega.output_atom(d)
    if chi is None:
        raise PreconditionError(f"layer {d} does not contribute (no output atom)")
    gain = float(np.prod([layer_gain(m) for m in omega.modules[:d]]))
    head = np.sqrt(omega.modules[d].B) if substitute_bessel else float(np.abs(chi).sum())
    return float(head * np.sqrt(gain))
