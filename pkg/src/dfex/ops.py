"""Point-wise non-linearities and pooling operators with their Lipschitz constants."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import PreconditionError, ShapeError
from .signal import as_signal, l2


def _split(fn):
    return lambda z: fn(z.real) + 1j * fn(z.imag)


def _sigmoid(x):
    # exp of a non-positive argument only, so large |x| never overflows
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


_NONLINEARITIES = {
    # kind: (map, Lipschitz constant, maps 0 to 0)
    "modulus": (lambda z: np.abs(z).astype(np.complex128), 1.0, True),
    "relu": (_split(lambda x: np.maximum(x, 0.0)), 2.0, True),
    "tanh": (_split(np.tanh), 2.0, True),
    "logistic_sigmoid": (_split(_sigmoid), 0.5, False),
}

NONLINEARITY_KINDS = tuple(_NONLINEARITIES)


@dataclass(frozen=True)
class NonLinearity:
    """A point-wise map C -> C.

    tanh, ReLU and the logistic sigmoid act on the real and imaginary parts
    separately.  The Lipschitz constants are the published upper bounds
    (2 for the split ReLU and tanh), not necessarily tight ones.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in _NONLINEARITIES:
            raise PreconditionError(f"unknown non-linearity {self.kind!r}; choose from {NONLINEARITY_KINDS}")

    @property
    def lipschitz_L(self) -> float:
        return _NONLINEARITIES[self.kind][1]

    @property
    def maps_zero_to_zero(self) -> bool:
        return _NONLINEARITIES[self.kind][2]

    def __call__(self, f) -> np.ndarray:
        return _NONLINEARITIES[self.kind][0](np.asarray(f, dtype=np.complex128))


def apply_nonlinearity(rho: NonLinearity, f) -> np.ndarray:
    return rho(f)


POOLING_KINDS = ("subsample", "average", "max", "identity")


@dataclass(frozen=True)
class PoolingOp:
    """Block pooling with factor ``S`` (window = stride = S).

    In 2-D the blocks are ``S x S``.  Average pooling in 2-D uses the
    separable weights ``alpha[i] * alpha[j]``, so uniform 1-D weights 1/S
    become the uniform 2-D weights 1/S^2.
    """

    kind: str
    S: int = 1
    weights: Optional[tuple] = field(default=None)

    def __post_init__(self):
        if self.kind not in POOLING_KINDS:
            raise PreconditionError(f"unknown pooling {self.kind!r}; choose from {POOLING_KINDS}")
        if not isinstance(self.S, (int, np.integer)) or self.S < 1:
            raise PreconditionError(f"pooling factor must be a positive integer, got {self.S!r}")
        if self.kind == "identity" and self.S != 1:
            raise PreconditionError("identity pooling has factor 1")
        if self.kind == "average":
            w = (1.0 / self.S,) * self.S if self.weights is None else tuple(float(x) for x in self.weights)
            if len(w) != self.S or not all(np.isfinite(w)):
                raise PreconditionError(f"average pooling needs {self.S} finite weights")
            object.__setattr__(self, "weights", w)
        elif self.weights is not None:
            raise PreconditionError(f"{self.kind} pooling takes no weights")

    @property
    def lipschitz_R(self) -> float:
        """Lipschitz constant for 1-D signals."""
        return self.lipschitz(1)

    def lipschitz(self, dims: int = 1) -> float:
        if self.kind != "average":
            return 1.0
        amax = max(abs(w) for w in self.weights)
        if dims == 1:
            return float(np.sqrt(self.S) * amax)
        return float(self.S * amax**2)

    @property
    def maps_zero_to_zero(self) -> bool:
        return True

    def output_length(self, n: int) -> int:
        if n % self.S:
            raise PreconditionError(f"length {n} is not divisible by pooling factor {self.S}")
        return n // self.S

    def __call__(self, f) -> np.ndarray:
        return pool(self, f)


def pool(p: PoolingOp, f) -> np.ndarray:
    """Apply ``p`` to a 1-D or square 2-D signal."""
    f = as_signal(f)
    S = p.S
    n = f.shape[0]
    m = p.output_length(n)
    if p.kind == "identity" or (S == 1 and p.kind == "subsample"):
        return f.copy()
    if f.ndim == 1:
        if p.kind == "subsample":
            return f[::S].copy()
        blocks = f.reshape(m, S)
        if p.kind == "average":
            return blocks @ np.asarray(p.weights)
        return np.abs(blocks).max(axis=1).astype(np.complex128)
    if p.kind == "subsample":
        return f[::S, ::S].copy()
    blocks = f.reshape(m, S, m, S)
    if p.kind == "average":
        w = np.asarray(p.weights)
        return np.einsum("aibj,i,j->ab", blocks, w, w)
    return np.abs(blocks).max(axis=(1, 3)).astype(np.complex128)


def verify_pool_lipschitz(p: PoolingOp, f, h, slack: float = 1e-12):
    """``(lhs, rhs, holds)`` for ``||Pf - Ph|| <= R ||f - h||``."""
    f = as_signal(f)
    h = as_signal(h)
    if f.shape != h.shape:
        raise ShapeError(f"shape mismatch: {f.shape} vs {h.shape}")
    lhs = l2(pool(p, f) - pool(p, h))
    rhs = p.lipschitz(f.ndim) * l2(f - h)
    return lhs, rhs, lhs <= rhs + slack
