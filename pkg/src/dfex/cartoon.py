"""Sampled cartoon functions, deformations, and their deformation-error bounds.

Continuous functions are kept symbolic: a small closed family of primitives
whose Lipschitz constants and sup-norms are known in closed form.  That is
what lets a generated cartoon carry a *certified* variation ``K`` instead of
an estimate from samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, GridEndpointError, PreconditionError
from .signal import l2

# ---------------------------------------------------------------------------
# primitives


def _num(x):
    return {"re": x.real, "im": x.imag} if isinstance(x, complex) and x.imag else float(getattr(x, "real", x))


def _parse_num(v):
    if isinstance(v, dict):
        return complex(v["re"], v["im"])
    return float(v)


@dataclass(frozen=True)
class Constant:
    value: complex = 0.0

    def __call__(self, x):
        return np.full(np.shape(x), self.value, dtype=np.complex128)

    @property
    def lipschitz(self) -> float:
        return 0.0

    def sup_on(self, lo: float, hi: float) -> float:
        return abs(self.value)

    @property
    def sup(self) -> float:
        return abs(self.value)

    def to_dict(self):
        return {"kind": "constant", "value": _num(self.value)}


@dataclass(frozen=True)
class Affine:
    """``slope * x + intercept``."""

    slope: complex
    intercept: complex = 0.0

    def __call__(self, x):
        return self.slope * np.asarray(x, dtype=np.float64) + self.intercept + 0j

    @property
    def lipschitz(self) -> float:
        return abs(self.slope)

    def sup_on(self, lo: float, hi: float) -> float:
        # |a x + b| is convex in x
        return max(abs(self.slope * lo + self.intercept), abs(self.slope * hi + self.intercept))

    @property
    def sup(self) -> float:
        return abs(self.intercept) if self.slope == 0 else math.inf

    def to_dict(self):
        return {"kind": "affine", "slope": _num(self.slope), "intercept": _num(self.intercept)}


@dataclass(frozen=True)
class ClampedAffine:
    """``slope * clip(x, 0, 1) + intercept``: affine on the unit interval, flat outside."""

    slope: complex
    intercept: complex = 0.0

    def __call__(self, x):
        return self.slope * np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0) + self.intercept + 0j

    @property
    def lipschitz(self) -> float:
        return abs(self.slope)

    def sup_on(self, lo: float, hi: float) -> float:
        lo, hi = min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0)
        return Affine(self.slope, self.intercept).sup_on(lo, hi)

    @property
    def sup(self) -> float:
        return max(abs(self.intercept), abs(self.slope + self.intercept))

    def to_dict(self):
        return {"kind": "clamped_affine", "slope": _num(self.slope), "intercept": _num(self.intercept)}


@dataclass(frozen=True)
class Sinusoid:
    """``amplitude * sin(frequency * x + phase)``."""

    amplitude: complex
    frequency: float
    phase: float = 0.0

    def __call__(self, x):
        return self.amplitude * np.sin(self.frequency * np.asarray(x, dtype=np.float64) + self.phase) + 0j

    @property
    def lipschitz(self) -> float:
        return abs(self.amplitude) * abs(self.frequency)

    def sup_on(self, lo: float, hi: float) -> float:
        return abs(self.amplitude)

    @property
    def sup(self) -> float:
        return abs(self.amplitude)

    def to_dict(self):
        return {"kind": "sinusoid", "amplitude": _num(self.amplitude), "frequency": self.frequency, "phase": self.phase}


@dataclass(frozen=True)
class Sum:
    """Sum of primitives; constants add (triangle inequality), so they stay certified."""

    terms: tuple

    def __call__(self, x):
        out = np.zeros(np.shape(x), dtype=np.complex128)
        for t in self.terms:
            out = out + t(x)
        return out

    @property
    def lipschitz(self) -> float:
        return float(sum(t.lipschitz for t in self.terms))

    def sup_on(self, lo: float, hi: float) -> float:
        return float(sum(t.sup_on(lo, hi) for t in self.terms))

    @property
    def sup(self) -> float:
        return float(sum(t.sup for t in self.terms))

    def to_dict(self):
        return {"kind": "sum", "terms": [t.to_dict() for t in self.terms]}


def primitive_from_dict(doc: dict):
    try:
        kind = doc["kind"]
        if kind == "constant":
            return Constant(_parse_num(doc["value"]))
        if kind == "affine":
            return Affine(_parse_num(doc["slope"]), _parse_num(doc.get("intercept", 0.0)))
        if kind == "clamped_affine":
            return ClampedAffine(_parse_num(doc["slope"]), _parse_num(doc.get("intercept", 0.0)))
        if kind == "sinusoid":
            return Sinusoid(_parse_num(doc["amplitude"]), float(doc["frequency"]), float(doc.get("phase", 0.0)))
        if kind == "sum":
            return Sum(tuple(primitive_from_dict(t) for t in doc["terms"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed function descriptor {doc!r}") from exc
    raise ConfigError(f"unknown function kind {kind!r}")


ZERO = Constant(0.0)

# sample points n/N - tau(n/N) stay inside this window because |tau| <= 1
EVAL_WINDOW = (-2.0, 2.0)


# ---------------------------------------------------------------------------
# cartoon specs and sampling


@dataclass(frozen=True)
class CartoonSpec:
    """``c = c1 + sum_l 1_[a_l, b_l] * c2`` with variation ``K``.

    The usual single-edge cartoon has one interval.  Several pairwise
    disjoint intervals model several edges.
    """

    c1: object
    c2: object
    intervals: tuple
    K: float

    def __post_init__(self):
        intervals = tuple((float(a), float(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", intervals)
        if not intervals:
            raise PreconditionError("a cartoon needs at least one interval")
        if self.K <= 0:
            raise PreconditionError("the variation K must be positive")
        for a, b in intervals:
            if not 0.0 <= a < b <= 1.0:
                raise PreconditionError(f"interval [{a}, {b}] must satisfy 0 <= a < b <= 1")
        ordered = sorted(intervals)
        for (_, b0), (a1, _) in zip(ordered, ordered[1:]):
            if a1 <= b0:
                raise PreconditionError("cartoon intervals must be pairwise disjoint")
        tol = 1e-12 * self.K
        if self.c1.lipschitz > self.K + tol or self.c2.lipschitz > self.K + tol:
            raise PreconditionError(
                f"Lipschitz constants {self.c1.lipschitz:.6g}, {self.c2.lipschitz:.6g} exceed K={self.K}"
            )
        if self.c2.sup_on(*EVAL_WINDOW) > self.K + tol:
            raise PreconditionError(f"sup|c2| = {self.c2.sup_on(*EVAL_WINDOW):.6g} exceeds K={self.K}")

    def indicator(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(x.shape)
        for a, b in self.intervals:
            out += (x >= a) & (x <= b)
        return out

    def __call__(self, x) -> np.ndarray:
        return self.c1(x) + self.indicator(x) * self.c2(x)

    @property
    def is_lipschitz_only(self) -> bool:
        return self.c2 == ZERO

    @property
    def is_indicator_only(self) -> bool:
        return self.c1 == ZERO and self.c2 == Constant(1.0)

    def to_dict(self):
        return {
            "c1": self.c1.to_dict(),
            "c2": self.c2.to_dict(),
            "intervals": [list(iv) for iv in self.intervals],
            "K": self.K,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CartoonSpec":
        try:
            return cls(
                primitive_from_dict(doc["c1"]),
                primitive_from_dict(doc["c2"]),
                tuple(tuple(iv) for iv in doc["intervals"]),
                float(doc["K"]),
            )
        except KeyError as exc:
            raise ConfigError(f"cartoon spec is missing {exc}") from exc


def grid_points_hit(x: float, n: int, tol: float = 1e-9) -> bool:
    """Whether ``x`` coincides (to ``tol`` in units of 1/n) with a grid point ``k/n``, ``0 <= k < n``."""
    k = round(x * n)
    return 0 <= k < n and abs(x * n - k) <= tol


@dataclass(frozen=True)
class SampledCartoon:
    """``signal[n] = c(n/N)``.

    ``in_class`` is ``False`` only for instances built with grid endpoints on
    purpose; the deformation bounds refuse those.
    """

    signal: np.ndarray
    spec: CartoonSpec
    N: int
    in_class: bool = True


def sample_cartoon(spec: CartoonSpec, N: int, allow_grid_endpoints: bool = False) -> SampledCartoon:
    """Evaluate the cartoon at ``0, 1/N, ..., (N-1)/N``.

    Raises
    ------
    GridEndpointError
        If an interval endpoint is a sampling point and ``allow_grid_endpoints``
        is not set.
    """
    if N < 2:
        raise PreconditionError("N must be at least 2")
    on_grid = [x for iv in spec.intervals for x in iv if grid_points_hit(x, N)]
    if on_grid and not allow_grid_endpoints:
        raise GridEndpointError(f"interval endpoints {on_grid} lie on the sampling grid for N={N}")
    x = np.arange(N) / N
    return SampledCartoon(spec(x), spec, N, in_class=not on_grid)


# ---------------------------------------------------------------------------
# deformations


@dataclass(frozen=True)
class DeformationField:
    """A real displacement field ``tau: R -> [-1, 1]`` with certified sup-norm."""

    tau: object

    def __post_init__(self):
        if self.sup_norm > 1.0:
            raise PreconditionError(f"deformation sup-norm {self.sup_norm:.6g} exceeds 1")

    @property
    def sup_norm(self) -> float:
        return float(self.tau.sup)

    def __call__(self, x) -> np.ndarray:
        return np.real(self.tau(x))

    @classmethod
    def constant(cls, t: float) -> "DeformationField":
        return cls(Constant(float(t)))

    def to_dict(self):
        return {"tau": self.tau.to_dict(), "sup_norm": self.sup_norm}

    @classmethod
    def from_dict(cls, doc: dict) -> "DeformationField":
        return cls(primitive_from_dict(doc["tau"]))


def deform(sc: SampledCartoon, tau: DeformationField) -> np.ndarray:
    """``(F_tau f)[n] = c(n/N - tau(n/N))``, re-evaluating the continuous cartoon."""
    x = np.arange(sc.N) / sc.N
    return sc.spec(x - tau(x))


def deformation_error(sc: SampledCartoon, tau: DeformationField) -> float:
    return l2(sc.signal - deform(sc, tau))


def _require_in_class(sc: SampledCartoon, tau: DeformationField) -> None:
    if not sc.in_class:
        raise GridEndpointError("bound undefined: cartoon has interval endpoints on the sampling grid")
    if tau.sup_norm > 1.0:
        raise PreconditionError("deformation sup-norm must be at most 1")


def deformation_bound(sc: SampledCartoon, tau: DeformationField) -> float:
    """``4 K sqrt(N) sqrt(||tau||)`` for a single-edge cartoon.

    With ``L`` intervals the indicator term is counted once per interval:
    ``(2 + 2L) K sqrt(N) sqrt(||tau||)``.
    """
    _require_in_class(sc, tau)
    edges = len(sc.spec.intervals)
    return (2.0 + 2.0 * edges) * sc.spec.K * math.sqrt(sc.N) * math.sqrt(tau.sup_norm)


def lipschitz_part_bound(sc: SampledCartoon, tau: DeformationField) -> float:
    """``C sqrt(N) ||tau||`` with ``C`` the certified Lipschitz constant of ``c1``.

    Only meaningful when ``c2 = 0``.
    """
    _require_in_class(sc, tau)
    if not sc.spec.is_lipschitz_only:
        raise PreconditionError("the Lipschitz-part bound needs c2 = 0")
    return sc.spec.c1.lipschitz * math.sqrt(sc.N) * tau.sup_norm


def indicator_bound(sc: SampledCartoon, tau: DeformationField) -> float:
    """``2 sqrt(N) sqrt(||tau||)`` per interval, for ``c1 = 0, c2 = 1``."""
    _require_in_class(sc, tau)
    if not sc.spec.is_indicator_only:
        raise PreconditionError("the indicator bound needs c1 = 0 and c2 = 1")
    return 2.0 * len(sc.spec.intervals) * math.sqrt(sc.N) * math.sqrt(tau.sup_norm)


def grid_endpoint_instance(N: int) -> tuple[SampledCartoon, DeformationField]:
    """``c = 1_[0, 2/N]`` shifted by ``tau = 1/N``: the error stays at sqrt(2) for every N.

    Both endpoints sit on the grid, so the instance is outside the sampled
    cartoon class and shows why that class excludes grid endpoints.
    """
    spec = CartoonSpec(ZERO, Constant(1.0), ((0.0, 2.0 / N),), K=1.0)
    return sample_cartoon(spec, N, allow_grid_endpoints=True), DeformationField.constant(1.0 / N)


# ---------------------------------------------------------------------------
# random generation

# deterministic irrational nudge applied to generator endpoints that land on the grid
_NUDGE = (math.sqrt(2.0) - 1.0) * 1e-3


def _off_grid(x: float, N: int, lo: float = 0.0, hi: float = 1.0) -> float:
    step = _NUDGE / N
    while grid_points_hit(x, N):
        x = x + step if x + step <= hi else x - step
        step *= 1.5
        x = min(max(x, lo), hi)
    return x


def random_intervals(rng: np.random.Generator, N: int, count: int = 1) -> tuple:
    """``count`` disjoint intervals in [0, 1], each at least 2/N long, endpoints off the grid."""
    cuts = np.sort(rng.uniform(0.0, 1.0, size=2 * count))
    min_gap = 2.0 / N
    while np.any(np.diff(cuts) < min_gap) and 2 * count * min_gap < 1.0:
        cuts = np.sort(rng.uniform(0.0, 1.0, size=2 * count))
    out = []
    for a, b in cuts.reshape(count, 2):
        out.append((_off_grid(float(a), N), _off_grid(float(b), N)))
    return tuple(out)


def random_cartoon(
    rng: np.random.Generator,
    N: int,
    K: float = 1.0,
    kind: str = "general",
    edges: int = 1,
) -> SampledCartoon:
    """A random sampled cartoon with certified variation at most ``K``.

    ``kind`` is ``"general"``, ``"lipschitz"`` (``c2 = 0``) or
    ``"indicator"`` (``c1 = 0, c2 = 1``; needs ``K >= 1``).
    """
    intervals = random_intervals(rng, N, edges)
    if kind == "indicator":
        spec = CartoonSpec(ZERO, Constant(1.0), intervals, K=max(K, 1.0))
        return sample_cartoon(spec, N)
    split = rng.uniform(0.0, 1.0)
    slope = K * split * rng.choice([-1.0, 1.0])
    amp = rng.uniform(0.1, 1.0) * K
    freq = (1.0 - split) * K / amp
    c1 = Sum((Affine(slope, rng.uniform(-K, K)), Sinusoid(amp, freq, rng.uniform(0, 2 * np.pi))))
    if kind == "lipschitz":
        c2 = ZERO
    elif kind == "general":
        jump = rng.uniform(0.5, 1.0) * K * rng.choice([-1.0, 1.0])
        ripple = (K - abs(jump)) * rng.uniform(0.0, 1.0)
        freq2 = rng.uniform(0.0, K / ripple) if ripple > 0 else 0.0
        c2 = Sum((Constant(jump), Sinusoid(ripple, freq2, rng.uniform(0, 2 * np.pi))))
    else:
        raise ValueError(f"unknown cartoon kind {kind!r}")
    return sample_cartoon(CartoonSpec(c1, c2, intervals, K), N)


TAU_KINDS = ("constant", "clamped_affine", "sinusoid")


def random_deformation(
    rng: np.random.Generator,
    N: int,
    kind: str | None = None,
    min_sup: float | None = None,
) -> DeformationField:
    """A random field whose sup-norm is log-uniform on ``[min_sup, 1]``.

    ``min_sup`` defaults to ``1/N``.  Below one grid spacing an edge sitting
    just beside a grid point flips a sample for an arbitrarily small
    displacement, so the square-root bounds do not control the error there.
    """
    low = 1.0 / N if min_sup is None else min_sup
    s = float(np.exp(rng.uniform(np.log(low), 0.0)))
    kind = kind or TAU_KINDS[int(rng.integers(len(TAU_KINDS)))]
    sign = rng.choice([-1.0, 1.0])
    if kind == "constant":
        return DeformationField(Constant(sign * s))
    if kind == "clamped_affine":
        v0, v1 = sign * s, rng.uniform(-s, s)
        if rng.uniform() < 0.5:
            v0, v1 = v1, v0
        return DeformationField(ClampedAffine(v1 - v0, v0))
    if kind == "sinusoid":
        amp = s * rng.uniform(0.2, 1.0)
        wave = Sinusoid(amp, rng.uniform(0.5, 4.0 * np.pi), rng.uniform(0, 2 * np.pi))
        return DeformationField(Sum((wave, Constant(sign * (s - amp)))))
    raise ValueError(f"unknown deformation kind {kind!r}")
