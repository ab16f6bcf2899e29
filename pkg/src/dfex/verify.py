"""Seeded randomized suites that check the network's proven inequalities end to end.

Every suite draws trial ``t`` from ``numpy.random.default_rng([seed, t])``, so
a trial can be recomputed in isolation and the report does not depend on
the order trials are evaluated in.

Slack policy for proven inequalities: ``lhs <= rhs * (1 + 1e-9) + 1e-12``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .cartoon import (
    DeformationField,
    GridEndpointError,
    deform,
    deformation_bound,
    grid_endpoint_instance,
    random_cartoon,
    random_deformation,
)
from .errors import InadmissibleError, PreconditionError
from .network import ModuleSequence, check_admissibility, extract, local_lipschitz
from .signal import l2, random_signal, translate

REL_SLACK = 1e-9
ABS_SLACK = 1e-12
COVARIANCE_TOL = 1e-12
SHRINK = 1e-3

SLACK_POLICY = {"relative": REL_SLACK, "absolute": ABS_SLACK}


def holds(lhs: float, rhs: float) -> bool:
    return lhs <= rhs * (1.0 + REL_SLACK) + ABS_SLACK


def digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()[:16]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


@dataclass
class Violation:
    trial: int
    check: str
    digest: str
    lhs: float
    rhs: float
    slack: float


@dataclass
class CheckStats:
    evaluated: int = 0
    tightest_ratio: float = 0.0
    tightest_trial: Optional[int] = None
    # lhs/rhs of the tightest trial; used by the shrunk-bound control
    tightest_lhs: float = 0.0
    tightest_rhs: float = 0.0


@dataclass
class VerificationReport:
    suite: str
    seed: int
    trials: int
    violations: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)
    negative_control: dict = field(default_factory=dict)
    slack: dict = field(default_factory=lambda: dict(SLACK_POLICY))
    notes: list = field(default_factory=list)

    @property
    def tightest_ratio(self) -> float:
        return max((c.tightest_ratio for c in self.checks.values()), default=0.0)

    @property
    def passed(self) -> bool:
        return not self.violations and all(self.negative_control.values())

    def record(self, trial: int, check: str, lhs: float, rhs: float, inputs=(), ok: Optional[bool] = None) -> bool:
        lhs, rhs = float(lhs), float(rhs)
        ok = holds(lhs, rhs) if ok is None else ok
        stats = self.checks.setdefault(check, CheckStats())
        stats.evaluated += 1
        if rhs > 0:
            ratio = lhs / rhs
        else:
            ratio = 0.0 if lhs == 0 else math.inf
        if stats.tightest_trial is None or ratio > stats.tightest_ratio:
            stats.tightest_ratio, stats.tightest_trial = ratio, trial
            stats.tightest_lhs, stats.tightest_rhs = lhs, rhs
        if not ok:
            self.violations.append(Violation(trial, check, digest(*inputs), lhs, rhs, rhs * REL_SLACK + ABS_SLACK))
        return ok

    def shrunk_bound_control(self, checks=None) -> None:
        """The tightest trial of each check must fail once its bound is shrunk by 1e-3.

        A suite whose inequalities would also pass against a bound a thousand
        times smaller is not testing anything.
        """
        names = [c for c in (checks or self.checks) if c in self.checks]
        for name in names:
            s = self.checks[name]
            if s.tightest_rhs > 0 and s.tightest_lhs > 0:
                self.negative_control[f"shrunk_bound:{name}"] = not holds(s.tightest_lhs, SHRINK * s.tightest_rhs)

    def to_dict(self) -> dict:
        doc = {
            "suite": self.suite,
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "tightest_ratio": self.tightest_ratio,
            "violations": [asdict(v) for v in self.violations],
            "checks": {k: asdict(v) for k, v in self.checks.items()},
            "skipped": list(self.skipped),
            "negative_control": dict(self.negative_control),
            "slack": dict(self.slack),
            "notes": list(self.notes),
        }
        return _finite(doc)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _finite(obj):
    # JSON has no infinity; keep reports strictly valid
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


# ---------------------------------------------------------------------------
# preconditions and negative controls


def require_admissible(omega: ModuleSequence) -> None:
    values, ok = check_admissibility(omega)
    if not ok:
        worst = max(range(len(values)), key=values.__getitem__)
        raise InadmissibleError(
            f"module {worst + 1} has max{{B, B R^2 L^2}} = {values[worst]:.6g} > 1; "
            "normalize the filter banks first"
        )


def inflate(omega: ModuleSequence, target: float = 4.0) -> ModuleSequence:
    """The same sequence with every bank rescaled so that ``B = target``."""
    from .network import Module

    modules = [Module(m.bank.scaled(math.sqrt(target / m.B)), m.rho, m.pooling) for m in omega.modules]
    return ModuleSequence(modules, omega.strict_scale_order)


def _inadmissible_control(omega: ModuleSequence) -> bool:
    try:
        require_admissible(inflate(omega))
    except InadmissibleError:
        return True
    return False


def _pair(rng, omega: ModuleSequence):
    f = random_signal(rng, omega.input_length, omega.dims)
    h = random_signal(rng, omega.input_length, omega.dims)
    return f, h


# ---------------------------------------------------------------------------
# suites


def check_global(omega: ModuleSequence, trials: int = 100, seed: int = 0, pruning: str = "full") -> VerificationReport:
    """Lipschitz-1, energy and additive-noise bounds of the full feature vector.

    Trial 0 uses ``h = f``.  The energy check is skipped when some layer
    before the last has ``rho(0) != 0`` or ``P(0) != 0``.
    """
    require_admissible(omega)
    report = VerificationReport("global", seed, trials)
    report.negative_control["inadmissible_rejected"] = _inadmissible_control(omega)
    energy = omega.zero_preserving_up_to(omega.depth - 1)
    if not energy and trials:
        report.skipped.append("energy: a non-linearity or pooling operator does not map 0 to 0")
    for t in range(trials):
        rng = trial_rng(seed, t)
        f, h = _pair(rng, omega)
        if t == 0:
            h = f.copy()
        pf, ph = extract(omega, f, pruning), extract(omega, h, pruning)
        report.record(t, "lipschitz", (pf - ph).norm(), l2(f - h), (f, h))
        if energy:
            report.record(t, "energy", pf.norm(), l2(f), (f,))
        eta = random_signal(rng, omega.input_length, omega.dims) * rng.uniform(1e-3, 1.0)
        report.record(t, "noise", (extract(omega, f + eta, pruning) - pf).norm(), l2(eta), (f, eta))
    report.shrunk_bound_control(["lipschitz", "energy"])
    return report


def _grid_control() -> bool:
    """The boundary-point instance must be refused by the deformation bound."""
    sc, tau = grid_endpoint_instance(16)
    try:
        deformation_bound(sc, tau)
    except GridEndpointError:
        return True
    return False


def check_deformation(
    omega: ModuleSequence,
    trials: int = 100,
    seed: int = 0,
    variations=(0.5, 1.0, 2.0),
    pruning: str = "full",
) -> VerificationReport:
    """Deformation sensitivity of sampled cartoons, in signal and feature space.

    Every trial checks ``||f - F_tau f|| <= 4 K sqrt(N) sqrt(||tau||)`` and the
    same bound for ``|||Phi(F_tau f) - Phi(f)|||``, then repeats the feature
    check with a constant shift ``tau = t``.  ``K`` cycles through
    ``variations``.
    """
    require_admissible(omega)
    report = VerificationReport("deformation", seed, trials)
    if omega.dims != 1:
        report.skipped.append("deformation: cartoon functions are 1-D only")
        return report
    report.negative_control["inadmissible_rejected"] = _inadmissible_control(omega)
    report.negative_control["grid_endpoints_rejected"] = _grid_control()
    N = omega.input_length
    for t in range(trials):
        rng = trial_rng(seed, t)
        K = float(variations[t % len(variations)])
        sc = random_cartoon(rng, N, K)
        tau = DeformationField.constant(0.0) if t == 0 else random_deformation(rng, N)
        f, g = sc.signal, deform(sc, tau)
        bound = deformation_bound(sc, tau)
        report.record(t, "signal", l2(f - g), bound, (f, g))
        pf = extract(omega, f, pruning)
        report.record(t, "features", (extract(omega, g, pruning) - pf).norm(), bound, (f, g))
        shift = random_deformation(rng, N, kind="constant")
        gs = deform(sc, shift)
        report.record(t, "translation", (extract(omega, gs, pruning) - pf).norm(), deformation_bound(sc, shift), (f, gs))
    report.shrunk_bound_control(["signal", "features"])
    return report


def check_local(
    omega: ModuleSequence,
    d: int,
    trials: int = 100,
    seed: int = 0,
    pruning: str = "full",
) -> VerificationReport:
    """Per-layer Lipschitz, energy and deformation bounds with the constant ``L^d``.

    Also checks the recursion between ``L^d`` and ``L^{d-1}`` and the
    consequence that ``L^d < L^{d-1}`` whenever the per-layer factor is
    below one.  Admissibility is not assumed.
    """
    if not omega.contributes(d):
        raise PreconditionError(f"layer {d} does not contribute (no output atom)")
    report = VerificationReport(f"local[{d}]", seed, trials)
    Ld = local_lipschitz(omega, d)
    report.notes.append(f"L^{d} = {Ld!r}")
    _recursion_checks(report, omega, d, Ld)
    energy = omega.zero_preserving_up_to(d)
    if not energy and trials:
        report.skipped.append("energy: a non-linearity or pooling operator does not map 0 to 0")
    cartoons = omega.dims == 1
    if not cartoons and trials:
        report.skipped.append("deformation: cartoon functions are 1-D only")
    N = omega.input_length
    for t in range(trials):
        rng = trial_rng(seed, t)
        f, h = _pair(rng, omega)
        pf = extract(omega, f, pruning)
        report.record(t, "lipschitz", (pf - extract(omega, h, pruning)).layer_norm(d), Ld * l2(f - h), (f, h))
        if energy:
            report.record(t, "energy", pf.layer_norm(d), Ld * l2(f), (f,))
        if cartoons:
            sc = random_cartoon(rng, N, K=float(rng.choice([0.5, 1.0, 2.0])))
            tau = random_deformation(rng, N)
            g = deform(sc, tau)
            lhs = (extract(omega, g, pruning) - extract(omega, sc.signal, pruning)).layer_norm(d)
            report.record(t, "deformation", lhs, Ld * deformation_bound(sc, tau), (sc.signal, g))
    report.shrunk_bound_control(["lipschitz", "energy"])
    return report


def _recursion_checks(report: VerificationReport, omega: ModuleSequence, d: int, Ld: float) -> None:
    if d == 0 or not omega.contributes(d - 1):
        return
    chi_prev = float(np.abs(omega.output_atom(d - 1)).sum())
    chi = float(np.abs(omega.output_atom(d)).sum())
    if chi_prev == 0:
        return
    m = omega.modules[d - 1]
    factor = chi * math.sqrt(m.B) * m.L * m.R
    Lprev = local_lipschitz(omega, d - 1)
    predicted = factor / chi_prev * Lprev
    diff = abs(Ld - predicted)
    report.record(-1, "recursion", diff, 1e-12 * max(1.0, abs(Ld)), ok=diff <= 1e-12 * max(1.0, abs(Ld)))
    if factor < chi_prev:
        report.record(-1, "vertical_decrease", Ld, Lprev, ok=Ld < Lprev)


def check_translation_covariance(
    omega: ModuleSequence,
    trials: int = 20,
    seed: int = 0,
    pruning: str = "full",
) -> VerificationReport:
    """``Phi^d(T_m f) == T_{m / (S_1...S_d)} Phi^d(f)`` element-wise to 1e-12.

    In 1-D every shift ``0 <= m < N`` is tried; layer ``d`` is compared when
    ``S_1 * ... * S_d`` divides ``m``.  In 2-D the shifts are ``(m, 0)`` and
    ``(m, 3m mod N)``.
    """
    report = VerificationReport("covariance", seed, trials)
    report.slack = {"absolute_elementwise": COVARIANCE_TOL}
    N = omega.input_length
    steps = [1]
    for m in omega.modules:
        steps.append(steps[-1] * m.pooling.S)
    layers = [d for d in range(omega.depth) if omega.contributes(d)]
    if omega.dims == 1:
        shifts = [(m,) for m in range(N)]
    else:
        shifts = [(m, 0) for m in range(N)] + [(m, (3 * m) % N) for m in range(1, N)]
    wrong_shift_caught = None
    for t in range(trials):
        f = random_signal(trial_rng(seed, t), N, omega.dims)
        base = extract(omega, f, pruning)
        for m in shifts:
            valid = [d for d in layers if all(x % steps[d] == 0 for x in m)]
            if not valid:
                continue
            moved = extract(omega, translate(f, m if omega.dims == 2 else m[0]), pruning)
            for d in valid:
                coarse = tuple(x // steps[d] for x in m)
                coarse = coarse if omega.dims == 2 else coarse[0]
                err = max(
                    (float(np.max(np.abs(moved.layers[d][q] - translate(v, coarse)))) for q, v in base.layers[d].items()),
                    default=0.0,
                )
                report.record(t, f"layer{d}", err, COVARIANCE_TOL, (f,), ok=err <= COVARIANCE_TOL)
                if wrong_shift_caught is None and any(coarse if omega.dims == 2 else (coarse,)):
                    wrong_shift_caught = _wrong_shift_detected(base.layers[d], moved.layers[d], coarse)
    if wrong_shift_caught is not None:
        report.negative_control["wrong_shift_detected"] = wrong_shift_caught
    return report


def _wrong_shift_detected(base: dict, moved: dict, coarse) -> bool:
    """Comparing against an unshifted reference must produce a mismatch."""
    for q, v in base.items():
        if np.max(np.abs(moved[q] - v)) > COVARIANCE_TOL:
            return True
    # every output was invariant under this shift (e.g. constant maps); nothing to detect
    return all(np.max(np.abs(v - translate(v, coarse))) <= COVARIANCE_TOL for v in base.values())


SUITES = ("global", "deformation", "local", "covariance")


def run_suites(
    omega: ModuleSequence,
    suite: str = "all",
    trials: int = 100,
    seed: int = 0,
    pruning: str = "full",
) -> list[VerificationReport]:
    """Run one suite, or every suite (``"all"``); ``local`` runs once per contributing layer."""
    names = SUITES if suite == "all" else (suite,)
    reports = []
    for name in names:
        if name == "global":
            reports.append(check_global(omega, trials, seed, pruning))
        elif name == "deformation":
            reports.append(check_deformation(omega, trials, seed, pruning=pruning))
        elif name == "local":
            for d in range(omega.depth):
                if omega.contributes(d):
                    reports.append(check_local(omega, d, trials, seed, pruning))
        elif name == "covariance":
            reports.append(check_translation_covariance(omega, trials, seed, pruning))
        else:
            raise PreconditionError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    return reports
