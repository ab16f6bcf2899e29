import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfex.cartoon import (
    Affine,
    CartoonSpec,
    ClampedAffine,
    Constant,
    DeformationField,
    Sinusoid,
    Sum,
    ZERO,
    deform,
    deformation_bound,
    deformation_error,
    grid_endpoint_instance,
    grid_points_hit,
    indicator_bound,
    lipschitz_part_bound,
    primitive_from_dict,
    random_cartoon,
    random_deformation,
    random_intervals,
    sample_cartoon,
)
from dfex.errors import ConfigError, GridEndpointError, PreconditionError

ONE = Constant(1.0)


def indicator(a, b, K=1.0):
    return CartoonSpec(ZERO, ONE, ((a, b),), K)


def test_indicator_sampling():
    eps = 1e-3 * math.sqrt(2)
    sc = sample_cartoon(indicator(0.24 + eps, 0.74 + eps), 100)
    assert sc.signal.sum() == 50 and set(np.unique(sc.signal.real)) == {0.0, 1.0}


def test_affine_sampling():
    spec = CartoonSpec(Affine(1.0), ZERO, ((0.1, 0.2),), 1.0)
    np.testing.assert_allclose(sample_cartoon(spec, 4).signal, [0, 0.25, 0.5, 0.75])


def test_grid_endpoint_rejected():
    with pytest.raises(GridEndpointError):
        sample_cartoon(indicator(0.25, 0.6), 4)
    with pytest.raises(GridEndpointError):
        sample_cartoon(indicator(0.0, 0.6), 8)
    assert not sample_cartoon(indicator(0.25, 0.6), 4, allow_grid_endpoints=True).in_class
    # 1.0 is not a sampling point
    assert sample_cartoon(indicator(0.3, 1.0), 4).in_class


def test_spec_validation():
    with pytest.raises(PreconditionError):
        CartoonSpec(Affine(2.0), ZERO, ((0.1, 0.2),), 1.0)
    with pytest.raises(PreconditionError):
        CartoonSpec(ZERO, Constant(1.5), ((0.1, 0.2),), 1.0)
    with pytest.raises(PreconditionError):
        # sup over [-2, 2], not just [0, 1]
        CartoonSpec(ZERO, Affine(0.5), ((0.1, 0.2),), 0.9)
    with pytest.raises(PreconditionError):
        CartoonSpec(ZERO, ONE, ((0.3, 0.2),), 1.0)
    with pytest.raises(PreconditionError):
        CartoonSpec(ZERO, ONE, ((0.1, 0.4), (0.3, 0.5)), 1.0)
    with pytest.raises(PreconditionError):
        CartoonSpec(ZERO, ONE, ((0.1, 1.2),), 1.0)
    with pytest.raises(PreconditionError):
        sample_cartoon(indicator(0.1, 0.3), 1)


def test_primitive_constants():
    s = Sum((Affine(-0.5, 0.2), Sinusoid(0.3, 2.0, 1.0)))
    assert s.lipschitz == pytest.approx(0.5 + 0.6)
    assert s.sup_on(-2, 2) == pytest.approx(1.2 + 0.3)
    c = ClampedAffine(0.4, -0.1)
    assert c.sup == pytest.approx(0.3) and c.lipschitz == pytest.approx(0.4)
    np.testing.assert_allclose(c(np.array([-1.0, 0.5, 3.0])), [-0.1, 0.1, 0.3])


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 20), st.floats(0, 6))
def test_certified_constants_bound_samples(slope, amp, freq, phase):
    f = Sum((Affine(slope, 0.5), Sinusoid(amp, freq, phase)))
    x = np.linspace(-2, 2, 4001)
    y = f(x)
    assert np.max(np.abs(np.diff(y)) / np.diff(x)) <= f.lipschitz * (1 + 1e-9) + 1e-12
    assert np.max(np.abs(y)) <= f.sup_on(-2, 2) * (1 + 1e-12) + 1e-12


def test_deform_examples():
    sc = sample_cartoon(indicator(0.2 + 1e-4, 0.6 + 1e-4), 32)
    np.testing.assert_array_equal(deform(sc, DeformationField.constant(0.0)), sc.signal)
    assert deformation_error(sc, DeformationField.constant(0.0)) == 0
    spec = CartoonSpec(Affine(1.0), ZERO, ((0.1, 0.2),), 1.0)
    sc = sample_cartoon(spec, 8)
    np.testing.assert_allclose(deform(sc, DeformationField.constant(0.3)), sc.signal - 0.3, atol=1e-15)


def test_constant_shift_resamples_translated_function():
    spec = CartoonSpec(Sinusoid(0.5, 1.0), Constant(0.7), ((0.3 + 1e-5, 0.55 + 1e-5),), 1.0)
    sc = sample_cartoon(spec, 64)
    t = 0.137
    x = np.arange(64) / 64
    np.testing.assert_array_equal(deform(sc, DeformationField.constant(t)), spec(x - t))


@pytest.mark.parametrize("N", [4, 8, 16, 64, 100])
def test_grid_endpoint_instance(N):
    sc, tau = grid_endpoint_instance(N)
    assert not sc.in_class
    err = deformation_error(sc, tau)
    assert abs(err - math.sqrt(2)) <= 1e-12
    with pytest.raises(GridEndpointError):
        deformation_bound(sc, tau)


def test_bound_formulas():
    sc = sample_cartoon(indicator(0.3 + 1e-4, 0.7 + 1e-4), 100)
    tau = DeformationField.constant(0.01)
    assert deformation_bound(sc, tau) == pytest.approx(4.0)
    assert indicator_bound(sc, tau) == pytest.approx(2.0)
    assert deformation_bound(sc, DeformationField.constant(0.0)) == 0.0
    lip = sample_cartoon(CartoonSpec(Affine(0.5), ZERO, ((0.1 + 1e-4, 0.2 + 1e-4),), 1.0), 100)
    assert lipschitz_part_bound(lip, tau) == pytest.approx(0.5 * 10 * 0.01)
    with pytest.raises(PreconditionError):
        lipschitz_part_bound(sc, tau)
    with pytest.raises(PreconditionError):
        indicator_bound(lip, tau)


def test_two_edge_bound_constant():
    spec = CartoonSpec(ZERO, ONE, ((0.1 + 1e-4, 0.3 + 1e-4), (0.5 + 1e-4, 0.8 + 1e-4)), 1.0)
    sc = sample_cartoon(spec, 64)
    tau = DeformationField.constant(0.25)
    assert deformation_bound(sc, tau) == pytest.approx(6 * 8 * 0.5)
    assert indicator_bound(sc, tau) == pytest.approx(4 * 8 * 0.5)


def test_deformation_field_sup_norm():
    with pytest.raises(PreconditionError):
        DeformationField.constant(1.5)
    with pytest.raises(PreconditionError):
        DeformationField(ClampedAffine(1.5, -0.2))
    assert DeformationField(Sum((Sinusoid(0.4, 3.0), Constant(0.5)))).sup_norm == pytest.approx(0.9)


@pytest.mark.parametrize("N", [64, 256])
def test_proposition_bound_on_random_instances(N):
    for t in range(200):
        rng = np.random.default_rng([N, t])
        K = (0.5, 1.0, 2.0)[t % 3]
        sc = random_cartoon(rng, N, K)
        tau = random_deformation(rng, N)
        assert sc.spec.K == K
        assert deformation_error(sc, tau) <= deformation_bound(sc, tau) + 1e-12


@pytest.mark.parametrize("kind, bound", [("lipschitz", lipschitz_part_bound), ("indicator", indicator_bound)])
def test_lemma_bounds_on_random_instances(kind, bound):
    for t in range(100):
        rng = np.random.default_rng([11, t])
        N = (64, 256)[t % 2]
        sc = random_cartoon(rng, N, 1.0, kind=kind)
        tau = random_deformation(rng, N)
        assert deformation_error(sc, tau) <= bound(sc, tau) * (1 + 1e-9) + 1e-12


@given(st.integers(8, 512), st.integers(0, 2**32 - 1))
def test_generated_cartoons_are_in_class(N, seed):
    rng = np.random.default_rng(seed)
    sc = random_cartoon(rng, N, 1.5, edges=int(rng.integers(1, 3)))
    assert sc.in_class
    for a, b in sc.spec.intervals:
        assert not grid_points_hit(a, N) and not grid_points_hit(b, N)
    tau = random_deformation(rng, N)
    assert 1.0 / N * (1 - 1e-12) <= tau.sup_norm <= 1.0


def test_generator_nudges_grid_points():
    class Stub:
        def uniform(self, lo, hi, size):
            return np.array([0.25, 0.75])

    (a, b), = random_intervals(Stub(), 8)
    assert not grid_points_hit(a, 8) and not grid_points_hit(b, 8)
    assert abs(a - 0.25) < 1e-3 and abs(b - 0.75) < 1e-3


def test_json_round_trip():
    rng = np.random.default_rng(3)
    sc = random_cartoon(rng, 64, 2.0)
    doc = json.loads(json.dumps(sc.spec.to_dict()))
    spec = CartoonSpec.from_dict(doc)
    assert spec == sc.spec
    tau = random_deformation(rng, 64, kind="sinusoid")
    assert DeformationField.from_dict(json.loads(json.dumps(tau.to_dict()))) == tau
    with pytest.raises(ConfigError):
        primitive_from_dict({"kind": "spline"})


def test_indicator_lemma_fails_below_one_grid_step():
    # An edge just left of a grid point is crossed by a displacement far smaller
    # than 1/N; the square-root bound then undershoots, which is why the random
    # deformations keep ||tau|| >= 1/N.
    N, t = 64, 1e-3
    sc = sample_cartoon(indicator(0.5 - 5e-4, 0.75 - 5e-4), N)
    tau = DeformationField.constant(t)
    assert sc.in_class
    assert deformation_error(sc, tau) == pytest.approx(math.sqrt(2))
    assert indicator_bound(sc, tau) == pytest.approx(2 * math.sqrt(N * t))
    assert deformation_error(sc, tau) > indicator_bound(sc, tau)
    assert deformation_error(sc, tau) > deformation_bound(sc, tau)
