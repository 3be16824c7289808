import math

import numpy as np
import pytest

from hypflow.functionals import evaluate
from hypflow.geometry import compute_fields
from hypflow.grid import DomainError, make_grid, unit_sphere_area
from hypflow.shapes import (MeanConvexityError, ShapeError, ShapeSpec, build, offcenter_radius,
                            sphere_closed_forms)


def _closed_form_offcenter(d, R, c):
    a, b, cc = math.cosh(d), math.sinh(d) * c, math.cosh(R)
    return np.log((cc + np.sqrt(cc * cc - (a * a - b * b))) / (a - b))


def test_centred_is_constant():
    g = make_grid(3, 32)
    np.testing.assert_array_equal(build(ShapeSpec.centered(1.0), g).u, 1.0)


def test_offcentre_with_zero_shift_is_centred():
    g = make_grid(3, 64)
    np.testing.assert_allclose(build(ShapeSpec.offcenter(0.0, 1.0), g).u, 1.0, atol=1e-12)
    np.testing.assert_allclose(offcenter_radius(0.0, 1.0, np.cos(g.phi)), 1.0, atol=1e-12)


def test_offcentre_pole_limit():
    g = make_grid(3, 1024)
    u = build(ShapeSpec.offcenter(0.3, 1.0), g).u
    assert u[0] == pytest.approx(1.3, abs=1e-5)
    assert u[-1] == pytest.approx(0.7, abs=1e-5)
    assert offcenter_radius(0.3, 1.0, np.array([1.0]))[0] == pytest.approx(1.3, abs=1e-13)


@pytest.mark.parametrize("d, R", [(0.3, 1.0), (0.03, 1.0), (1.5, 2.0), (0.9, 1.0)])
def test_offcentre_matches_closed_form(d, R):
    c = np.cos(np.linspace(0, math.pi, 257))
    np.testing.assert_allclose(offcenter_radius(d, R, c), _closed_form_offcenter(d, R, c), atol=2e-15)


def test_perturbed_profile():
    g = make_grid(3, 64)
    u = build(ShapeSpec.perturbed(1.0, 0.05, 2), g).u
    np.testing.assert_allclose(u, 1 + 0.05 * 0.5 * (3 * np.cos(g.phi) ** 2 - 1), rtol=1e-14)


def test_perturbed_mean_convexity_failure_carries_min_h():
    with pytest.raises(MeanConvexityError) as err:
        build(ShapeSpec.perturbed(0.3, 0.25, 6), make_grid(3, 256))
    assert err.value.min_h < 0


def test_perturbed_nonpositive_radius_rejected():
    with pytest.raises(MeanConvexityError):
        build(ShapeSpec.perturbed(0.1, 0.5, 2), make_grid(3, 64))


@pytest.mark.parametrize("kwargs", [
    dict(variant="centered_sphere", r=0.0),
    dict(variant="centered_sphere"),
    dict(variant="offcenter_sphere", d=1.0, R=1.0),
    dict(variant="offcenter_sphere", d=-0.1, R=1.0),
    dict(variant="perturbed_sphere", r=1.0, eps=0.1, l=1.5),
    dict(variant="ellipsoid", r=1.0),
])
def test_invalid_specs(kwargs):
    with pytest.raises(ShapeError):
        ShapeSpec(**kwargs)


def test_from_dict_roundtrip_and_unknown_keys():
    spec = ShapeSpec.from_dict({"variant": "perturbed_sphere", "r": 1.0, "eps": 0.05, "l": 2})
    assert spec == ShapeSpec.perturbed(1.0, 0.05, 2)
    assert ShapeSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ShapeError):
        ShapeSpec.from_dict({"variant": "centered_sphere", "r": 1.0, "radius": 2.0})


def test_closed_forms_n3_r1():
    cf = sphere_closed_forms(1.0, 3)
    assert cf.A == pytest.approx(4 * math.pi * math.sinh(1) ** 2, rel=1e-15)
    assert cf.A == pytest.approx(17.35539, abs=1e-5)
    assert cf.L == pytest.approx(8 * math.pi, rel=1e-15)


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_closed_forms_against_numerics(n, r):
    cf = sphere_closed_forms(r, n)
    w = unit_sphere_area(n - 1)
    assert cf.L == pytest.approx((n - 1) * w, rel=1e-14)
    assert cf.I - (n - 1) * cf.J == pytest.approx((n - 1) * w * math.sinh(r) ** (n - 2), rel=1e-12)
    rep = evaluate(compute_fields(build(ShapeSpec.centered(r), make_grid(n, 128))))
    for name in ("A", "I", "J", "L", "M"):
        assert getattr(rep, name) == pytest.approx(getattr(cf, name), rel=1e-12)
    assert rep.Kq == pytest.approx(cf.K, rel=1e-12)


def test_closed_forms_reject_nonpositive_radius():
    with pytest.raises(DomainError):
        sphere_closed_forms(0.0, 3)
