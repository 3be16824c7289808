import math

import numpy as np
import pytest

from hypflow.flows import FlowSpec, run
from hypflow.geometry import (GeometryError, RadialGraph, compute_fields, min_mean_curvature,
                              newton_maclaurin_gap, rho_h_expansion, umbilicity_defect)
from hypflow.grid import make_grid, quadrature, unit_sphere_area
from hypflow.shapes import ShapeSpec, build


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_centred_sphere_fields(n, r):
    g = make_grid(n, 128)
    f = compute_fields(RadialGraph(g, np.full(128, r)))
    coth = 1 / math.tanh(r)
    np.testing.assert_allclose(f.kappa_rad, coth, rtol=1e-13)
    np.testing.assert_allclose(f.kappa_ang, coth, rtol=1e-13)
    np.testing.assert_allclose(f.H, (n - 1) * coth, rtol=1e-13)
    np.testing.assert_allclose(f.p, -math.sinh(r), rtol=1e-13)
    np.testing.assert_array_equal(f.W, 1.0)
    np.testing.assert_allclose(f.sigma2, 0.5 * (n - 1) * (n - 2) * coth ** 2, rtol=1e-13)
    area = quadrature(g, f.dSigma)
    assert area == pytest.approx(unit_sphere_area(n - 1) * math.sinh(r) ** (n - 1), rel=1e-12)


def test_offcentre_sphere_is_umbilic():
    g = make_grid(3, 256)
    f = compute_fields(build(ShapeSpec.offcenter(0.3, 1.0), g))
    k = 1 / math.tanh(1.0)
    assert np.max(np.abs(f.kappa_rad - k)) < 1e-6
    assert np.max(np.abs(f.kappa_ang - k)) < 1e-6


def test_umbilicity_fourth_order():
    defects = [umbilicity_defect(compute_fields(build(ShapeSpec.offcenter(0.3, 1.0), make_grid(3, m))))
               for m in (64, 128, 256)]
    orders = [math.log2(a / b) for a, b in zip(defects, defects[1:])]
    assert min(orders) > 3.8


def test_min_mean_curvature_examples():
    g = make_grid(3, 64)
    assert min_mean_curvature(compute_fields(RadialGraph(g, np.ones(64)))) == pytest.approx(
        2 / math.tanh(1), rel=1e-13)
    big = min_mean_curvature(compute_fields(RadialGraph(g, np.full(64, 15.0))))
    assert big == pytest.approx(2.0, rel=1e-12)
    pert = compute_fields(build(ShapeSpec.perturbed(1.0, 0.05, 2), make_grid(3, 256)))
    assert min_mean_curvature(pert) > 0


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
def test_invalid_radial_function_reports_node(bad):
    g = make_grid(3, 32)
    u = np.ones(32)
    u[7] = bad
    with pytest.raises(GeometryError) as err:
        RadialGraph(g, u)
    assert err.value.index == 7


def test_wrong_length_rejected():
    with pytest.raises((GeometryError, ValueError)):
        RadialGraph(make_grid(3, 32), np.ones(33))


@pytest.mark.parametrize("spec", [ShapeSpec.perturbed(1.0, 0.05, 2), ShapeSpec.perturbed(0.7, 0.1, 3),
                                  ShapeSpec.offcenter(0.3, 1.0), ShapeSpec.centered(1.5)])
@pytest.mark.parametrize("n", [3, 4, 5])
def test_pointwise_invariants(spec, n):
    f = compute_fields(build(spec, make_grid(n, 128)))
    assert np.all(f.W >= 1)
    assert np.all(f.p <= 0)
    np.testing.assert_allclose(f.H, f.kappa_rad + (n - 2) * f.kappa_ang, rtol=1e-14)
    # Cauchy-Schwarz and Newton-MacLaurin
    assert np.all((n - 1) * f.norm_a2 - f.H ** 2 >= -1e-10 * f.H ** 2)
    assert np.all(newton_maclaurin_gap(f) >= -1e-10 * f.H ** 2)
    np.testing.assert_allclose(f.rho - f.rho_dot, np.exp(-np.arccosh(f.rho)), rtol=1e-12)


def test_newton_maclaurin_equality_only_at_umbilic_points():
    f = compute_fields(build(ShapeSpec.perturbed(1.0, 0.05, 2), make_grid(3, 256)))
    gap = newton_maclaurin_gap(f)
    # n = 3: gap = (kappa_rad - kappa_ang)^2 / 2
    np.testing.assert_allclose(gap, 0.5 * (f.kappa_rad - f.kappa_ang) ** 2, atol=1e-10)


def test_v_is_log_tanh_half():
    g = make_grid(3, 64)
    u = 1 + 0.1 * np.cos(g.phi)
    f = compute_fields(RadialGraph(g, u))
    np.testing.assert_allclose(f.v, np.log(np.tanh(u / 2)), rtol=1e-14)
    np.testing.assert_allclose(f.dv, g.d_dphi(u) / np.sinh(u), rtol=1e-13)


def test_late_time_expansion_of_rho_h():
    n, m = 3, 64
    g = make_grid(n, m)
    trace = run(build(ShapeSpec.perturbed(1.0, 0.05, 2), g), FlowSpec("imcf", 8.0, record_every=1.0))
    scaled = []
    for row in trace.rows:
        if row.t < 3:
            continue
        f = compute_fields(RadialGraph(g, row.u))
        d = np.max(np.abs(f.rho * f.H - rho_h_expansion(f)))
        scaled.append(d * math.exp(3 * row.t / (n - 1)))
    # O(exp(-3t/(n-1))): the rescaled gap stays bounded (here it settles)
    assert max(scaled) < 1.5 * min(scaled)


def test_fields_are_read_only():
    f = compute_fields(RadialGraph(make_grid(3, 32), np.ones(32)))
    with pytest.raises(ValueError):
        f.H[0] = 0.0
