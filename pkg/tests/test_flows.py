import math

import numpy as np
import pytest

from hypflow.flows import (FlowError, FlowKind, FlowSpec, asymptotics_report, audit_step,
                           brendle_sphere_radius, gudermannian, imcf_sphere_radius, run, speed, stable_dt,
                           step)
from hypflow.functionals import evaluate
from hypflow.geometry import RadialGraph, compute_fields
from hypflow.grid import make_grid, unit_sphere_area
from hypflow.shapes import ShapeSpec, build


def sphere(n=3, m=64, r=1.0):
    return RadialGraph(make_grid(n, m), np.full(m, r))


def test_gudermannian():
    assert gudermannian(1.0) == pytest.approx(0.86576948324, abs=1e-10)
    assert gudermannian(0.0) == 0.0


@pytest.mark.parametrize("n", [3, 4, 5])
def test_closed_form_sphere_solutions_solve_their_odes(n):
    t = np.linspace(0, 2, 5)
    h = 1e-6
    u = imcf_sphere_radius(0.7, t, n)
    du = (imcf_sphere_radius(0.7, t + h, n) - imcf_sphere_radius(0.7, t - h, n)) / (2 * h)
    np.testing.assert_allclose(du, np.tanh(u) / (n - 1), rtol=1e-7)
    tb = np.linspace(0, 0.5, 5)
    ub = brendle_sphere_radius(1.0, tb)
    dub = (brendle_sphere_radius(1.0, tb + h) - brendle_sphere_radius(1.0, tb - h)) / (2 * h)
    np.testing.assert_allclose(dub, -np.cosh(ub), rtol=1e-7)


def test_speed_on_spheres():
    g = sphere(4, 32, 1.2)
    np.testing.assert_allclose(speed(g, "imcf"), math.tanh(1.2) / 3, rtol=1e-13)
    np.testing.assert_allclose(speed(g, "brendle"), -math.cosh(1.2), rtol=1e-13)


def test_zero_step_is_identity():
    g = build(ShapeSpec.perturbed(1.0, 0.05, 2), make_grid(3, 64))
    for kind in FlowKind:
        assert step(g, kind, 0.0) is g


@pytest.mark.parametrize("n", [3, 4])
def test_imcf_sphere_oracle(n):
    trace = run(sphere(n, 64), FlowSpec("imcf", 3.0, record_every=0.5))
    for row in trace.rows:
        np.testing.assert_allclose(row.u, imcf_sphere_radius(1.0, row.t, n), atol=1e-8)
    assert trace.times[-1] == pytest.approx(3.0, abs=1e-12)
    assert trace.stop_reason == "t_end"


def test_brendle_sphere_oracle_and_extinction():
    trace = run(sphere(3, 128), FlowSpec("brendle", 2.0, record_every=0.05))
    for row in trace.rows[:10]:
        np.testing.assert_allclose(row.u, brendle_sphere_radius(1.0, row.t), atol=1e-9)
    assert trace.stop_reason in ("extinct", "unresolved")
    assert trace.extinction_estimate() == pytest.approx(gudermannian(1.0), abs=1e-4)
    assert trace.times[-1] < gudermannian(1.0)


def test_area_and_k_laws_on_sphere():
    trace = run(sphere(3, 64), FlowSpec("imcf", 3.0))
    t, A, K = trace.times, trace.column("A"), trace.column("Kq")
    np.testing.assert_allclose(A / A[0], np.exp(t), rtol=1e-6)
    np.testing.assert_allclose(K / K[0], np.exp(1.5 * t), rtol=1e-6)


def _reports(graph, kind, dt):
    before = evaluate(compute_fields(graph))
    after = evaluate(compute_fields(step(graph, kind, dt)))
    return before, after


def test_audit_sphere_step_is_equality():
    g = sphere(3, 128)
    dt = 1e-3
    before, after = _reports(g, "imcf", dt)
    res = audit_step(before, after, dt)
    assert res.passed
    assert abs(res.ratio_increment) < 1e-12
    assert abs(res.L_increment) < 1e-11
    assert abs(res.area_excess) < 1e-12


def test_audit_perturbed_step_strict_ratio_increase():
    g = build(ShapeSpec.perturbed(1.0, 0.05, 2), make_grid(3, 128))
    dt = 1e-3
    before, after = _reports(g, "imcf", dt)
    res = audit_step(before, after, dt)
    assert res.passed
    assert res.ratio_increment > 1e-8


def test_audit_negated_dt_fails_area_law():
    g = build(ShapeSpec.perturbed(1.0, 0.05, 2), make_grid(3, 128))
    before, after = _reports(g, "imcf", 1e-3)
    res = audit_step(before, after, -1e-3)
    assert not res.area
    assert not res.passed


def test_brendle_audit_tracks_hk():
    g = build(ShapeSpec.perturbed(1.0, 0.05, 2), make_grid(3, 128))
    before, after = _reports(g, "brendle", 1e-3)
    res = audit_step(before, after, 1e-3, "brendle")
    assert res.ratio and res.ratio_increment < 0
    swapped = audit_step(after, before, 1e-3, "brendle")
    assert not swapped.ratio


def test_stable_dt_scales_with_h_squared():
    f64 = compute_fields(sphere(3, 64))
    f128 = compute_fields(sphere(3, 128))
    assert stable_dt(f64, "imcf", 0.2) / stable_dt(f128, "imcf", 0.2) == pytest.approx(4.0, rel=1e-12)
    assert stable_dt(f64, "brendle", 0.2) > 0


@pytest.mark.parametrize("kwargs", [dict(t_end=0.0), dict(t_end=1.0, cfl=0.0), dict(t_end=1.0, cfl=0.9),
                                    dict(t_end=1.0, record_every=0.0)])
def test_flow_spec_validation(kwargs):
    with pytest.raises(ValueError):
        FlowSpec("imcf", **kwargs)


def test_flow_kind_parsing():
    assert FlowSpec("brendle", 1.0).kind is FlowKind.BRENDLE
    with pytest.raises(ValueError):
        FlowSpec("mcf", 1.0)


def test_imcf_rejects_non_mean_convex_start():
    g = make_grid(3, 256)
    u = 0.3 + 0.25 * np.cos(6 * g.phi) ** 2
    with pytest.raises(FlowError) as err:
        run(RadialGraph(g, u), FlowSpec("imcf", 1.0))
    assert err.value.index is not None


def test_perturbed_imcf_monotone_and_crossing():
    trace = run(build(ShapeSpec.perturbed(1.0, 0.05, 2), make_grid(3, 64)), FlowSpec("imcf", 2.0))
    log = trace.step_log.arrays()
    assert np.all(np.diff(log["ratio"]) >= -1e-8)
    assert trace.crossing_t0 is not None and 0 < trace.crossing_t0 < 2.0
    # (a) is a diagnostic: at m = 64 the per-step area defect is spatial error, not a law violation
    assert all(trace.audit_failures[k] == 0 for k in ("ratio", "L", "J", "hk"))


def test_asymptotics_needs_long_imcf_trace():
    short = run(sphere(3, 32), FlowSpec("imcf", 1.0))
    with pytest.raises(ValueError):
        asymptotics_report(short)
    brendle = run(sphere(3, 32), FlowSpec("brendle", 0.2))
    with pytest.raises(ValueError):
        asymptotics_report(brendle)


def test_sphere_kappa_rate_matches_closed_form_envelope():
    n = 3
    trace = run(sphere(n, 32), FlowSpec("imcf", 8.0, record_every=0.25))
    rep = asymptotics_report(trace, t_min=3.0)
    t = np.array([r.t for r in trace.rows if r.t >= 3.0 - 1e-12])
    exact = 1 / np.tanh(imcf_sphere_radius(1.0, t, n)) - 1
    exact_rate = np.polyfit(t, np.log(exact), 1)[0]
    assert rep.kappa_rate == pytest.approx(exact_rate, rel=0.05)
    # kappa - 1 ~ 2 exp(-2u) and u ~ t/(n-1)
    assert exact_rate == pytest.approx(-2.0 / (n - 1), rel=0.05)


@pytest.fixture(scope="module")
def perturbed_long_trace():
    return run(build(ShapeSpec.perturbed(1.0, 0.05, 2), make_grid(3, 128)),
               FlowSpec("imcf", 8.0, record_every=0.25))


def test_perturbed_asymptotics(perturbed_long_trace):
    rep = asymptotics_report(perturbed_long_trace, t_min=3.0)
    assert rep.dv_rate == pytest.approx(-0.5, rel=0.10)
    assert rep.L_margin_min >= -1e-3
    assert rep.L_nonincreasing_while_j_le_k
    assert rep.fit_window == (3.0, 8.0)
    d = rep.to_dict()
    assert set(d) >= {"kappa_rate", "dv_rate", "L_margin_final", "limit_profile_range"}


def test_limit_profile_converges(perturbed_long_trace):
    rep = asymptotics_report(perturbed_long_trace)
    # u - t/(n-1) settles: drift over one record interval is tiny late in the run
    assert rep.profile_drift < 1e-3
    assert np.ptp(rep.limit_profile) > 0.01      # and the limit is not a constant


def test_flow_error_carries_trace():
    err = FlowError("boom", t=1.0, index=3, trace="x")
    assert (err.t, err.index, err.trace) == (1.0, 3, "x")
    assert unit_sphere_area(2) == pytest.approx(4 * math.pi)
