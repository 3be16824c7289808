"""Inverse mean curvature flow and the Brendle flow for radial graphs.

A normal flow ``dX/dt = F xi`` (``xi`` the inward unit normal) moves the
radial function by ``du/dt = -F W``.  The inverse mean curvature flow has
``F = -1/H`` and the Brendle flow ``F = rho = cosh u``.

Time stepping is classical RK4 with a parabolic step bound.  After every
inverse-mean-curvature step the monotone quantities are audited; a step
that breaks monotonicity beyond the slack is retried with half the step.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from math import asinh, atan, log, tanh
from typing import List, Optional

import numpy as np

from . import kernels
from .functionals import FunctionalReport, evaluate, monotone_ratio
from .geometry import (GeometryError, GeometryFields, RadialGraph, compute_fields,
                       max_curvature_deviation)
from .grid import unit_sphere_area

log_ = logging.getLogger(__name__)

# multiples of machine epsilon tolerated on differences of large cancelling sums
_ROUNDOFF = 1024


class FlowKind(str, Enum):
    IMCF = "imcf"
    BRENDLE = "brendle"

    @property
    def code(self) -> int:
        return kernels.IMCF if self is FlowKind.IMCF else kernels.BRENDLE


class FlowError(RuntimeError):
    def __init__(self, message, t=None, index=None, trace=None):
        super().__init__(message)
        self.t = t
        self.index = index
        self.trace = trace


def gudermannian(x: float) -> float:
    return 2.0 * atan(tanh(0.5 * x))


def imcf_sphere_radius(r0: float, t, n: int):
    """Exact radius of a centred sphere under the inverse mean curvature flow."""
    return np.arcsinh(np.sinh(r0) * np.exp(np.asarray(t) / (n - 1)))


def brendle_sphere_radius(r0: float, t):
    """Exact radius of a centred sphere under the Brendle flow: ``gd(u) = gd(r0) - t``."""
    s = gudermannian(r0) - np.asarray(t, dtype=float)
    return np.arctanh(np.tan(0.5 * s)) * 2.0


@dataclass(frozen=True)
class FlowSpec:
    kind: FlowKind
    t_end: float
    cfl: float = 0.2
    record_every: float = 0.1
    tol_monotone: float = 1e-8
    tol_hk: float = 1e-7
    max_halvings: int = 20
    extinction_density: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "kind", FlowKind(self.kind))
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.cfl <= 0.5:
            raise ValueError("cfl must lie in (0, 0.5]")
        if not self.record_every > 0:
            raise ValueError("record_every must be positive")


def speed(graph: RadialGraph, kind) -> np.ndarray:
    g = graph.grid
    return kernels.speed(graph.u, FlowKind(kind).code, g.h_step, g.n, g.cot)


def step(graph: RadialGraph, kind, dt: float) -> RadialGraph:
    """Advance the radial function by one RK4 step of size ``dt``."""
    kind = FlowKind(kind)
    if dt == 0:
        return graph
    g = graph.grid
    if kind is FlowKind.IMCF:
        h = compute_fields(graph).H
        if np.min(h) <= 0:
            i = int(np.argmin(h))
            raise FlowError(f"mean curvature not positive at node {i} (H = {h[i]:.4g})", index=i)
    u = kernels.rk4_step(graph.u, dt, kind.code, g.h_step, g.n, g.cot)
    bad = np.flatnonzero(~np.isfinite(u) | (u <= 0))
    if bad.size:
        raise FlowError(f"radial function became invalid at node {int(bad[0])}", index=int(bad[0]))
    return RadialGraph(g, u)


def stable_dt(fields: GeometryFields, kind, cfl: float) -> float:
    h = fields.grid.h_step
    if FlowKind(kind) is FlowKind.IMCF:
        return cfl * h * h * float(np.min(fields.H * fields.rho_dot ** 2))
    # the transport part needs dt <~ h rho_dot / rho once the surface is small
    rho_max = float(np.max(fields.rho))
    return cfl * min(h * h / rho_max, h * float(np.min(fields.rho_dot / fields.rho)))


@dataclass(frozen=True)
class AuditResult:
    area: bool
    ratio: bool
    L: bool
    J: bool
    hk: bool
    area_excess: float
    ratio_increment: float
    L_increment: float
    J_excess: float
    j_le_k: bool

    @property
    def monotone_ok(self) -> bool:
        return self.ratio and self.L and self.J

    @property
    def passed(self) -> bool:
        return self.area and self.ratio and self.L and self.J and self.hk


def audit_step(before: FunctionalReport, after: FunctionalReport, dt: float, kind=FlowKind.IMCF,
               tol: float = 1e-8, tol_hk: float = 1e-7) -> AuditResult:
    """Check one accepted step against the evolution laws and monotonicity.

    (a) ``dlog A = dt``; (b) ``(J-K)/Ac^{n/(n-1)}`` does not decrease;
    (c) ``L`` does not increase while ``J <= K``; (d) ``dJ >= n/(n-1) J dt``;
    (e) Heintze-Karcher deficit nonnegative.  Slacks are ``tol * |dt|``
    times the natural size of each quantity.  For the Brendle flow (b)-(d)
    are replaced by ``d(hk deficit) <= 0`` reported through ``ratio``.
    """
    kind = FlowKind(kind)
    n = before.n
    slack = tol * abs(dt)
    ulp = _ROUNDOFF * np.finfo(float).eps
    hk_ok = bool(after.hk_valid and after.hk_deficit >= -tol_hk * after.A)
    if kind is FlowKind.BRENDLE:
        inc = after.hk_deficit - before.hk_deficit
        floor = ulp * (n - 1) * max(before.J, after.J)
        ok = bool(np.isfinite(inc) and inc <= slack * max(before.A, 1.0) + floor)
        return AuditResult(area=True, ratio=ok, L=True, J=True, hk=hk_ok, area_excess=0.0,
                           ratio_increment=inc, L_increment=0.0, J_excess=0.0, j_le_k=False)
    area_excess = log(after.A / before.A) - dt
    q0, q1 = monotone_ratio(before), monotone_ratio(after)
    q_floor = ulp * (before.J + before.Kq) / before.Ac ** (n / (n - 1))
    L_floor = ulp * (before.I + (n - 1) * before.Kq) / before.Ac ** ((n - 2) / (n - 1))
    ratio_inc = q1 - q0
    j_le_k = before.J <= before.Kq and after.J <= after.Kq
    L_inc = after.L - before.L
    J_excess = (after.J - before.J) - n / (n - 1) * before.J * dt
    return AuditResult(
        area=abs(area_excess) <= slack + ulp,
        ratio=ratio_inc >= -slack * max(1.0, abs(q0)) - q_floor,
        L=(not j_le_k) or L_inc <= slack * max(1.0, abs(before.L)) + L_floor,
        J=J_excess >= -slack * before.J - ulp * after.J,
        hk=hk_ok,
        area_excess=area_excess,
        ratio_increment=ratio_inc,
        L_increment=L_inc,
        J_excess=J_excess,
        j_le_k=j_le_k,
    )


@dataclass(frozen=True)
class FlowRow:
    t: float
    report: FunctionalReport
    kappa_dev: float
    sup_dv: float
    drift: float
    u: np.ndarray = field(repr=False)

    @property
    def minH(self):
        return self.report.minH

    @property
    def maxH(self):
        return self.report.maxH


@dataclass
class StepLog:
    """Per-accepted-step history of the audited scalars."""

    t: List[float] = field(default_factory=list)
    dt: List[float] = field(default_factory=list)
    ratio: List[float] = field(default_factory=list)
    L: List[float] = field(default_factory=list)
    J_minus_K: List[float] = field(default_factory=list)
    hk: List[float] = field(default_factory=list)
    hk_over_A: List[float] = field(default_factory=list)
    log_area: List[float] = field(default_factory=list)

    def append(self, t, dt, rep: FunctionalReport):
        self.t.append(t)
        self.dt.append(dt)
        self.ratio.append(monotone_ratio(rep))
        self.L.append(rep.L)
        self.J_minus_K.append(rep.J - rep.Kq)
        self.hk.append(rep.hk_deficit)
        self.hk_over_A.append(rep.hk_deficit / rep.A)
        self.log_area.append(log(rep.A))

    def arrays(self):
        return {k: np.asarray(v) for k, v in self.__dict__.items()}


@dataclass
class FlowTrace:
    kind: FlowKind
    n: int
    rows: List[FlowRow]
    final_graph: RadialGraph
    crossing_t0: Optional[float] = None
    stop_reason: str = "t_end"
    steps: int = 0
    retries: int = 0
    audit_failures: dict = field(default_factory=dict)
    step_log: StepLog = field(default_factory=StepLog)

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r.report, name) for r in self.rows])

    def extinction_estimate(self, tail: int = 4) -> Optional[float]:
        """Brendle flow only: extrapolate the conformal area radius to zero.

        ``gd(arcsinh(Ac^{1/(n-1)}))`` is exactly linear in time for centred
        spheres; a line through the last few rows gives its zero crossing.
        """
        if self.kind is not FlowKind.BRENDLE or len(self.rows) < 2:
            return None
        rows = self.rows[-tail:]
        t = np.array([r.t for r in rows])
        s = np.array([gudermannian(asinh(r.report.Ac ** (1.0 / (self.n - 1)))) for r in rows])
        slope, icpt = np.polyfit(t, s, 1)
        return float(-icpt / slope)


def _row(t, graph, fields, rep, prev: Optional[FlowRow]) -> FlowRow:
    n = graph.n
    shifted = graph.u - t / (n - 1)
    drift = float("nan") if prev is None else float(np.max(np.abs(shifted - (prev.u - prev.t / (n - 1)))))
    return FlowRow(t=t, report=rep, kappa_dev=max_curvature_deviation(fields),
                   sup_dv=float(np.max(np.abs(fields.dv))), drift=drift, u=graph.u)


def _try_step(graph, kind, dt):
    new = step(graph, kind, dt)
    f = compute_fields(new)
    if kind is FlowKind.IMCF and np.min(f.H) <= 0:
        i = int(np.argmin(f.H))
        raise FlowError(f"mean curvature not positive at node {i}", index=i)
    return new, f, evaluate(f)


def run(graph: RadialGraph, spec: FlowSpec) -> FlowTrace:
    kind = spec.kind
    n = graph.n
    fields = compute_fields(graph)
    if kind is FlowKind.IMCF and np.min(fields.H) <= 0:
        raise FlowError("initial hypersurface is not strictly mean convex", t=0.0,
                        index=int(np.argmin(fields.H)))
    rep = evaluate(fields)
    t = 0.0
    trace = FlowTrace(kind=kind, n=n, rows=[_row(0.0, graph, fields, rep, None)], final_graph=graph,
                      audit_failures={"area": 0, "ratio": 0, "L": 0, "J": 0, "hk": 0})
    trace.step_log.append(0.0, 0.0, rep)
    if rep.J >= rep.Kq:
        trace.crossing_t0 = 0.0
    next_record = spec.record_every
    scale_t = max(spec.t_end, 1.0)

    while t < spec.t_end * (1 - 1e-14):
        if kind is FlowKind.BRENDLE and np.min(fields.dSigma) < spec.extinction_density:
            trace.stop_reason = "extinct"
            break
        target = min(next_record, spec.t_end)
        remaining = target - t
        dt = stable_dt(fields, kind, spec.cfl)
        if dt >= remaining:
            dt = remaining
        elif dt > 0.5 * remaining:
            dt = 0.5 * remaining
        hits_target = dt >= remaining - 1e-14 * scale_t
        new = None
        for _ in range(spec.max_halvings + 1):
            try:
                new_graph, new_fields, new_rep = _try_step(graph, kind, dt)
            except (FlowError, GeometryError) as exc:
                err = exc
            else:
                audit = audit_step(rep, new_rep, dt, kind, spec.tol_monotone, spec.tol_hk)
                if audit.monotone_ok:
                    new = (new_graph, new_fields, new_rep, audit)
                    break
                err = FlowError(f"monotonicity audit failed at t = {t:.6g}: {audit}")
            dt *= 0.5
            hits_target = False
            trace.retries += 1
        if new is None:
            if kind is FlowKind.BRENDLE:
                trace.stop_reason = "unresolved"
                log_.info("Brendle flow stopped at t = %.6g: %s", t, err)
                break
            if trace.rows[-1].t != t:
                trace.rows.append(_row(t, graph, fields, rep, trace.rows[-1]))
            trace.final_graph = graph
            raise FlowError(f"step failed after {spec.max_halvings} halvings at t = {t:.6g}: {err}",
                            t=t, index=getattr(err, "index", None), trace=trace)
        new_graph, new_fields, new_rep, audit = new
        for name in trace.audit_failures:
            if not getattr(audit, name):
                trace.audit_failures[name] += 1
        t_new = target if hits_target else t + dt
        if trace.crossing_t0 is None:
            a, b = rep.J - rep.Kq, new_rep.J - new_rep.Kq
            if a < 0 <= b:
                trace.crossing_t0 = t + dt * (-a) / (b - a)
        t, graph, fields, rep = t_new, new_graph, new_fields, new_rep
        trace.steps += 1
        trace.step_log.append(t, dt, rep)
        if hits_target:
            trace.rows.append(_row(t, graph, fields, rep, trace.rows[-1]))
            next_record = target + spec.record_every
    if trace.rows[-1].t != t:
        trace.rows.append(_row(t, graph, fields, rep, trace.rows[-1]))
    trace.final_graph = graph
    return trace


@dataclass(frozen=True)
class AsymptoticsSummary:
    kappa_rate: float
    dv_rate: float
    expected_rate: float
    fit_window: tuple
    limit_profile: np.ndarray
    profile_drift: float
    L_margin_final: float
    L_margin_min: float
    L_nonincreasing_while_j_le_k: bool

    def to_dict(self) -> dict:
        return {
            "kappa_rate": self.kappa_rate,
            "dv_rate": self.dv_rate,
            "expected_rate": self.expected_rate,
            "fit_window": list(self.fit_window),
            "profile_drift": self.profile_drift,
            "limit_profile_range": [float(np.min(self.limit_profile)), float(np.max(self.limit_profile))],
            "L_margin_final": self.L_margin_final,
            "L_margin_min": self.L_margin_min,
            "L_nonincreasing_while_j_le_k": self.L_nonincreasing_while_j_le_k,
        }


def _decay_rate(t, y):
    y = np.asarray(y)
    ok = y > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.asarray(t)[ok], np.log(y[ok]), 1)[0])


def asymptotics_report(trace: FlowTrace, t_min: Optional[float] = None,
                       slack: float = 1e-8) -> AsymptoticsSummary:
    """Fit the late-time decay of the umbilicity defect and of ``|v'|``.

    By default the fit uses the last half of the recorded rows.
    """
    if trace.kind is not FlowKind.IMCF:
        raise ValueError("asymptotics are defined for inverse mean curvature flow traces")
    t = trace.times
    if len(t) < 4 or t[-1] < 6.0:
        raise ValueError(f"trace too short for asymptotics (t_end = {t[-1]:.3g}, {len(t)} rows; need t_end >= 6)")
    n = trace.n
    if t_min is None:
        sel = np.arange(len(t) // 2, len(t))
    else:
        sel = np.flatnonzero(t >= t_min - 1e-12)
    rows = [trace.rows[i] for i in sel]
    ts = t[sel]
    omega = unit_sphere_area(n - 1)
    L = trace.column("L")
    last, prev = trace.rows[-1], trace.rows[-2]
    f = last.u - last.t / (n - 1)
    return AsymptoticsSummary(
        kappa_rate=_decay_rate(ts, [r.kappa_dev for r in rows]),
        dv_rate=_decay_rate(ts, [r.sup_dv for r in rows]),
        expected_rate=-1.0 / (n - 1),
        fit_window=(float(ts[0]), float(ts[-1])),
        limit_profile=f,
        profile_drift=float(np.max(np.abs(f - (prev.u - prev.t / (n - 1))))),
        L_margin_final=float(L[-1] - (n - 1) * omega),
        L_margin_min=float(np.min(L) - (n - 1) * omega),
        L_nonincreasing_while_j_le_k=_l_monotone(trace, slack),
    )


def _l_monotone(trace: FlowTrace, slack: float) -> bool:
    log = trace.step_log.arrays()
    jk, L = log["J_minus_K"], log["L"]
    inc = np.diff(L)
    dt = log["dt"][1:]
    mask = (jk[:-1] <= 0) & (jk[1:] <= 0)
    bound = slack * dt * np.maximum(1.0, np.abs(L[:-1]))
    return bool(np.all(inc[mask] <= bound[mask]))
