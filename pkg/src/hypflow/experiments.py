"""Experiment drivers behind the command line.

Each driver takes a validated :class:`ExperimentConfig` and returns an
:class:`Outcome` with a JSON-ready summary, optional CSV tables and the
list of failed checks.  Nothing here touches the file system.
"""

import logging
from dataclasses import dataclass, field
from math import asinh, log2
from typing import Dict, List

import numpy as np

from .config import ConfigError, ExperimentConfig
from .flows import FlowError, FlowKind, FlowSpec, asymptotics_report, gudermannian, imcf_sphere_radius, run
from .functionals import CSV_COLUMNS, af_margin, bhw_margin, evaluate
from .geometry import RadialGraph, compute_fields
from .grid import make_grid, unit_sphere_area
from .mass import (AdSSModel, AdSSShape, MassAccretionShape, PerturbedAdSSShape, af_to_penrose_chain,
                   build_profile, penrose_check)
from .shapes import CENTERED_SPHERE, build

log = logging.getLogger(__name__)


@dataclass
class Outcome:
    summary: dict
    tables: Dict[str, tuple] = field(default_factory=dict)   # name -> (header, rows)
    failures: List[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def check(self, name: str, ok: bool):
        self.summary.setdefault("checks", {})[name] = bool(ok)
        if not ok:
            self.failures.append(name)


def _need(cfg, attr, command):
    if getattr(cfg, attr) is None:
        raise ConfigError(f"{command} needs a '{attr}' section")
    return getattr(cfg, attr)


# --------------------------------------------------------------------- statics

def statics(cfg: ExperimentConfig) -> Outcome:
    shape = _need(cfg, "shape", "verify-statics")
    tol = cfg.tolerances
    graph = build(shape, make_grid(cfg.n, cfg.m))
    rep = evaluate(compute_fields(graph))
    omega = unit_sphere_area(cfg.n - 1)
    out = Outcome(summary={
        "command": "verify-statics", "n": cfg.n, "m": cfg.m, "shape": shape.to_dict(),
        "functionals": rep.to_dict(),
        "af_margin": af_margin(rep),
        "bhw_margin": bhw_margin(rep),
        "L_minus_bound": rep.L - (cfg.n - 1) * omega,
    })
    out.check("mink1_residual", abs(rep.mink1_residual) <= tol["identity"] * rep.A)
    out.check("mink2_residual", abs(rep.mink2_residual) <= tol["identity"] * rep.A * rep.maxH)
    out.check("af_inequality", af_margin(rep) >= -tol["af"])
    out.check("heintze_karcher", rep.hk_valid and rep.hk_deficit >= -tol["hk"] * rep.A)
    if shape.variant == CENTERED_SPHERE:
        bound = (cfg.n - 1) * omega
        out.check("sphere_equality", abs(rep.L - bound) <= tol["equality"] * bound)
    return out


# ----------------------------------------------------------------------- flows

def _trace_rows(trace):
    return [r.report.csv_row(r.t) for r in trace.rows]


def flow(cfg: ExperimentConfig) -> Outcome:
    shape = _need(cfg, "shape", "run-flow")
    spec = _need(cfg, "flow", "run-flow")
    tol = cfg.tolerances
    graph = build(shape, make_grid(cfg.n, cfg.m))
    summary = {"command": "run-flow", "n": cfg.n, "m": cfg.m, "shape": shape.to_dict(),
               "flow": {"kind": spec.kind.value, "t_end": spec.t_end, "cfl": spec.cfl,
                        "record_every": spec.record_every}}
    try:
        trace = run(graph, spec)
    except FlowError as exc:
        summary["error"] = str(exc)
        out = Outcome(summary=summary)
        if exc.trace is not None:
            out.tables["trace"] = (CSV_COLUMNS, _trace_rows(exc.trace))
        out.check("flow_completed", False)
        return out

    out = Outcome(summary=summary, tables={"trace": (CSV_COLUMNS, _trace_rows(trace))})
    t = trace.times
    A = trace.column("A")
    n = cfg.n
    summary.update(stop_reason=trace.stop_reason, t_final=float(t[-1]), steps=trace.steps,
                   retries=trace.retries, audit_failures=dict(trace.audit_failures),
                   crossing_t0=trace.crossing_t0)
    hk = trace.column("hk_deficit")
    summary["hk_initial"] = float(hk[0])
    summary["hk_final"] = float(hk[-1])

    if spec.kind is FlowKind.IMCF:
        area_err = float(np.max(np.abs(A / (A[0] * np.exp(t)) - 1.0)))
        K = trace.column("Kq")
        k_err = float(np.max(np.abs(K / (K[0] * np.exp(n * t / (n - 1))) - 1.0)))
        summary.update(area_law_error=area_err, k_law_error=k_err)
        out.check("area_law", area_err <= tol["area_law"])
        out.check("k_law", k_err <= tol["area_law"])
        out.check("heintze_karcher", bool(np.all(hk >= -tol["flow_hk"] * A)))
        for name in ("ratio", "L", "J"):
            out.check(f"audit_{name}", trace.audit_failures[name] == 0)
        if shape.variant == CENTERED_SPHERE:
            err = max(float(np.max(np.abs(r.u - imcf_sphere_radius(shape.r, r.t, n)))) for r in trace.rows)
            summary["sphere_oracle_error"] = err
            out.check("sphere_oracle", err <= tol["sphere_oracle"])
        if spec.t_end >= 6.0:
            asym = asymptotics_report(trace, t_min=min(3.0, spec.t_end / 2))
            summary["asymptotics"] = asym.to_dict()
            out.check("L_lower_bound", asym.L_margin_min >= -tol["L_lower"])
            out.check("L_nonincreasing_while_J_le_K", asym.L_nonincreasing_while_j_le_k)
    else:
        out.check("hk_nonincreasing", trace.audit_failures["ratio"] == 0)
        summary["hk_ratio_final"] = float(hk[-1] / hk[0]) if hk[0] != 0 else None
        est = trace.extinction_estimate()
        summary["extinction_estimate"] = est
        if shape.variant == CENTERED_SPHERE:
            exact = gudermannian(shape.r)
            summary["extinction_exact"] = exact
            out.check("extinction_time", est is not None and abs(est - exact) <= tol["extinction"])
    return out


# --------------------------------------------------------------------- penrose

def _penrose_shape(cfg):
    p = cfg.penrose
    model = AdSSModel(cfg.n, p.mass)
    if p.family == "adss":
        return model, AdSSShape(model)
    if p.family == "perturbed":
        return model, PerturbedAdSSShape(model, p.eps)
    return model, MassAccretionShape(model, p.gain, p.width)


def penrose(cfg: ExperimentConfig) -> Outcome:
    p = _need(cfg, "penrose", "penrose")
    tol = cfg.tolerances
    model, shape = _penrose_shape(cfg)
    if not p.r_max > 2 * model.r_h:
        raise ConfigError(f"penrose.r_max must exceed 2 r_h = {2 * model.r_h:.6g}")
    profile = build_profile(shape, p.r_max, p.nodes)
    verdict = penrose_check(profile, equality_tol=tol["penrose"])
    horizon_graph = RadialGraph(make_grid(cfg.n, cfg.m), np.full(cfg.m, asinh(model.r_h)))
    chain = af_to_penrose_chain(horizon_graph, verdict.mass_formula)
    horizon_identity = 0.5 * model.r_h ** (cfg.n - 2) * (1 + model.r_h ** 2) - p.mass
    out = Outcome(summary={
        "command": "penrose", "n": cfg.n, "family": p.family, "m": p.mass, "r_h": model.r_h,
        "verdict": verdict.to_dict(), "chain": chain.to_dict(), "profile": profile.to_dict(),
        "horizon_identity_residual": horizon_identity,
    })
    out.tables["profile"] = (("r", "u", "du", "phi", "R", "Theta"), profile.table().tolist())
    out.check("horizon_identity", abs(horizon_identity) <= tol["horizon"] * max(1.0, p.mass))
    out.check("cross_oracle", verdict.cross_oracle_gap <= tol["cross_oracle"] * max(1.0, p.mass))
    out.check("penrose_inequality", verdict.margin_formula >= -tol["penrose"])
    if p.family == "adss":
        out.check("mass_formula", abs(verdict.mass_formula - p.mass) <= tol["mass_formula"])
        out.check("mass_functional", abs(verdict.mass_functional - p.mass) <= tol["mass_functional"])
        out.check("equality", verdict.equality)
    if verdict.hypothesis_violated:
        log.warning("scalar curvature drops below -n(n-1): the Penrose hypothesis fails for this profile")
    return out


# ----------------------------------------------------------------- convergence

STATICS_QUANTITIES = ("A", "I", "J", "L", "M", "hk_deficit")
FLOW_QUANTITIES = ("A", "I", "J", "L", "M")


def _statics_values(n, m, shape):
    rep = evaluate(compute_fields(build(shape, make_grid(n, m))))
    return {k: getattr(rep, k) for k in STATICS_QUANTITIES}


def _flow_values(n, m, shape, spec: FlowSpec):
    trace = run(build(shape, make_grid(n, m)), spec)
    rep = trace.rows[-1].report
    return {k: getattr(rep, k) for k in FLOW_QUANTITIES}


def observed_orders(values: List[dict], roundoff: float):
    """Orders from successive differences ``log2(|q_k - q_{k+1}| / |q_{k+1} - q_{k+2}|)``.

    A difference pair that is entirely below ``roundoff * max(1, |q|)``
    means the quantity is already exact to rounding; its order is ``None``.
    """
    table = []
    for name in values[0]:
        q = [v[name] for v in values]
        diffs = [abs(a - b) for a, b in zip(q, q[1:])]
        floor = roundoff * max(1.0, max(abs(x) for x in q))
        orders = []
        for d1, d2 in zip(diffs, diffs[1:]):
            if d1 <= floor and d2 <= floor:
                orders.append(None)
            elif d2 == 0:
                orders.append(float("inf"))
            else:
                orders.append(log2(d1 / d2))
        table.append({"quantity": name, "values": q, "differences": diffs, "orders": orders})
    return table


def convergence(cfg: ExperimentConfig, mapper=map) -> Outcome:
    conv = _need(cfg, "convergence", "convergence")
    shape = _need(cfg, "shape", "convergence")
    ladder = [cfg.m * 2 ** k for k in range(conv.levels)]
    if conv.experiment == "statics":
        values = list(mapper(_statics_values, [cfg.n] * len(ladder), ladder, [shape] * len(ladder)))
    else:
        spec = _need(cfg, "flow", "convergence")
        values = list(mapper(_flow_values, [cfg.n] * len(ladder), ladder, [shape] * len(ladder),
                             [spec] * len(ladder)))
    table = observed_orders(values, cfg.tolerances["roundoff"])
    need = cfg.tolerances["min_order"]
    out = Outcome(summary={"command": "convergence", "experiment": conv.experiment, "n": cfg.n,
                           "ladder": ladder, "shape": shape.to_dict(), "min_order": need,
                           "table": table})
    rows = []
    for entry in table:
        for k, order in enumerate(entry["orders"]):
            rows.append([entry["quantity"], ladder[k], ladder[k + 2],
                         float("nan") if order is None else order])
            if order is not None:
                out.check(f"order_{entry['quantity']}_{ladder[k]}", order >= need)
    out.tables["orders"] = (("quantity", "m_coarse", "m_fine", "order"), rows)
    measured = [o for e in table for o in e["orders"] if o is not None]
    out.summary["min_observed_order"] = min(measured) if measured else None
    return out


COMMANDS = {
    "verify-statics": statics,
    "run-flow": flow,
    "penrose": penrose,
    "convergence": convergence,
}
