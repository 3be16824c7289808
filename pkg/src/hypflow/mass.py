"""Rotationally symmetric graphs in hyperbolic (n+1)-space and their mass.

The ambient metric is ``rho^2 dt^2 + g0`` with ``g0 = dr^2/(1+r^2) + r^2 h``
(``r`` here is the areal coordinate ``sinh`` of the geodesic radius) and
``rho = sqrt(1+r^2)``.  The graph ``t = u(r)`` inherits

    g = phi(r) dr^2 + r^2 h,   phi = 1/(1+r^2) + (1+r^2) u'^2.

Writing ``X = (1+r^2)^2 u'^2`` and ``D = (1+r^2) X / (1+X)`` (so that
``1/phi = 1 + r^2 - D``), the scalar curvature of ``g`` is

    R + n(n-1) = (n-1)/r^2 * ((n-2) D + r D'),

which is the textbook formula for ``dr^2/F + r^2 h`` rearranged so that no
large terms cancel.  The mass is computed two ways: the bulk integral plus
horizon term, and the limit of the flux integral at infinity.
"""

import csv
import json
from dataclasses import dataclass, field
from math import expm1, log1p, pi
from typing import Optional, Sequence

import numpy as np

from .functionals import af_constant, evaluate
from .geometry import RadialGraph, compute_fields, min_mean_curvature
from .grid import DomainError, unit_sphere_area

PROFILE_COLUMNS = ("r", "u", "du", "phi", "R", "Theta")

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class MassError(ValueError):
    pass


def horizon_radius(m: float, n: int, tol: float = 1e-13) -> float:
    """Positive root of ``1 + r^2 = 2 m r^{2-n}`` by bisection."""
    if not m > 0:
        raise DomainError(f"mass parameter must be positive, got {m}")
    if n < 3:
        raise DomainError(f"dimension must be >= 3, got {n}")

    def f(r):
        return 2.0 * m * r ** (2 - n) - 1.0 - r * r

    hi = max(1.0, (2.0 * m) ** (1.0 / n))
    lo = (2.0 * m / (1.0 + hi * hi)) ** (1.0 / (n - 2))
    assert f(lo) >= 0 >= f(hi)
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if mid in (lo, hi) and hi - lo <= 4 * np.spacing(hi):
            break
    # finish to full precision; the bracket is already tight
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AdSSModel:
    n: int
    m: float
    r_h: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "r_h", horizon_radius(self.m, self.n))

    def V(self, r):
        r = np.asarray(r, dtype=float)
        return 1.0 + r * r - 2.0 * self.m * r ** (2 - self.n)

    def V_from_horizon(self, delta):
        """``V(r_h + delta)`` without the cancellation near the horizon."""
        return _lapse_sq(delta, self.r_h, self.m, self.n)


def _lapse_sq(delta, r_h, m, n):
    delta = np.asarray(delta, dtype=float)
    sq = delta * (2.0 * r_h + delta)
    power = r_h ** (2 - n) * np.expm1((2 - n) * np.log1p(delta / r_h))
    return sq - 2.0 * m * power


# ---------------------------------------------------------------------------
# graph families; each maps the distance ``delta`` from the horizon to u', u''
# ---------------------------------------------------------------------------

class AdSSShape:
    """Graph realisation of anti-de Sitter-Schwarzschild."""

    def __init__(self, model: AdSSModel):
        self.model = model
        self.n = model.n
        self.horizon = model.r_h

    def slopes(self, delta):
        n, m, rh = self.n, self.model.m, self.horizon
        r = rh + delta
        V = self.model.V_from_horizon(delta)
        if np.any(V <= 0):
            raise MassError("negative radicand in the adSS height equation")
        one = 1.0 + r * r
        du = np.sqrt(2.0 * m) * r ** (0.5 * (2 - n)) / (np.sqrt(V) * one)
        dV = 2.0 * r + 2.0 * m * (n - 2) * r ** (1 - n)
        d2u = du * ((2 - n) / (2.0 * r) - dV / (2.0 * V) - 2.0 * r / one)
        return du, d2u


class PerturbedAdSSShape(AdSSShape):
    """``u = u_m + eps (r - r_h)^2 exp(-r)``."""

    def __init__(self, model: AdSSModel, eps: float):
        super().__init__(model)
        self.eps = eps

    def slopes(self, delta):
        du, d2u = super().slopes(delta)
        r = self.horizon + delta
        e = self.eps * np.exp(-r)
        return du + e * (2.0 * delta - delta ** 2), d2u + e * (2.0 - 4.0 * delta + delta ** 2)


class MassAccretionShape:
    """Graph whose mass aspect grows from ``m`` at the horizon to ``m + gain``.

    ``1/phi = 1 + r^2 - 2 mu(r) r^{2-n}`` with
    ``mu = m + gain (1 - exp(-(r - r_h)^2 / width^2))``, so the scalar
    curvature excess ``2 (n-1) mu' r^{1-n}`` is nonnegative everywhere.
    """

    def __init__(self, model: AdSSModel, gain: float, width: float = 1.0):
        if gain < 0:
            raise MassError("mass gain must be nonnegative")
        self.model = model
        self.n = model.n
        self.horizon = model.r_h
        self.gain = gain
        self.width = width

    def _mu(self, delta):
        z = (delta / self.width) ** 2
        extra = -self.gain * np.expm1(-z)
        dextra = self.gain * 2.0 * delta / self.width ** 2 * np.exp(-z)
        return extra, dextra

    def slopes(self, delta):
        n, m, rh = self.n, self.model.m, self.horizon
        r = rh + delta
        extra, dextra = self._mu(delta)
        F = self.model.V_from_horizon(delta) - 2.0 * extra * r ** (2 - n)
        if np.any(F <= 0):
            raise MassError("mass gain too large: the metric loses its horizon structure")
        mu = m + extra
        D = 2.0 * mu * r ** (2 - n)
        dD = 2.0 * dextra * r ** (2 - n) + 2.0 * (2 - n) * mu * r ** (1 - n)
        dF = 2.0 * r - dD
        one = 1.0 + r * r
        du = np.sqrt(D / F) / one
        d2u = du * (dD / (2.0 * D) - dF / (2.0 * F) - 2.0 * r / one)
        return du, d2u


class FlatSliceShape:
    """``u = const``: the totally geodesic slice, i.e. hyperbolic space itself."""

    def __init__(self, n: int):
        self.n = n
        self.horizon = 0.0

    def slopes(self, delta):
        z = np.zeros_like(np.asarray(delta, dtype=float))
        return z, z.copy()


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GraphProfile:
    n: int
    r_nodes: np.ndarray
    u: np.ndarray
    du: np.ndarray
    d2u: np.ndarray
    phi_rr: np.ndarray
    horizon_r: float
    shape: object = field(repr=False)
    delta: np.ndarray = field(default=None, repr=False)   # r_nodes - horizon_r without rounding

    def table(self):
        R = scalar_curvature_radial(self)
        th = theta(self)
        return np.column_stack([self.r_nodes, self.u, self.du, self.phi_rr, R, th])

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(PROFILE_COLUMNS)
            for row in self.table():
                w.writerow([f"{x:.17g}" for x in row])

    def to_dict(self):
        return {"n": self.n, "horizon_r": self.horizon_r, "nodes": len(self.r_nodes),
                "r_max": float(self.r_nodes[-1]), "shape": type(self.shape).__name__}


def _geometric_offsets(first, last, count):
    return np.geomspace(first, last, count)


def _phi(r, du):
    one = 1.0 + r * r
    return 1.0 / one + one * du * du


def build_profile(shape, r_max: float, node_count: int, first_offset: float = 1e-10) -> GraphProfile:
    """Tabulate a graph family on a radial grid refined toward its horizon.

    Heights are integrated from the horizon with Gauss-Legendre panels in
    ``s = sqrt(r - r_h)``, which removes the square-root singularity of u'.
    """
    rh = shape.horizon
    if node_count < 4:
        raise MassError("need at least 4 radial nodes")
    if rh > 0 and not r_max > 2.0 * rh:
        raise MassError(f"r_max must exceed 2 r_h = {2 * rh:.6g}")
    scale = max(1.0, rh)
    offsets = _geometric_offsets(first_offset * scale, r_max - rh, node_count)
    s_nodes = np.sqrt(np.concatenate([[0.0], offsets]))
    a, b = s_nodes[:-1], s_nodes[1:]
    half = 0.5 * (b - a)
    s = (0.5 * (a + b))[:, None] + half[:, None] * _GL_X[None, :]
    du_q, _ = shape.slopes(s * s)
    pieces = np.sum(du_q * 2.0 * s * _GL_W[None, :], axis=1) * half
    u = np.cumsum(pieces)
    r = rh + offsets
    du, d2u = shape.slopes(offsets)
    return GraphProfile(n=shape.n, r_nodes=r, u=u, du=du, d2u=d2u, phi_rr=_phi(r, du),
                        horizon_r=rh, shape=shape, delta=offsets)


def build_adss_profile(model: AdSSModel, r_max: float, node_count: int) -> GraphProfile:
    return build_profile(AdSSShape(model), r_max, node_count)


def _excess_curvature(r, du, d2u, n):
    one = 1.0 + r * r
    X = one * one * du * du
    dX = 4.0 * r * one * du * du + 2.0 * one * one * du * d2u
    D = one * X / (1.0 + X)
    dD = 2.0 * r * X / (1.0 + X) + one * dX / (1.0 + X) ** 2
    return (n - 1) / (r * r) * ((n - 2) * D + r * dD)


def scalar_curvature_radial(profile: GraphProfile) -> np.ndarray:
    n = profile.n
    return -n * (n - 1) + _excess_curvature(profile.r_nodes, profile.du, profile.d2u, n)


def scalar_curvature_from_phi(r, phi, dphi, n):
    """Direct form ``R = (n-1)/r^2 [(n-2)(1 - 1/phi) + r phi'/phi^2]``."""
    return (n - 1) / r ** 2 * ((n - 2) * (1.0 - 1.0 / phi) + r * dphi / phi ** 2)


def theta(profile: GraphProfile) -> np.ndarray:
    """``<N, d/dt>`` for the upward unit normal: ``phi^{-1/2}``."""
    return 1.0 / np.sqrt(profile.phi_rr)


@dataclass(frozen=True)
class MassBreakdown:
    bulk: float
    horizon: float
    mass_formula_total: float
    mass_functional_limit: float
    penrose_rhs: float
    min_excess_curvature: float
    hypothesis_violated: bool

    def to_dict(self):
        return dict(self.__dict__)


def _bulk_integral(shape, r_max, panels=400, tail_offset=1e-12):
    n = shape.n
    rh = shape.horizon
    omega = unit_sphere_area(n - 1)
    if rh > 0:
        edges = np.sqrt(np.concatenate([[0.0], np.geomspace(tail_offset * max(1.0, rh), r_max - rh, panels)]))
    else:
        edges = np.sqrt(np.concatenate([[0.0], np.geomspace(1e-8, r_max, panels)]))
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    s = (0.5 * (a + b))[:, None] + half[:, None] * _GL_X[None, :]
    delta = s * s
    r = rh + delta
    du, d2u = shape.slopes(delta)
    frak = _excess_curvature(r, du, d2u, n)
    phi = _phi(r, du)
    th = 1.0 / np.sqrt(phi)
    dM = np.sqrt(phi) * r ** (n - 1) * omega
    integrand = th * frak * dM * 2.0 * s
    total = af_constant(n) * float(np.sum(np.sum(integrand * _GL_W[None, :], axis=1) * half))
    return total, float(np.min(frak))


def horizon_term(r_h: float, n: int) -> float:
    """``c_n`` times the integral of ``rho H`` over the horizon sphere, in closed form."""
    return 0.5 * r_h ** (n - 2) * (1.0 + r_h * r_h)


def penrose_bound(area: float, n: int) -> float:
    ac = area / unit_sphere_area(n - 1)
    return 0.5 * (ac ** ((n - 2) / (n - 1)) + ac ** (n / (n - 1)))


def mass_density(profile: GraphProfile, r_geo) -> np.ndarray:
    """Flux integrand at geodesic radius ``r``: ``1/2 sinh^{n-2} cosh^2 * alpha``.

    ``alpha = (phi - g0_rr) cosh^2 r`` is the only component of the metric
    difference in geodesic polar coordinates.
    """
    r_geo = np.asarray(r_geo, dtype=float)
    rt = np.sinh(r_geo)
    du, _ = profile.shape.slopes(rt - profile.horizon_r)
    one = 1.0 + rt * rt
    alpha = one * du * du * np.cosh(r_geo) ** 2
    return 0.5 * rt ** (profile.n - 2) * np.cosh(r_geo) ** 2 * alpha


def mass_functional(profile: GraphProfile, r_samples: Sequence[float] = (6.0, 8.0, 10.0, 12.0),
                    return_samples=False):
    """Limit of the flux integral, extrapolated with ``m_inf + c exp(-beta r)``.

    The fit is Aitken's delta-squared on the last three (equally spaced)
    samples; when the samples have already converged the last one is used.
    """
    r_samples = np.asarray(sorted(r_samples), dtype=float)
    if r_samples.size < 3:
        raise MassError("need at least three sample radii")
    if np.any(np.sinh(r_samples) <= profile.horizon_r):
        raise MassError("sample radii must lie outside the horizon")
    vals = mass_density(profile, r_samples)
    if not np.all(np.isfinite(vals)):
        raise MassError("mass density is not finite at the sample radii")
    m1, m2, m3 = vals[-3:]
    d1, d2 = m2 - m1, m3 - m2
    denom = d2 - d1
    if abs(d2) > 0.5 * abs(d1) and abs(d2) > 1e-12 * max(1.0, abs(m3)):
        import warnings
        warnings.warn("mass density is not decaying at the sample radii; the limit may diverge")
    if d1 != 0 and denom != 0 and 0 < d2 / d1 < 1:
        limit = m3 - d2 * d2 / denom
    else:
        limit = m3
    if return_samples:
        return float(limit), vals
    return float(limit)


def mass_formula(profile: GraphProfile, tol: float = 1e-8, panels: int = 400,
                 r_max: Optional[float] = None) -> MassBreakdown:
    if not profile.horizon_r > 0:
        raise MassError("mass formula needs a horizon")
    n = profile.n
    r_max = float(profile.r_nodes[-1]) if r_max is None else r_max
    bulk, min_frak = _bulk_integral(profile.shape, r_max, panels=panels)
    hor = horizon_term(profile.horizon_r, n)
    area = unit_sphere_area(n - 1) * profile.horizon_r ** (n - 1)
    return MassBreakdown(
        bulk=bulk,
        horizon=hor,
        mass_formula_total=bulk + hor,
        mass_functional_limit=mass_functional(profile),
        penrose_rhs=penrose_bound(area, n),
        min_excess_curvature=min_frak,
        hypothesis_violated=bool(min_frak < -tol),
    )


@dataclass(frozen=True)
class PenroseVerdict:
    mass_formula: float
    mass_functional: float
    penrose_rhs: float
    margin_formula: float
    margin_functional: float
    equality: bool
    cross_oracle_gap: float
    hypothesis_violated: bool
    breakdown: MassBreakdown

    def to_dict(self):
        d = {k: v for k, v in self.__dict__.items() if k != "breakdown"}
        d["breakdown"] = self.breakdown.to_dict()
        return d


def penrose_check(profile: GraphProfile, equality_tol: float = 1e-6) -> PenroseVerdict:
    if not profile.horizon_r > 0:
        raise DomainError("Penrose check needs a horizon (r_h > 0)")
    br = mass_formula(profile)
    m_f = br.mass_formula_total
    m_l = br.mass_functional_limit
    margin = m_f - br.penrose_rhs
    return PenroseVerdict(
        mass_formula=m_f,
        mass_functional=m_l,
        penrose_rhs=br.penrose_rhs,
        margin_formula=margin,
        margin_functional=m_l - br.penrose_rhs,
        equality=abs(margin) <= equality_tol,
        cross_oracle_gap=abs(m_f - m_l),
        hypothesis_violated=br.hypothesis_violated,
        breakdown=br,
    )


@dataclass(frozen=True)
class ChainReport:
    mass: float
    curvature_term: float
    penrose_rhs: float
    mass_link: bool
    af_link: bool
    mass_gap: float
    af_gap: float
    mean_convex: bool
    min_H: float

    def to_dict(self):
        return dict(self.__dict__)


def af_to_penrose_chain(horizon_graph: RadialGraph, mass: float, tol: float = 1e-8) -> ChainReport:
    """Check ``mass >= c_n int rho H >= Penrose bound`` link by link."""
    fields = compute_fields(horizon_graph)
    min_h = min_mean_curvature(fields)
    rep = evaluate(fields)
    curv = rep.af_lhs
    rhs = rep.af_rhs
    return ChainReport(
        mass=mass,
        curvature_term=curv,
        penrose_rhs=rhs,
        mass_link=mass >= curv - tol,
        af_link=min_h >= 0 and curv >= rhs - tol,
        mass_gap=mass - curv,
        af_gap=curv - rhs,
        mean_convex=min_h >= 0,
        min_H=min_h,
    )


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
