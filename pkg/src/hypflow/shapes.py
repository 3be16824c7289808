"""Reference hypersurfaces with known geometry.

Centred and off-centre geodesic spheres plus Legendre-perturbed spheres.
The off-centre sphere of radius ``R`` sits at distance ``d`` from the
origin on the symmetry axis; its radial function solves the hyperbolic
law of cosines ``cosh R = cosh d cosh u - sinh d sinh u cos(phi)``.
"""

from dataclasses import dataclass
from math import cosh, sinh, tanh
from typing import Optional

import numpy as np
from scipy.special import eval_legendre

from .geometry import RadialGraph, compute_fields, min_mean_curvature
from .grid import DomainError, SphereGrid, unit_sphere_area

CENTERED_SPHERE = "centered_sphere"
OFFCENTER_SPHERE = "offcenter_sphere"
PERTURBED_SPHERE = "perturbed_sphere"
VARIANTS = (CENTERED_SPHERE, OFFCENTER_SPHERE, PERTURBED_SPHERE)


class ShapeError(ValueError):
    pass


class MeanConvexityError(ShapeError):
    def __init__(self, message, min_h):
        super().__init__(message)
        self.min_h = min_h


@dataclass(frozen=True)
class ShapeSpec:
    variant: str
    r: Optional[float] = None
    d: Optional[float] = None
    R: Optional[float] = None
    eps: Optional[float] = None
    l: Optional[int] = None

    def __post_init__(self):
        if self.variant == CENTERED_SPHERE:
            if self.r is None or not self.r > 0:
                raise ShapeError("centered sphere needs r > 0")
        elif self.variant == OFFCENTER_SPHERE:
            if self.d is None or self.R is None or not 0 <= self.d < self.R:
                raise ShapeError("off-center sphere needs 0 <= d < R")
        elif self.variant == PERTURBED_SPHERE:
            if self.r is None or not self.r > 0:
                raise ShapeError("perturbed sphere needs r > 0")
            if self.eps is None or self.l is None or int(self.l) != self.l or self.l < 0:
                raise ShapeError("perturbed sphere needs eps and an integer l >= 0")
        else:
            raise ShapeError(f"unknown shape variant {self.variant!r}; expected one of {VARIANTS}")

    @classmethod
    def centered(cls, r):
        return cls(CENTERED_SPHERE, r=r)

    @classmethod
    def offcenter(cls, d, R):
        return cls(OFFCENTER_SPHERE, d=d, R=R)

    @classmethod
    def perturbed(cls, r, eps, l=2):
        return cls(PERTURBED_SPHERE, r=r, eps=eps, l=l)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        variant = data.pop("variant", None)
        allowed = {"r", "d", "R", "eps", "l"}
        unknown = set(data) - allowed
        if unknown:
            raise ShapeError(f"unknown shape keys: {sorted(unknown)}")
        return cls(variant, **data)

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


def offcenter_radius(d, R, cos_phi, tol=1e-13):
    """Solve the law-of-cosines relation for ``u`` by safeguarded Newton.

    The bracket is ``[R - d, R + d]``; a Newton step leaving it falls back
    to bisection.
    """
    cos_phi = np.asarray(cos_phi, dtype=float)
    target = cosh(R)
    cd, sd = cosh(d), sinh(d)
    lo = np.full(cos_phi.shape, R - d)
    hi = np.full(cos_phi.shape, R + d)

    def g(u):
        return cd * np.cosh(u) - sd * np.sinh(u) * cos_phi - target

    glo, ghi = g(lo), g(hi)
    if np.any(glo > 1e-12 * target) or np.any(ghi < -1e-12 * target):
        raise ShapeError("off-center root is not bracketed")
    u = 0.5 * (lo + hi)
    for _ in range(200):
        gu = g(u)
        lo = np.where(gu < 0, u, lo)
        hi = np.where(gu >= 0, u, hi)
        dg = cd * np.sinh(u) - sd * np.cosh(u) * cos_phi
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = u - gu / dg
        bisect = ~np.isfinite(nxt) | (nxt <= lo) | (nxt >= hi)
        nxt = np.where(bisect, 0.5 * (lo + hi), nxt)
        done = np.max(np.abs(nxt - u)) <= tol
        u = nxt
        if done:
            break
    # polish: the stopping test looks at the previous step, so the last
    # iterate can still sit a few hundred ulps off the root
    for _ in range(2):
        dg = cd * np.sinh(u) - sd * np.cosh(u) * cos_phi
        u = u - g(u) / dg
    return u


def build(spec: ShapeSpec, grid: SphereGrid) -> RadialGraph:
    x = np.cos(grid.phi)
    if spec.variant == CENTERED_SPHERE:
        u = np.full(grid.m, float(spec.r))
    elif spec.variant == OFFCENTER_SPHERE:
        if spec.d == 0:
            u = np.full(grid.m, float(spec.R))
        else:
            u = offcenter_radius(spec.d, spec.R, x)
    else:
        u = spec.r + spec.eps * eval_legendre(int(spec.l), x)
        if np.any(u <= 0):
            raise MeanConvexityError("perturbation makes the radial function nonpositive", float("nan"))
        graph = RadialGraph(grid, u)
        min_h = min_mean_curvature(compute_fields(graph))
        if not min_h > 0:
            raise MeanConvexityError(
                f"perturbed sphere is not strictly mean convex (min H = {min_h:.6g})", min_h)
        return graph
    return RadialGraph(grid, u)


@dataclass(frozen=True)
class ClosedFormReport:
    A: float
    H: float
    p: float
    I: float
    J: float
    K: float
    L: float
    M: float


def sphere_closed_forms(r: float, n: int) -> ClosedFormReport:
    """Closed-form quantities of the geodesic sphere of radius ``r`` centred at the origin."""
    if not r > 0:
        raise DomainError("radius must be positive")
    w = unit_sphere_area(n - 1)
    sh, ch = sinh(r), cosh(r)
    return ClosedFormReport(
        A=w * sh ** (n - 1),
        H=(n - 1) / tanh(r),
        p=-sh,
        I=(n - 1) * w * sh ** (n - 2) * ch ** 2,
        J=w * sh ** n,
        K=w * sh ** n,
        L=(n - 1) * w,
        M=(n - 1) * w,
    )
