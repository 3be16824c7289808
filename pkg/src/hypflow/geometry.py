"""Extrinsic geometry of star-shaped hypersurfaces in hyperbolic space.

In geodesic polar coordinates ``g0 = dr^2 + sinh^2 r h`` a star-shaped
hypersurface is the radial graph ``r = u(theta)``.  For axisymmetric ``u``
the shape operator diagonalises in the (polar, angular) frame, giving one
radial principal curvature and an angular one of multiplicity ``n - 2``::

    v' = u' / sinh u,        W = sqrt(1 + v'^2)
    kappa_rad = (cosh u - v'' / W^2) / (W sinh u)
    kappa_ang = (cosh u - cot(phi) v') / (W sinh u)

The unit normal is the inward one, so a centred geodesic sphere of radius
``r`` has all principal curvatures equal to ``coth r``.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import SphereGrid


class GeometryError(ValueError):
    """Raised when a radial graph produces non-finite geometry."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True, eq=False)
class RadialGraph:
    grid: SphereGrid
    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        if u.shape != (self.grid.m,):
            raise GeometryError(f"u has shape {u.shape}, expected ({self.grid.m},)")
        bad = np.flatnonzero(~np.isfinite(u) | (u <= 0.0))
        if bad.size:
            i = int(bad[0])
            raise GeometryError(f"radial function must be finite and positive; u[{i}] = {u[i]!r}", index=i)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def n(self) -> int:
        return self.grid.n


@dataclass(frozen=True, eq=False)
class GeometryFields:
    """Pointwise geometry of a radial graph; every entry is a nodal array."""

    graph: RadialGraph
    rho: np.ndarray
    rho_dot: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    d2v: np.ndarray
    W: np.ndarray
    kappa_rad: np.ndarray
    kappa_ang: np.ndarray
    H: np.ndarray
    sigma2: np.ndarray
    p: np.ndarray
    dSigma: np.ndarray

    @property
    def grid(self) -> SphereGrid:
        return self.graph.grid

    @property
    def n(self) -> int:
        return self.graph.grid.n

    @property
    def norm_a2(self) -> np.ndarray:
        """Squared norm of the shape operator, ``H^2 - 2 sigma2``."""
        return self.kappa_rad ** 2 + (self.n - 2) * self.kappa_ang ** 2


def compute_fields(graph: RadialGraph) -> GeometryFields:
    grid = graph.grid
    raw = kernels.fields(graph.u, grid.h_step, grid.n, grid.cot)
    bad = np.flatnonzero(~np.all(np.isfinite(raw), axis=0))
    if bad.size:
        i = int(bad[0])
        raise GeometryError(f"non-finite geometry at node {i} (phi = {grid.phi[i]:.6g})", index=i)
    raw.flags.writeable = False
    v = np.log(np.tanh(0.5 * graph.u))
    v.flags.writeable = False
    return GeometryFields(
        graph=graph,
        rho=raw[kernels.F_RHO],
        rho_dot=raw[kernels.F_RHODOT],
        v=v,
        dv=raw[kernels.F_V1],
        d2v=raw[kernels.F_V2],
        W=raw[kernels.F_W],
        kappa_rad=raw[kernels.F_KRAD],
        kappa_ang=raw[kernels.F_KANG],
        H=raw[kernels.F_H],
        sigma2=raw[kernels.F_SIGMA2],
        p=raw[kernels.F_P],
        dSigma=raw[kernels.F_DSIGMA],
    )


def min_mean_curvature(fields: GeometryFields) -> float:
    return float(np.min(fields.H))


def umbilicity_defect(fields: GeometryFields) -> float:
    return float(np.max(np.abs(fields.kappa_rad - fields.kappa_ang)))


def max_curvature_deviation(fields: GeometryFields) -> float:
    """``max |kappa - 1|`` over both principal directions."""
    return float(max(np.max(np.abs(fields.kappa_rad - 1.0)),
                     np.max(np.abs(fields.kappa_ang - 1.0))))


def newton_maclaurin_gap(fields: GeometryFields) -> np.ndarray:
    """``(n-2)/(n-1) H^2 - 2 sigma2``, nonnegative with equality at umbilic points."""
    n = fields.n
    return (n - 2) / (n - 1) * fields.H ** 2 - 2.0 * fields.sigma2


def rho_h_expansion(fields: GeometryFields) -> np.ndarray:
    """Leading large-time expansion of ``rho * H`` along the inverse mean curvature flow.

    ``(n-1) rho^2 / (W rho_dot) - rho Lap_h(v) / (W rho_dot)`` with the
    axisymmetric Laplacian ``v'' + (n-2) cot(phi) v'``.
    """
    n = fields.n
    lap_v = fields.d2v + (n - 2) * fields.grid.cot * fields.dv
    scale = fields.rho / (fields.W * fields.rho_dot)
    return (n - 1) * fields.rho * scale - scale * lap_v
