"""Global quantities of a hypersurface and the residuals of the inequalities.

With ``Ac = A / omega_{n-1}`` the normalised area:

* ``I = int rho H``, ``J = -int p``, ``K = omega * Ac^{n/(n-1)}``
* ``L = (I - (n-1) K) / Ac^{(n-2)/(n-1)}``
* ``M = (I - (n-1) J) / Ac^{(n-2)/(n-1)}``

The Alexandrov-Fenchel type inequality reads ``L >= (n-1) omega``, which
is the same statement as ``af_lhs >= af_rhs``.
"""

from dataclasses import dataclass, fields as dc_fields

import numpy as np

from .geometry import GeometryFields
from .grid import quadrature, unit_sphere_area

CSV_COLUMNS = ("t", "A", "I", "J", "Kq", "L", "M", "hk_deficit", "mink1_residual",
               "mink2_residual", "af_lhs", "af_rhs", "minH", "maxH")


@dataclass(frozen=True)
class FunctionalReport:
    n: int
    A: float
    Ac: float
    I: float
    J: float
    Kq: float
    L: float
    M: float
    hk_deficit: float
    hk_valid: bool
    mink1_residual: float
    mink2_residual: float
    af_lhs: float
    af_rhs: float
    minH: float
    maxH: float

    @property
    def omega(self) -> float:
        return unit_sphere_area(self.n - 1)

    def csv_row(self, t: float) -> list:
        return [t, self.A, self.I, self.J, self.Kq, self.L, self.M, self.hk_deficit,
                self.mink1_residual, self.mink2_residual, self.af_lhs, self.af_rhs,
                self.minH, self.maxH]

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dc_fields(self)}


def af_constant(n: int) -> float:
    return 1.0 / (2.0 * (n - 1) * unit_sphere_area(n - 1))


def evaluate(fields: GeometryFields) -> FunctionalReport:
    grid = fields.grid
    n = grid.n
    omega = unit_sphere_area(n - 1)

    def integral(f):
        return quadrature(grid, f * fields.dSigma)

    A = integral(np.ones(grid.m))
    Ac = A / omega
    H = fields.H
    I = integral(fields.rho * H)
    J = -integral(fields.p)
    Kq = omega * Ac ** (n / (n - 1))
    low = Ac ** ((n - 2) / (n - 1))
    min_h = float(np.min(H))
    hk_valid = min_h > 0
    if hk_valid:
        hk = (n - 1) * integral(fields.rho / H) - J
    else:
        hk = float("nan")
    return FunctionalReport(
        n=n,
        A=A,
        Ac=Ac,
        I=I,
        J=J,
        Kq=Kq,
        L=(I - (n - 1) * Kq) / low,
        M=(I - (n - 1) * J) / low,
        hk_deficit=hk,
        hk_valid=hk_valid,
        mink1_residual=integral((n - 1) * fields.rho + H * fields.p),
        mink2_residual=integral((n - 2) * fields.rho * H + 2.0 * fields.p * fields.sigma2),
        af_lhs=af_constant(n) * I,
        af_rhs=0.5 * (low + Ac ** (n / (n - 1))),
        minH=min_h,
        maxH=float(np.max(H)),
    )


def af_margin(report: FunctionalReport) -> float:
    return report.af_lhs - report.af_rhs


def bhw_margin(report: FunctionalReport) -> float:
    return report.M - (report.n - 1) * report.omega


def monotone_ratio(report: FunctionalReport) -> float:
    """``(J - K) / Ac^{n/(n-1)}``, nondecreasing along the inverse mean curvature flow."""
    n = report.n
    return (report.J - report.Kq) / report.Ac ** (n / (n - 1))
