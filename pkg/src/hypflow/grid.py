"""Axisymmetric discretisation of the polar angle on the unit sphere.

A field on ``S^{n-1}`` that only depends on the polar angle ``phi`` is
sampled at cell centres ``phi_i = (i + 1/2) pi / m``, so no node ever sits
on a pole.  Derivatives use fourth-order centred stencils whose ghost
values come from even reflection across ``phi = 0`` and ``phi = pi``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma, pi

import numpy as np

from . import kernels


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


def unit_sphere_area(k: int) -> float:
    """Area of the unit sphere ``S^k`` in ``R^{k+1}``."""
    if k <= 0:
        raise DomainError(f"sphere dimension must be positive, got {k}")
    return 2.0 * pi ** ((k + 1) / 2) / gamma((k + 1) / 2)


@lru_cache(maxsize=64)
def _cosine_weights(n: int, m: int) -> np.ndarray:
    # Integrate the cosine interpolant of the samples exactly against
    # sin^{n-2}: the rule stays spectrally accurate for odd n, where the
    # plain midpoint rule is only second order (|sin| has a kink at the poles).
    q = n - 2
    x, wx = np.polynomial.legendre.leggauss(2 * m + 64)
    t = 0.5 * pi * (x + 1.0)
    wt = 0.5 * pi * wx * np.sin(t) ** q
    k = np.arange(m)
    moments = np.cos(np.outer(k, t)) @ wt
    phi = (np.arange(m) + 0.5) * pi / m
    coef = np.full(m, 2.0 / m)
    coef[0] = 1.0 / m
    w = np.cos(np.outer(phi, k)) @ (coef * moments)
    w.setflags(write=False)
    return w


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Cell-centred polar grid for ``S^{n-1}`` (``n`` is the ambient dimension)."""

    n: int
    m: int
    phi: np.ndarray = field(repr=False)
    h_step: float
    cot: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.m

    def d_dphi(self, f):
        return d_dphi(self, f)

    def d2_dphi2(self, f):
        return d2_dphi2(self, f)

    def quadrature(self, f):
        return quadrature(self, f)


def make_grid(n: int, m: int) -> SphereGrid:
    if int(n) != n or n < 3:
        raise DomainError(f"ambient dimension must be an integer >= 3, got {n}")
    if int(m) != m or m < 16:
        raise DomainError(f"node count must be an integer >= 16, got {m}")
    n, m = int(n), int(m)
    h = pi / m
    phi = (np.arange(m) + 0.5) * h
    cot = np.cos(phi) / np.sin(phi)
    weights = unit_sphere_area(n - 2) * _cosine_weights(n, m)
    for a in (phi, cot):
        a.setflags(write=False)
    return SphereGrid(n=n, m=m, phi=phi, h_step=h, cot=cot, weights=weights)


def _check(grid: SphereGrid, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.m,):
        raise DomainError(f"field has shape {f.shape}, grid expects ({grid.m},)")
    return f


def d_dphi(grid: SphereGrid, f) -> np.ndarray:
    """Fourth-order first derivative in ``phi`` of an even axisymmetric field."""
    return kernels.d1(_check(grid, f), grid.h_step)


def d2_dphi2(grid: SphereGrid, f) -> np.ndarray:
    """Fourth-order second derivative in ``phi`` of an even axisymmetric field."""
    return kernels.d2(_check(grid, f), grid.h_step)


def quadrature(grid: SphereGrid, f) -> float:
    """Integral of an axisymmetric field over ``S^{n-1}`` with the round measure."""
    return float(np.dot(grid.weights, _check(grid, f)))


def midpoint_quadrature(grid: SphereGrid, f) -> float:
    """Plain midpoint rule with the ``sin^{n-2}`` weight (second order for odd n)."""
    f = _check(grid, f)
    return float(unit_sphere_area(grid.n - 2) * grid.h_step
                 * np.sum(f * np.sin(grid.phi) ** (grid.n - 2)))
