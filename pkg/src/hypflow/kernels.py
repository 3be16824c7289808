"""Hot numerical kernels: stencils, pointwise curvature and the flow step.

Every kernel exists twice, as a vectorised numpy function (``*_np``) and as
a loop kernel compiled with numba (``*_nb``).  The public names at the
bottom of the module point at the numba versions unless numba is missing or
``HYPFLOW_DISABLE_NUMBA`` is set.  Both paths are tested against each other.

Fields are returned stacked in one ``(NFIELDS, m)`` array, indexed by the
``F_*`` constants, so the compiled code never allocates Python objects.
"""

import numpy as np

from ._accel import HAVE_NUMBA, njit

IMCF = 0
BRENDLE = 1

(F_U1, F_U2, F_V1, F_V2, F_W, F_KRAD, F_KANG, F_H, F_SIGMA2, F_P, F_DSIGMA,
 F_RHO, F_RHODOT) = range(13)
NFIELDS = 13


# ---------------------------------------------------------------------------
# numpy reference path
# ---------------------------------------------------------------------------

def _pad_even(f):
    # ghosts mirror across the half-cell poles: f[-1] = f[0], f[-2] = f[1]
    return np.pad(f, 2, mode="symmetric")


def d1_np(f, h):
    g = _pad_even(f)
    # grouped as symmetric differences so constants give exactly zero
    return (8.0 * (g[3:-1] - g[1:-3]) - (g[4:] - g[:-4])) / (12.0 * h)


def d2_np(f, h):
    g = _pad_even(f)
    return ((16.0 * (g[1:-3] + g[3:-1]) - (g[:-4] + g[4:])) - 30.0 * g[2:-2]) / (12.0 * h * h)


def fields_np(u, h, n, cot):
    out = np.empty((NFIELDS, u.size))
    u1 = d1_np(u, h)
    u2 = d2_np(u, h)
    s = np.sinh(u)
    c = np.cosh(u)
    v1 = u1 / s
    v2 = u2 / s - u1 * u1 * c / (s * s)
    w2 = 1.0 + v1 * v1
    w = np.sqrt(w2)
    krad = (c - v2 / w2) / (w * s)
    kang = (c - cot * v1) / (w * s)
    out[F_U1] = u1
    out[F_U2] = u2
    out[F_V1] = v1
    out[F_V2] = v2
    out[F_W] = w
    out[F_KRAD] = krad
    out[F_KANG] = kang
    out[F_H] = krad + (n - 2) * kang
    out[F_SIGMA2] = (n - 2) * krad * kang + 0.5 * (n - 2) * (n - 3) * kang * kang
    out[F_P] = -s / w
    out[F_DSIGMA] = s ** (n - 1) * w
    out[F_RHO] = c
    out[F_RHODOT] = s
    return out


def speed_np(u, kind, h, n, cot):
    """Right-hand side of the scalar graph equation ``du/dt``."""
    u1 = d1_np(u, h)
    s = np.sinh(u)
    v1 = u1 / s
    w = np.sqrt(1.0 + v1 * v1)
    if kind == BRENDLE:
        return -np.cosh(u) * w
    u2 = d2_np(u, h)
    c = np.cosh(u)
    v2 = u2 / s - u1 * u1 * c / (s * s)
    krad = (c - v2 / (w * w)) / (w * s)
    kang = (c - cot * v1) / (w * s)
    return w / (krad + (n - 2) * kang)


def rk4_step_np(u, dt, kind, h, n, cot):
    k1 = speed_np(u, kind, h, n, cot)
    k2 = speed_np(u + 0.5 * dt * k1, kind, h, n, cot)
    k3 = speed_np(u + 0.5 * dt * k2, kind, h, n, cot)
    k4 = speed_np(u + dt * k3, kind, h, n, cot)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

@njit(cache=True)
def _ghost(f, j):
    m = f.shape[0]
    if j < 0:
        return f[-j - 1]
    if j >= m:
        return f[2 * m - 1 - j]
    return f[j]


@njit(cache=True)
def d1_nb(f, h):
    m = f.shape[0]
    out = np.empty(m)
    for i in range(m):
        out[i] = (8.0 * (_ghost(f, i + 1) - _ghost(f, i - 1))
                  - (_ghost(f, i + 2) - _ghost(f, i - 2))) / (12.0 * h)
    return out


@njit(cache=True)
def d2_nb(f, h):
    m = f.shape[0]
    out = np.empty(m)
    for i in range(m):
        out[i] = ((16.0 * (_ghost(f, i - 1) + _ghost(f, i + 1))
                   - (_ghost(f, i - 2) + _ghost(f, i + 2))) - 30.0 * f[i]) / (12.0 * h * h)
    return out


@njit(cache=True)
def fields_nb(u, h, n, cot):
    m = u.shape[0]
    out = np.empty((NFIELDS, m))
    u1 = d1_nb(u, h)
    u2 = d2_nb(u, h)
    for i in range(m):
        s = np.sinh(u[i])
        c = np.cosh(u[i])
        v1 = u1[i] / s
        v2 = u2[i] / s - u1[i] * u1[i] * c / (s * s)
        w2 = 1.0 + v1 * v1
        w = np.sqrt(w2)
        krad = (c - v2 / w2) / (w * s)
        kang = (c - cot[i] * v1) / (w * s)
        out[F_U1, i] = u1[i]
        out[F_U2, i] = u2[i]
        out[F_V1, i] = v1
        out[F_V2, i] = v2
        out[F_W, i] = w
        out[F_KRAD, i] = krad
        out[F_KANG, i] = kang
        out[F_H, i] = krad + (n - 2) * kang
        out[F_SIGMA2, i] = (n - 2) * krad * kang + 0.5 * (n - 2) * (n - 3) * kang * kang
        out[F_P, i] = -s / w
        out[F_DSIGMA, i] = s ** (n - 1) * w
        out[F_RHO, i] = c
        out[F_RHODOT, i] = s
    return out


@njit(cache=True)
def speed_nb(u, kind, h, n, cot):
    m = u.shape[0]
    out = np.empty(m)
    inv12h = 1.0 / (12.0 * h)
    inv12h2 = 1.0 / (12.0 * h * h)
    for i in range(m):
        fm2 = _ghost(u, i - 2)
        fm1 = _ghost(u, i - 1)
        fp1 = _ghost(u, i + 1)
        fp2 = _ghost(u, i + 2)
        u1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) * inv12h
        s = np.sinh(u[i])
        c = np.cosh(u[i])
        v1 = u1 / s
        w2 = 1.0 + v1 * v1
        w = np.sqrt(w2)
        if kind == BRENDLE:
            out[i] = -c * w
        else:
            u2 = (-fm2 + 16.0 * fm1 - 30.0 * u[i] + 16.0 * fp1 - fp2) * inv12h2
            v2 = u2 / s - u1 * u1 * c / (s * s)
            krad = (c - v2 / w2) / (w * s)
            kang = (c - cot[i] * v1) / (w * s)
            out[i] = w / (krad + (n - 2) * kang)
    return out


@njit(cache=True)
def rk4_step_nb(u, dt, kind, h, n, cot):
    k1 = speed_nb(u, kind, h, n, cot)
    k2 = speed_nb(u + 0.5 * dt * k1, kind, h, n, cot)
    k3 = speed_nb(u + 0.5 * dt * k2, kind, h, n, cot)
    k4 = speed_nb(u + dt * k3, kind, h, n, cot)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


if HAVE_NUMBA:
    d1, d2, fields, speed, rk4_step = d1_nb, d2_nb, fields_nb, speed_nb, rk4_step_nb
else:
    d1, d2, fields, speed, rk4_step = d1_np, d2_np, fields_np, speed_np, rk4_step_np
