"""Field lines parametrized by the level value and derivatives along them.

A field line solves dr/dtau = grad(psi)/|grad(psi)|^2, so psi(r(tau)) =
psi(r(0)) + tau.  Derivatives of a quantity with respect to psi are taken by
five-point central differences at two step sizes and combined by
Richardson extrapolation.
"""
from __future__ import annotations

import numpy as np

OFFSETS = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)
SUBSTEPS = 4


def _velocity(spec, pts):
    from .fields import eval_field

    g = eval_field(spec, pts, order=1).grad
    return g / np.sum(g * g, axis=-1, keepdims=True)


def rk4(spec, pts, dtau, steps: int):
    """Integrate ``steps`` classical RK4 steps of size ``dtau`` (per point)."""
    x = np.array(pts, float)
    dt = np.asarray(dtau, float)[..., None]
    for _ in range(steps):
        k1 = _velocity(spec, x)
        k2 = _velocity(spec, x + 0.5 * dt * k1)
        k3 = _velocity(spec, x + 0.5 * dt * k2)
        k4 = _velocity(spec, x + dt * k3)
        x = x + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    return x


def default_step(psi_values):
    return 1e-3 * np.maximum(np.abs(psi_values), 1.0)


def trace_offsets(spec, pts, h):
    """Points on the field lines through ``pts`` at level offsets OFFSETS * h."""
    out = {}
    for sign in (1.0, -1.0):
        x = pts
        prev = 0.0
        for s in (0.5, 1.0, 2.0):
            x = rk4(spec, x, sign * (s - prev) * h / SUBSTEPS, SUBSTEPS)
            out[sign * s] = x
            prev = s
    return [out[s] for s in OFFSETS]


def psi_fd(spec, pts, fn, dpsi=None, psi_values=None):
    """First and second psi-derivatives of ``fn`` along field lines.

    ``fn(points)`` returns an array whose last axis runs over the points.
    Returns (d1, d2, err1, err2) where err compares the h and h/2 stencils.
    """
    from .fields import field_value

    pts = np.atleast_2d(np.asarray(pts, float))
    n = len(pts)
    if psi_values is None:
        psi_values = field_value(spec, pts)
    h = default_step(psi_values) if dpsi is None else np.broadcast_to(np.asarray(dpsi, float), (n,))
    shifted = trace_offsets(spec, pts, h)
    allpts = np.concatenate([pts] + shifted)
    vals = np.asarray(fn(allpts))
    vals = vals.reshape(vals.shape[:-1] + (7, n))
    f0 = vals[..., 0, :]
    fm2, fm1, fmh, fph, fp1, fp2 = (vals[..., i, :] for i in range(1, 7))
    d1_h = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h)
    d1_hh = (-fp1 + 8 * fph - 8 * fmh + fm1) / (6 * h)
    d2_h = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h ** 2)
    d2_hh = (-fp1 + 16 * fph - 30 * f0 + 16 * fmh - fm1) / (3 * h ** 2)
    d1 = (16 * d1_hh - d1_h) / 15
    d2 = (16 * d2_hh - d2_h) / 15
    return d1, d2, np.abs(d1_hh - d1_h), np.abs(d2_hh - d2_h)
