"""Confocal ellipsoidal coordinates and the potentials built on them.

The confocal roots u of  x^2/(a^2+u) + y^2/(b^2+u) + z^2/(c^2+u) = 1  are
ordered xi >= -c^2 >= eta >= -b^2 >= zeta >= -a^2.  Plain float roots come
from the trigonometric cubic formula; jets of the roots come from
:func:`levelset.jets.jet_implicit_root` on the cleared-denominator cubic.
Elliptic integrals are evaluated in Carlson symmetric form.
"""
from __future__ import annotations

import numpy as np
from scipy.special import elliprd, elliprf

from . import jets as J

ROOT_NAMES = ("xi", "eta", "zeta")


def cubic_coefficients(points, a, b, c):
    """Monic cubic u^3 + A u^2 + B u + C whose roots are (xi, eta, zeta)."""
    p = np.asarray(points, float)
    x2, y2, z2 = p[..., 0] ** 2, p[..., 1] ** 2, p[..., 2] ** 2
    al, be, ga = a * a, b * b, c * c
    A = al + be + ga - x2 - y2 - z2
    B = al * be + be * ga + ga * al - x2 * (be + ga) - y2 * (al + ga) - z2 * (al + be)
    C = al * be * ga - x2 * be * ga - y2 * al * ga - z2 * al * be
    return A, B, C


def confocal_roots(points, a, b, c, polish: int = 3):
    """Return an array (..., 3) with xi >= eta >= zeta for each point."""
    A, B, C = cubic_coefficients(points, a, b, c)
    p = B - A * A / 3.0
    q = 2.0 * A ** 3 / 27.0 - A * B / 3.0 + C
    p = np.minimum(p, -1e-300)
    m = 2.0 * np.sqrt(-p / 3.0)
    arg = np.clip(3.0 * q / (p * m), -1.0, 1.0)
    phi = np.arccos(arg) / 3.0
    k = np.arange(3)
    roots = m[..., None] * np.cos(phi[..., None] - 2.0 * np.pi * k / 3.0) - (A / 3.0)[..., None]
    for _ in range(polish):
        u = roots
        f = ((u + A[..., None]) * u + B[..., None]) * u + C[..., None]
        df = (3.0 * u + 2.0 * A[..., None]) * u + B[..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(df != 0, f / df, 0.0)
        roots = u - step
    return -np.sort(-roots, axis=-1)


def _cubic_jet(a, b, c):
    al, be, ga = a * a, b * b, c * c

    def g(u, xs):
        x, y, z = xs
        ua, ub, uc = u + al, u + be, u + ga
        return ua * ub * uc - x * x * ub * uc - y * y * ua * uc - z * z * ua * ub

    return g


def root_brackets(points, a, b, c):
    p = np.asarray(points, float)
    r2 = np.sum(p * p, axis=-1)
    return {
        "xi": (-c * c, r2 + 1.0),
        "eta": (-b * b, -c * c),
        "zeta": (-a * a, -b * b),
    }


def root_jet(points, a, b, c, which: str = "xi", order: int = 3) -> J.Jet:
    """Jet of one confocal coordinate as a function of Cartesian position."""
    lo, hi = root_brackets(points, a, b, c)[which]
    return J.jet_implicit_root(_cubic_jet(a, b, c), points, (lo, hi), order=order)


# one-variable profiles --------------------------------------------------------

def _curve_from(fn, s):
    """Evaluate fn on a one-variable jet seeded at s; return its derivatives."""
    t = J.constant(s, 1, 3)
    t.grad[..., 0] = 1.0
    out = fn(t)
    return out.value, out.grad[..., 0], out.hess[..., 0, 0], out.third[..., 0, 0, 0]


def charged_potential_value(xi, a, b, c):
    """Integral of ds / sqrt((s+a^2)(s+b^2)(s+c^2)) from xi to infinity."""
    xi = np.asarray(xi, float)
    return 2.0 * elliprf(xi + a * a, xi + b * b, xi + c * c)


def charged_potential_curve(xi, a, b, c) -> J.Curve1Jet:
    """Value plus xi-derivatives; derivatives are closed form, -1/R_xi etc."""
    al, be, ga = a * a, b * b, c * c

    def dphi(s):
        return -J.power((s + al) * (s + be) * (s + ga), -0.5)

    d1, d2, d3, _ = _curve_from(dphi, xi)
    return J.Curve1Jet(charged_potential_value(xi, a, b, c), d1, d2, d3)


def depolarization_integral(xi, a, b, c):
    """Integral of ds / ((s+a^2) sqrt((s+a^2)(s+b^2)(s+c^2))) from xi to infinity."""
    xi = np.asarray(xi, float)
    return (2.0 / 3.0) * elliprd(xi + b * b, xi + c * c, xi + a * a)


def depolarization_ratio_curve(xi, a, b, c) -> J.Curve1Jet:
    """F(xi) = I(xi) / I(0) with its xi-derivatives."""
    al, be, ga = a * a, b * b, c * c
    norm = depolarization_integral(0.0, a, b, c)

    def dF(s):
        return -J.power((s + al) ** 3 * (s + be) * (s + ga), -0.5) * (1.0 / norm)

    d1, d2, d3, _ = _curve_from(dF, xi)
    return J.Curve1Jet(depolarization_integral(xi, a, b, c) / norm, d1, d2, d3)


def ellipsoid_gaussian_curvature(xi, eta, zeta, a, b, c):
    """Gaussian curvature of the confocal ellipsoid xi = const at (xi, eta, zeta)."""
    return (a * a + xi) * (b * b + xi) * (c * c + xi) / ((xi - eta) ** 2 * (xi - zeta) ** 2)
