"""Level-set curvature identities for p-harmonic functions.

A p-harmonic psi solves div(|grad psi|^(p-2) grad psi) = 0.  The checks run
on the radial profiles r^((p-d)/(p-1)) (log r when p = d); the tangential
terms, which vanish for radial fields, are still evaluated so the code path
is exercised.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as G
from . import jets as J
from .fields import FieldSpec, eval_field
from .flowline import psi_fd

TANGENTIAL_FLOOR = 1e-10


@dataclass(frozen=True)
class PHarmonicCase:
    p: float
    d: int
    alpha: float = 0.0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if not 2 <= self.d <= 6:
            raise ValueError("dimension must be in 2..6")

    @property
    def spec(self) -> FieldSpec:
        return FieldSpec("p_harmonic_radial", self.d, {"p": float(self.p)})


def p_laplace_residual(psi: J.Jet, p: float):
    """Relative residual of Lap(psi) + (p-2) g.Hg/|g|^2 (the expanded p-Laplacian)."""
    g, H = psi.grad, psi.hess
    lap = np.trace(H, axis1=-2, axis2=-1)
    gHg = np.einsum("...i,...ij,...j->...", g, H, g) / np.sum(g * g, axis=-1)
    scale = np.abs(lap) + np.abs(gHg) + np.finfo(float).tiny
    return (lap + (p - 2) * gHg) / scale


def _pieces(case: PHarmonicCase, pts):
    psi = eval_field(case.spec, pts, order=3)
    geo = G.geometry_sample(psi)
    Fj = G.strength_jet(psi)
    return psi, geo, Fj


def _fd_quantities(case):
    p = case.p

    def fn(q):
        geo = G.geometry_sample(eval_field(case.spec, q, order=3))
        return np.stack([geo.trW / geo.F ** (p - 1), geo.R_extrinsic / geo.F ** p])

    return fn


def p_identity_residuals(case: PHarmonicCase, points, dpsi=None) -> dict:
    """Residuals of the three p-harmonic curvature identities at a batch of points."""
    pts = np.atleast_2d(np.asarray(points, float))
    p = case.p
    psi, geo, Fj = _pieces(case, pts)
    F = geo.F
    dF = G.psi_derivative(Fj, psi, 1)
    d2F = G.psi_derivative(Fj, psi, 2)
    lap_s = G.surface_laplacian(J.reciprocal(Fj), psi)
    d1, _, _, _ = psi_fd(case.spec, pts, _fd_quantities(case), dpsi=dpsi, psi_values=psi.value)
    R = geo.R_extrinsic
    return {
        "TrW_p": geo.trW - (1 - p) * dF,
        "R_p": R - (F * lap_s + (1 - p) * F * d2F + (1 - p) ** 2 * dF ** 2),
        "R_p_alt": R - (F * lap_s + F ** p * d1[0]),
    }


def _tangential_field(case: PHarmonicCase):
    """Y = F^(p-1) P grad(trW/F^(p+1))/(p-1) - (2/p) F^(p-2) W P grad(F^-p) as a function of points."""
    p = case.p

    def Y(q):
        psi = eval_field(case.spec, q, order=3)
        geo = G.geometry_sample(psi)
        F = geo.F[..., None]
        P, W = geo.projector, geo.weingarten
        gradF = np.einsum("...ij,...j->...i", psi.hess, psi.grad) / F
        gtr = G.mean_curvature_gradient(psi)
        tr = geo.trW[..., None]
        grad_a = gtr / F ** (p + 1) - (p + 1) * tr * gradF / F ** (p + 2)
        grad_b = -p * gradF / F ** (p + 1)
        ya = np.einsum("...ij,...j->...i", P, grad_a) * F ** (p - 1) / (p - 1)
        yb = np.einsum("...ij,...j->...i", W @ P, grad_b) * F ** (p - 2) * (2.0 / p)
        return ya - yb

    return Y


def tangential_term(case: PHarmonicCase, points, step=1e-3):
    """div_S(Y)/F^(p-1) with div_S Y = tr(DY P) from central differences."""
    pts = np.atleast_2d(np.asarray(points, float))
    psi = eval_field(case.spec, pts, order=3)
    geo = G.geometry_sample(psi)
    Y = _tangential_field(case)
    h = step * (1.0 + np.linalg.norm(pts, axis=-1))
    DY = G.central_jacobian(Y, pts, h)
    div = np.trace(DY @ geo.projector, axis1=-2, axis2=-1)
    return div / geo.F ** (case.p - 1), Y(pts)


def _fp_quantities(case):
    """R/F^p and the analytic psi-derivative of trW/F^(p-1)."""
    p = case.p

    def fn(q):
        psi = eval_field(case.spec, q, order=3)
        geo = G.geometry_sample(psi)
        F = geo.F
        gradF = np.einsum("...ij,...j->...i", psi.hess, psi.grad) / F[..., None]
        gtr = G.mean_curvature_gradient(psi)
        grad_q = gtr / F[..., None] ** (p - 1) - (p - 1) * geo.trW[..., None] * gradF / F[..., None] ** p
        dq = np.sum(grad_q * psi.grad, axis=-1) / F ** 2
        return np.stack([geo.R_extrinsic / F ** p, dq])

    return fn


def r_fp_diff_residual(case: PHarmonicCase, points, dpsi=None, check_tangential=True):
    """Left minus right side of the evolution identity for R/F^p.

    Both psi-derivatives are central differences along field lines; the
    second derivative of trW/F^(p-1) differences its analytic first
    derivative, which keeps cancellation error at the first-derivative level.
    """
    pts = np.atleast_2d(np.asarray(points, float))
    psi = eval_field(case.spec, pts, order=3)
    d1, _, _, _ = psi_fd(case.spec, pts, _fp_quantities(case), dpsi=dpsi, psi_values=psi.value)
    tang, Yval = tangential_term(case, pts)
    if check_tangential:
        scale = 1.0 + np.abs(d1[1])
        if np.any(np.abs(tang) > TANGENTIAL_FLOOR * scale) or np.any(
            np.linalg.norm(Yval, axis=-1) > TANGENTIAL_FLOOR * scale
        ):
            raise AssertionError("tangential terms do not vanish for a radial field")
    return d1[0] - (tang + d1[1])


def _u_gradient(case: PHarmonicCase):
    """Gradient of u = -trW/F^(p-1) as a function of points."""
    p = case.p

    def grad(q):
        psi = eval_field(case.spec, q, order=3)
        geo = G.geometry_sample(psi)
        F = geo.F[..., None]
        gradF = np.einsum("...ij,...j->...i", psi.hess, psi.grad) / F
        gtr = G.mean_curvature_gradient(psi)
        return -gtr / F ** (p - 1) + (p - 1) * geo.trW[..., None] * gradF / F ** p

    return grad


def min_principle_residual(case: PHarmonicCase, points, step=1e-3):
    """Planar minimum-principle identity with kappa = -trW.

    (Lap_S/(p-1) + F^2 d^2/dpsi^2) u + 2 u (p-2)^2/(p-1) (d log F/ds)^2 with
    u = kappa/F^(p-1); the Hessian of u is a central difference of its
    analytic gradient.
    """
    if case.d != 2:
        raise ValueError("the minimum-principle identity is planar (d = 2)")
    p = case.p
    pts = np.atleast_2d(np.asarray(points, float))
    psi = eval_field(case.spec, pts, order=3)
    geo = G.geometry_sample(psi)
    grad = _u_gradient(case)
    h = step * (1.0 + np.linalg.norm(pts, axis=-1))
    hess = G.central_jacobian(grad, pts, h)
    hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    u = J.Jet(-geo.trW / geo.F ** (p - 1), grad(pts), hess)
    F = geo.F
    gradF = np.einsum("...ij,...j->...i", psi.hess, psi.grad) / F[..., None]
    tgF = np.einsum("...ij,...j->...i", geo.projector, gradF)
    dlogF_ds2 = np.sum(tgF * tgF, axis=-1) / F ** 2
    return (
        G.surface_laplacian(u, psi) / (p - 1)
        + F ** 2 * G.psi_derivative(u, psi, 2)
        + 2.0 * u.value * (p - 2) ** 2 / (p - 1) * dlogF_ds2
    )


def alpha_admissible(p: float, alpha: float) -> bool:
    """Membership of alpha in the admissible union of intervals for exponent p."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    if p <= 2:
        return alpha <= p - 2 or 0 <= alpha <= 2 - p or alpha >= 2 * (2 - p)
    return alpha <= 2 * (2 - p) or 2 - p <= alpha <= 0 or alpha >= p - 2


def alpha_conditions(p: float, alpha: float) -> bool:
    """The two quadratic sign conditions the intervals come from."""
    return alpha * (alpha + 2 - p) >= 0 and 2 * (p - 2) ** 2 + alpha * (alpha + 3 * p - 6) >= 0


def admissible_p_range(p_min=1.0 + 1e-3, p_max=6.0, step=1e-3):
    """Grid values of p for which alpha = 1 - p is admissible."""
    grid = np.round(np.arange(p_min, p_max + step / 2, step), 12)
    return grid[[alpha_admissible(p, 1 - p) for p in grid]]
