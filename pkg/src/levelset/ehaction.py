"""Einstein-Hilbert action of the level spheres of a point-charge potential.

For phi = r^(1-n) in R^(n+1) the level set {phi = const} is the sphere of
radius r = phi^(-1/(n-1)).  The action A(phi) is the integral of the scalar
curvature over that sphere; its second derivative is compared with the
integral formula built from principal-frame tensors.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import geometry as G
from .fields import FieldSpec, eval_field

CHUNK = 16384
SECOND_INTEGRAL_FLOOR = 1e-12
COMB_ID_RTOL = 1e-12


class UnsupportedDimension(ValueError):
    pass


def sphere_measure(n: int) -> float:
    """Surface measure of the unit n-sphere in R^(n+1)."""
    return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def sphere_quadrature(n: int, order: int = 16):
    """Product Gauss-Legendre rule on the unit n-sphere, n = 2..4.

    Uses hyperspherical angles theta_1..theta_{n-1} in [0, pi] with weights
    sin^(n-j)(theta_j), and an azimuth in [0, 2 pi).  Returns (nodes, weights)
    with nodes of shape (M, n+1).
    """
    if n not in (2, 3, 4):
        raise UnsupportedDimension(f"sphere dimension {n} not in 2..4")
    if order < 8:
        raise ValueError("quadrature order must be at least 8")
    x, w = np.polynomial.legendre.leggauss(order)
    theta = 0.5 * math.pi * (x + 1.0)
    wt = 0.5 * math.pi * w
    az = math.pi * (x + 1.0)
    waz = math.pi * w
    grids = np.meshgrid(*([theta] * (n - 1) + [az]), indexing="ij")
    wgrids = np.meshgrid(*([wt] * (n - 1) + [waz]), indexing="ij")
    angles = [g.ravel() for g in grids]
    weights = np.ones_like(angles[0])
    for j in range(n - 1):
        weights = weights * wgrids[j].ravel() * np.sin(angles[j]) ** (n - 1 - j)
    weights = weights * wgrids[-1].ravel()
    coords = []
    s = np.ones_like(angles[0])
    for j in range(n - 1):
        coords.append(s * np.cos(angles[j]))
        s = s * np.sin(angles[j])
    coords.append(s * np.cos(angles[-1]))
    coords.append(s * np.sin(angles[-1]))
    return np.stack(coords, axis=-1), weights


@dataclass(frozen=True)
class SphereFamily:
    ambient_dim: int
    quadrature_order: int = 16

    def __post_init__(self):
        if self.ambient_dim not in (3, 4, 5):
            raise UnsupportedDimension(f"ambient dimension {self.ambient_dim} not in 3..5")
        if self.quadrature_order < 8:
            raise ValueError("quadrature order must be at least 8")

    @property
    def n(self) -> int:
        return self.ambient_dim - 1

    @property
    def potential(self) -> FieldSpec:
        return FieldSpec("point_charge", self.ambient_dim)

    def radius(self, phi):
        phi = np.asarray(phi, float)
        if np.any(phi <= 0):
            raise ValueError("level value must be positive")
        return phi ** (-1.0 / (self.n - 1))

    def quadrature(self):
        return _cached_quadrature(self.n, self.quadrature_order)


_QCACHE: dict = {}


def _cached_quadrature(n, order):
    key = (n, order)
    if key not in _QCACHE:
        _QCACHE[key] = sphere_quadrature(n, order)
    return _QCACHE[key]


def _integrate(family: SphereFamily, phi: float, integrand):
    """Sum of weight * r^n * integrand(psi_jet) over the quadrature nodes."""
    nodes, weights = family.quadrature()
    r = float(family.radius(phi))
    total = 0.0
    for start in range(0, len(weights), CHUNK):
        pts = r * nodes[start:start + CHUNK]
        psi = eval_field(family.potential, pts, order=2)
        total += float(np.dot(weights[start:start + CHUNK], integrand(psi)))
    return total * r ** family.n


def _scalar_curvature(psi):
    _, tr, tr2 = G.curvature_traces(psi)
    return tr * tr - tr2


def eh_action(family: SphereFamily, phi: float) -> float:
    return _integrate(family, phi, _scalar_curvature)


def _a2_integrands(psi):
    geo = G.geometry_sample(psi)
    k = geo.principal_curvatures
    E = geo.F
    ft = G.frame_tensors(k)
    bracket = (
        np.sum(k, -1) * np.sum(ft.einstein_diag * k, -1) / 3.0
        - np.sum(ft.ricci_diag ** 2, -1)
        + 0.5 * ft.R ** 2
    )
    if k.shape[-1] >= 3:
        _, rhs = G.comb_id_check(k)
        scale = np.maximum(np.abs(rhs), np.finfo(float).tiny)
        if np.any(np.abs(bracket - rhs) > COMB_ID_RTOL * scale + 1e-300):
            raise AssertionError("principal-curvature bracket disagrees with its symmetric-sum form")
    W, P = geo.weingarten, geo.projector
    tr = geo.trW[..., None, None]
    ric = tr * W - W @ W
    Gt = ric - 0.5 * geo.R_extrinsic[..., None, None] * P
    # grad(1/E) = -grad(E)/E^2 with grad(E) = H g / E
    gradE = np.einsum("...ij,...j->...i", psi.hess, psi.grad) / E[..., None]
    t = np.einsum("...ij,...j->...i", P, -gradE / E[..., None] ** 2)
    second = np.einsum("...i,...ij,...j->...", t, Gt, t)
    return bracket / E ** 2, second


def a2_integral(family: SphereFamily, phi: float):
    """6 (first integral - second integral); also returns the second integral."""
    parts = {}

    def first(psi):
        b, s = _a2_integrands(psi)
        parts.setdefault("second", []).append(s)
        return b

    nodes, weights = family.quadrature()
    I1 = _integrate(family, phi, first)
    r = float(family.radius(phi))
    s_all = np.concatenate(parts["second"])
    I2 = float(np.dot(weights, s_all)) * r ** family.n
    if abs(I2) > SECOND_INTEGRAL_FLOOR * max(1.0, abs(I1)):
        raise AssertionError("tangential-gradient integral does not vanish on a sphere family")
    return 6.0 * (I1 - I2), I2


def fd_step(phi: float) -> float:
    return 1e-2 * phi


def _check(family: SphereFamily, phi: float, h: float | None = None):
    h = fd_step(phi) if h is None else h
    if phi - 2 * h <= 0:
        raise ValueError("finite-difference stencil leaves the admissible range")
    A = [eh_action(family, phi + s * h) for s in (-2, -1, 0, 1, 2)]
    a2_fd = (-A[0] + 16 * A[1] - 30 * A[2] + 16 * A[3] - A[4]) / (12 * h * h)
    a2_int, _ = a2_integral(family, phi)
    return A[2], a2_fd, a2_int


def eh_second_derivative_check(family: SphereFamily, phi: float, h: float | None = None):
    """(A2_fd, A2_integral, residual) at level value phi.

    A2_fd is the five-point second difference of the action with step h
    (default 1e-2 phi); A2_integral is the principal-frame integral form.
    """
    _, a2_fd, a2_int = _check(family, phi, h)
    return a2_fd, a2_int, a2_fd - a2_int


@dataclass
class EHActionTable:
    ambient_dim: int
    rows: list = field(default_factory=list)

    COLUMNS = ("phi", "r", "action", "a2_fd", "a2_integral", "residual")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for row in self.rows:
            w.writerow(["%.17g" % v for v in row])
        return buf.getvalue()


def phi_grid(phi_min: float, phi_max: float, samples: int):
    if not 0 < phi_min <= phi_max:
        raise ValueError("need 0 < phi_min <= phi_max")
    if samples < 1:
        raise ValueError("need at least one sample")
    if samples == 1:
        return np.array([phi_min])
    return np.geomspace(phi_min, phi_max, samples)


def eh_table(family: SphereFamily, phis, jobs: int = 1) -> EHActionTable:
    """Rows (phi, r, A, A2_fd, A2_integral, residual); rows keep the order of ``phis``."""
    phis = [float(p) for p in phis]

    def row(phi):
        a, a2_fd, a2_int = _check(family, phi)
        return (phi, float(family.radius(phi)), a, a2_fd, a2_int, a2_fd - a2_int)

    table = EHActionTable(family.ambient_dim)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            table.rows = list(pool.map(row, phis))
    else:
        table.rows = [row(phi) for phi in phis]
    return table


def convexity_scan(family: SphereFamily, phi_range, samples: int = 50) -> float:
    """Minimum of the integral form of A'' over a geometric grid of level values."""
    lo, hi = phi_range
    return min(a2_integral(family, float(phi))[0] for phi in phi_grid(lo, hi, samples))
