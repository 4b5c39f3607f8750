"""Extrinsic geometry of level sets {psi = C} computed from jets of psi.

Orientation: the unit normal is n = -grad(psi)/F with F = |grad(psi)|, and
the Weingarten map is W = P Hess(psi) P / F with P = I - n n^T.  With this
choice the level spheres of |x| have positive principal curvatures.

All functions accept batched jets (leading shape (N,)) and return arrays.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import jets as J

F_MIN = 1e-8


class CriticalPoint(ValueError):
    """The gradient of psi is (numerically) zero."""


def _strength(psi: J.Jet, f_min: float = F_MIN):
    F = np.linalg.norm(psi.grad, axis=-1)
    if np.any(~np.isfinite(F)):
        raise CriticalPoint("non-finite gradient")
    if np.any(F < f_min):
        raise CriticalPoint(f"|grad psi| = {np.min(F):.3g} below F_min = {f_min:g}")
    return F


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _mv(m, v):
    return np.einsum("...ij,...j->...i", m, v)


def _trace(m):
    return np.trace(m, axis1=-2, axis2=-1)


def projector(normal):
    d = normal.shape[-1]
    return np.eye(d) - normal[..., :, None] * normal[..., None, :]


@dataclass
class GeometrySample:
    F: np.ndarray
    V: np.ndarray
    normal: np.ndarray
    projector: np.ndarray
    weingarten: np.ndarray
    principal_curvatures: np.ndarray
    trW: np.ndarray
    trW2: np.ndarray
    R_extrinsic: np.ndarray
    R_formula: np.ndarray


def principal_curvatures(W, normal):
    """Eigenvalues of W on the tangent space, sorted ascending.

    The eigenvector most aligned with the normal is discarded; W n = 0 makes
    the corresponding eigenvalue vanish up to round-off.
    """
    vals, vecs = np.linalg.eigh(W)
    align = np.abs(np.einsum("...i,...ij->...j", normal, vecs))
    drop = np.argmax(align, axis=-1)
    d = W.shape[-1]
    keep = np.arange(d) != drop[..., None]
    k = vals[keep].reshape(vals.shape[:-1] + (d - 1,))
    dropped = np.take_along_axis(vals, drop[..., None], -1)[..., 0]
    scale = np.linalg.norm(W, axis=(-2, -1))
    if np.any(np.abs(dropped) > 1e-8 * np.maximum(scale, 1.0)):
        raise np.linalg.LinAlgError("normal direction is not in the kernel of W")
    return np.sort(k, axis=-1)


def geometry_sample(jet: J.Jet, f_min: float = F_MIN) -> GeometrySample:
    """Extrinsic geometry at each point; R_formula is NaN for second-order jets."""
    F = _strength(jet, f_min)
    g, H = jet.grad, jet.hess
    n = -g / F[..., None]
    P = projector(n)
    W = P @ H @ P / F[..., None, None]
    W = 0.5 * (W + np.swapaxes(W, -1, -2))
    k = principal_curvatures(W, n)
    trW = _trace(W)
    trW2 = np.sum(W * W, axis=(-2, -1))
    return GeometrySample(
        F=F,
        V=_trace(H),
        normal=n,
        projector=P,
        weingarten=W,
        principal_curvatures=k,
        trW=trW,
        trW2=trW2,
        R_extrinsic=trW * trW - trW2,
        R_formula=scalar_curvature_formula(jet, f_min) if jet.order >= 3 else np.full(F.shape, np.nan),
    )


def curvature_traces(jet: J.Jet, f_min: float = F_MIN):
    """(F, trW, tr(W^2)) without an eigen-decomposition."""
    F = _strength(jet, f_min)
    g, H = jet.grad, jet.hess
    n = -g / F[..., None]
    W = projector(n) @ H @ projector(n) / F[..., None, None]
    return F, _trace(W), np.sum(W * np.swapaxes(W, -1, -2), axis=(-2, -1))


def scalar_curvature_formula(jet: J.Jet, f_min: float = F_MIN):
    """-Lap(log F) + div(V grad(psi) / F^2), from ambient derivatives only."""
    if jet.order < 3:
        raise ValueError("scalar curvature formula needs a third-order jet")
    F = _strength(jet, f_min)
    g, H, T = jet.grad, jet.hess, jet.third
    V = _trace(H)
    gradF = _mv(H, g) / F[..., None]
    hessF = (H @ H + np.einsum("...ijk,...k->...ij", T, g) - gradF[..., :, None] * gradF[..., None, :]) / F[..., None, None]
    lap_log_F = _trace(hessF) / F - _dot(gradF, gradF) / F ** 2
    gradV = np.einsum("...ijj->...i", T)
    div = _dot(gradV, g) / F ** 2 + V * V / F ** 2 - 2 * V * _dot(g, gradF) / F ** 3
    return -lap_log_F + div


# jet-level helpers ---------------------------------------------------------------

def gradient_jets(u: J.Jet):
    return [J.partial(u, i) for i in range(u.dim)]


def strength_jet(psi: J.Jet, f_min: float = F_MIN) -> J.Jet:
    """Jet of F = |grad psi| (one order below psi)."""
    _strength(psi, f_min)
    gs = gradient_jets(psi)
    s = gs[0] * gs[0]
    for gi in gs[1:]:
        s = s + gi * gi
    return J.sqrt(s)


def laplacian_jet(psi: J.Jet) -> J.Jet:
    """Jet of Lap(psi) (two orders below psi)."""
    out = None
    for i in range(psi.dim):
        term = J.partial(J.partial(psi, i), i)
        out = term if out is None else out + term
    return out


def dpsi_jet(u: J.Jet, psi: J.Jet, f_min: float = F_MIN) -> J.Jet:
    """Jet of du/dpsi = (grad u . grad psi)/F^2 (one order below its inputs)."""
    _strength(psi, f_min)
    gs, us = gradient_jets(psi), gradient_jets(u)
    num = us[0] * gs[0]
    den = gs[0] * gs[0]
    for ui, gi in zip(us[1:], gs[1:]):
        num = num + ui * gi
        den = den + gi * gi
    return num / den


def divergence(components) -> np.ndarray:
    """Value of sum_i d(q_i)/dx_i for a list of jets q_i."""
    return sum(q.grad[..., i] for i, q in enumerate(components))


def psi_derivative(u: J.Jet, psi: J.Jet, order: int = 1, f_min: float = F_MIN):
    """First or second derivative of u along the field-line parametrization by psi."""
    if u.dim != psi.dim:
        raise ValueError("u and psi must share the ambient dimension")
    F = _strength(psi, f_min)
    if order == 1:
        return _dot(u.grad, psi.grad) / F ** 2
    if order == 2:
        w = dpsi_jet(u, psi, f_min)
        return _dot(w.grad, psi.grad) / F ** 2
    raise ValueError("order must be 1 or 2")


def surface_laplacian(u: J.Jet, psi: J.Jet, f_min: float = F_MIN):
    """Laplace-Beltrami operator of the level set applied to u."""
    F = _strength(psi, f_min)
    g, H = psi.grad, psi.hess
    n = -g / F[..., None]
    P = projector(n)
    gradF = _mv(H, g) / F[..., None]
    tangential = _dot(_mv(P, gradF), _mv(P, u.grad)) / F
    return (
        _trace(u.hess)
        - F ** 2 * psi_derivative(u, psi, 2, f_min)
        + tangential
        - _trace(H) * psi_derivative(u, psi, 1, f_min)
    )


def surface_covariant_hessian(u: J.Jet, psi: J.Jet, f_min: float = F_MIN):
    """Covariant Hessian of u on the level set as a tangential d x d matrix."""
    F = _strength(psi, f_min)
    n = -psi.grad / F[..., None]
    P = projector(n)
    W = P @ psi.hess @ P / F[..., None, None]
    return P @ u.hess @ P + _dot(n, u.grad)[..., None, None] * W


# principal-frame tensors -------------------------------------------------------

@dataclass
class FrameTensors:
    principal_curvatures: np.ndarray
    ricci_diag: np.ndarray
    einstein_diag: np.ndarray
    beta_diag: np.ndarray
    R: np.ndarray


def frame_tensors(k) -> FrameTensors:
    k = np.asarray(k, float)
    if not np.all(np.isfinite(k)):
        raise ValueError("principal curvatures must be finite")
    s = np.sum(k, axis=-1, keepdims=True)
    ricci = k * (s - k)
    R = np.sum(ricci, axis=-1)
    return FrameTensors(k, ricci, ricci - 0.5 * R[..., None], s - k, R)


def comb_id_check(k):
    """Both sides of the quartic principal-curvature identity.

    lhs = (1/3) sum(k) sum(G_i k_i) - sum(Ric_i^2) + R^2/2
    rhs = sum_l k_l^2 sum_{i<j, i,j != l} k_i k_j + 8 sum_{i<j<l<m} k_i k_j k_l k_m
    """
    k = np.asarray(k, float)
    n = k.shape[-1]
    if not 3 <= n <= 5:
        raise ValueError("comb_id_check needs 3 to 5 principal curvatures")
    ft = frame_tensors(k)
    lhs = (
        np.sum(k, -1) * np.sum(ft.einstein_diag * k, -1) / 3.0
        - np.sum(ft.ricci_diag ** 2, -1)
        + 0.5 * ft.R ** 2
    )
    rhs = np.zeros(k.shape[:-1])
    for l in range(n):
        for i, j in itertools.combinations([m for m in range(n) if m != l], 2):
            rhs = rhs + k[..., i] * k[..., j] * k[..., l] ** 2
    for i, j, l, m in itertools.combinations(range(n), 4):
        rhs = rhs + 8.0 * k[..., i] * k[..., j] * k[..., l] * k[..., m]
    return lhs, rhs


# identity residuals -----------------------------------------------------------

DEFAULT_TOL = 1e-7
RELAXED_TOL = 1e-5


@dataclass
class IdentityReport:
    points: np.ndarray
    residuals: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @property
    def passed(self) -> dict:
        return {k: np.abs(v) <= self.tolerances[k] for k, v in self.residuals.items()}

    @property
    def all_pass(self) -> bool:
        return all(bool(np.all(p)) for p in self.passed.values())

    def max_abs(self) -> dict:
        return {k: float(np.max(np.abs(v))) if np.size(v) else 0.0 for k, v in self.residuals.items()}

    def add(self, name, residual, tol):
        self.residuals[name] = np.asarray(residual, float)
        self.tolerances[name] = float(tol)


def default_tolerance(spec) -> float:
    return RELAXED_TOL if spec.definition.value_accuracy > 1e-15 else DEFAULT_TOL


@dataclass
class _Derived:
    psi: J.Jet
    geo: GeometrySample
    Fj: J.Jet
    logF: J.Jet
    invF: J.Jet
    lap_logF: np.ndarray
    div_term: np.ndarray


def _derived(psi: J.Jet, f_min=F_MIN) -> _Derived:
    geo = geometry_sample(psi, f_min)
    Fj = strength_jet(psi, f_min)
    V = laplacian_jet(psi)
    gs = gradient_jets(psi)
    F2 = Fj * Fj
    div_term = divergence([V * gi / F2 for gi in gs])
    logF = J.log(Fj)
    return _Derived(psi, geo, Fj, logF, J.reciprocal(Fj), logF.laplacian(), div_term)


def identity_residuals(spec, points, tolerances=None, f_min=F_MIN) -> IdentityReport:
    """Residuals of the pointwise level-set identities at a batch of points."""
    from .fields import eval_field

    pts = np.atleast_2d(np.asarray(points, float))
    psi = eval_field(spec, pts, order=3)
    D = _derived(psi, f_min)
    geo = D.geo
    tol = default_tolerance(spec)
    over = dict(tolerances or {})
    rep = IdentityReport(pts)

    def add(name, value):
        rep.add(name, value, over.get(name, tol))

    add("nH", geo.trW + psi_derivative(D.Fj, psi, 1) - geo.V / geo.F)
    rhs = (
        -geo.F * surface_laplacian(D.invF, psi)
        + geo.F ** 2 * psi_derivative(D.logF, psi, 2)
        - geo.trW * geo.V / geo.F
        + geo.V ** 2 / geo.F ** 2
    )
    add("lap_lnF", D.lap_logF - rhs)
    add("main", D.lap_logF + geo.R_extrinsic - D.div_term)
    add("formula_vs_extrinsic", geo.R_formula - geo.R_extrinsic)
    d = pts.shape[-1]
    if d == 2:
        add("2d_triv", D.lap_logF - D.div_term)
    if d == 3:
        k = geo.principal_curvatures
        add("gauss", 2.0 * k[..., 0] * k[..., 1] - (D.div_term - D.lap_logF))
    if spec.name == "monge_graph":
        k = geo.principal_curvatures
        fx, fy = -psi.grad[..., 0], -psi.grad[..., 1]
        Hf = -psi.hess[..., :2, :2]
        K = np.linalg.det(Hf) / (1.0 + fx ** 2 + fy ** 2) ** 2
        add("monge_K", k[..., 0] * k[..., 1] - K)
    return rep


# diffeomorphic reparametrization ------------------------------------------------------

def diffeo_family(name: str, lam=None):
    """Curve1Jet factory t -> f(t) for the named reparametrization.

    ``lam`` is the factor of "scale" (default 2) and the rate of "exp" (default 1).
    """
    if lam is None:
        lam = 1.0 if name == "exp" else 2.0
    if name == "t":
        return lambda t: J.Curve1Jet(t, np.ones_like(t), np.zeros_like(t), np.zeros_like(t))
    if name == "-t":
        return lambda t: J.Curve1Jet(-t, -np.ones_like(t), np.zeros_like(t), np.zeros_like(t))
    if name == "t^3+t":
        return lambda t: J.Curve1Jet(t ** 3 + t, 3 * t ** 2 + 1, 6 * t, 6 * np.ones_like(t))
    if name == "exp":
        # exp(lam (t - t0)) with t0 the level value at each point: a constant
        # factor leaves the identities unchanged and avoids overflow
        def f(t):
            one = np.ones_like(t)
            return J.Curve1Jet(one, lam * one, lam ** 2 * one, lam ** 3 * one)

        return f
    if name == "scale":
        return lambda t: J.Curve1Jet(lam * t, lam * np.ones_like(t), np.zeros_like(t), np.zeros_like(t))
    raise ValueError(f"unknown reparametrization {name!r}")


DIFFEO_FAMILIES = ("t", "-t", "t^3+t", "exp")


def diffeo_residuals_jet(psi: J.Jet, f, f_min=F_MIN):
    """(mean_residual, scalar_residual) for u = f(psi); R and trW come from psi."""
    curve = f(psi.value)
    if np.any(np.asarray(curve.d1) == 0):
        raise ValueError("reparametrization has vanishing derivative")
    u = J.compose(curve, psi)
    geo = geometry_sample(psi, f_min)
    Fu = strength_jet(u, f_min)
    lap_u = _trace(u.hess)
    mean = np.sign(curve.d1) * geo.trW + psi_derivative(Fu, u, 1) - lap_u / Fu.value
    L = laplacian_jet(u)
    F2 = Fu * Fu
    div = divergence([L * gi / F2 for gi in gradient_jets(u)])
    scalar = J.log(Fu).laplacian() + geo.R_extrinsic - div
    return mean, scalar


def diffeo_residuals(spec, points, f, f_min=F_MIN):
    from .fields import eval_field

    psi = eval_field(spec, np.atleast_2d(np.asarray(points, float)), order=3)
    if f == "exp":
        # rate 1/max(F, 1) keeps f''F/f' comparable to the curvature terms
        f = diffeo_family(f, 1.0 / np.maximum(_strength(psi, f_min), 1.0))
    elif isinstance(f, str):
        f = diffeo_family(f)
    return diffeo_residuals_jet(psi, f, f_min)


# evolution along field lines ------------------------------------------------------------

def mean_curvature_rate(psi: J.Jet, f_min=F_MIN):
    """Right side of the mean-curvature evolution: -Lap_S(1/F) - tr(W^2)/F."""
    geo = geometry_sample(psi, f_min)
    invF = J.reciprocal(strength_jet(psi, f_min))
    return -surface_laplacian(invF, psi, f_min) - geo.trW2 / geo.F


def scalar_curvature_rate(psi: J.Jet, f_min=F_MIN):
    """Right side of the scalar-curvature evolution in divergence-free beta form.

    -2 G:W/F - trW R/F - 2 beta:Hess_S(1/F), with Ric = trW W - W^2,
    G = Ric - (R/2) P and beta = trW P - W, all as ambient tangential tensors.
    """
    geo = geometry_sample(psi, f_min)
    W, P, F = geo.weingarten, geo.projector, geo.F
    tr = geo.trW[..., None, None]
    R = geo.R_extrinsic
    ric = tr * W - W @ W
    G = ric - 0.5 * R[..., None, None] * P
    beta = tr * P - W
    invF = J.reciprocal(strength_jet(psi, f_min))
    hs = surface_covariant_hessian(invF, psi, f_min)
    GW = np.sum(G * W, axis=(-2, -1))
    return -2.0 * GW / F - geo.trW * R / F - 2.0 * np.sum(beta * hs, axis=(-2, -1))


EVOLUTION_TARGET = 1e-6
MAX_HALVINGS = 10


def evolution_residuals(spec, points, dpsi=None, f_min=F_MIN, target=EVOLUTION_TARGET):
    """(h_evolv_residual, r_evolv_residual, estimates) at a batch of points.

    Left sides come from Richardson-controlled central differences of trW
    and R along field lines; ``estimates`` holds the difference between the
    two step sizes for each derivative.  With the default step, points whose
    estimate exceeds ``target * (1 + |derivative|)`` get their step halved
    while the estimate keeps improving (``target=None`` disables this).
    """
    from .fields import eval_field
    from .flowline import default_step, psi_fd

    pts = np.atleast_2d(np.asarray(points, float))
    psi = eval_field(spec, pts, order=3)

    def quantities(q):
        geo = geometry_sample(eval_field(spec, q, order=3), f_min)
        return np.stack([geo.trW, geo.R_extrinsic])

    adaptive = dpsi is None and target is not None
    h = default_step(psi.value) if dpsi is None else np.broadcast_to(np.asarray(dpsi, float), psi.value.shape)
    d1, _, err1, _ = psi_fd(spec, pts, quantities, dpsi=h, psi_values=psi.value)
    err1 = err1.copy()
    active = np.ones(len(pts), bool)
    for _ in range(MAX_HALVINGS if adaptive else 0):
        active &= np.max(err1 / (1.0 + np.abs(d1)), axis=0) > target
        if not np.any(active):
            break
        h = np.where(active, 0.5 * h, h)
        d1b, _, eb, _ = psi_fd(spec, pts[active], quantities, dpsi=h[active], psi_values=psi.value[active])
        better = np.max(eb, axis=0) < np.max(err1[:, active], axis=0)
        idx = np.flatnonzero(active)
        d1[:, idx[better]], err1[:, idx[better]] = d1b[:, better], eb[:, better]
        active[idx[~better]] = False
    h_res = d1[0] - mean_curvature_rate(psi, f_min)
    r_res = d1[1] - scalar_curvature_rate(psi, f_min)
    return h_res, r_res, {"h_evolv": err1[0], "dR_phi1": err1[1]}


def mean_curvature_gradient(jet: J.Jet, f_min: float = F_MIN):
    """Ambient gradient of trW = V/F - (g.Hg)/F^3 (needs a third-order jet)."""
    F = _strength(jet, f_min)
    g, H, T = jet.grad, jet.hess, jet.third
    V = _trace(H)
    Hg = _mv(H, g)
    gHg = _dot(g, Hg)
    gradF = Hg / F[..., None]
    gradV = np.einsum("...ijj->...i", T)
    grad_gHg = 2.0 * _mv(H, Hg) + np.einsum("...ijk,...i,...j->...k", T, g, g)
    F_ = F[..., None]
    return (
        gradV / F_
        - V[..., None] * gradF / F_ ** 2
        - grad_gHg / F_ ** 3
        + 3.0 * gHg[..., None] * gradF / F_ ** 4
    )


def central_jacobian(fn, pts, step):
    """Fourth-order central-difference Jacobian of a vector field fn(points) -> (N, m).

    Returns J[n, a, i] = d fn_a / d x_i.
    """
    pts = np.atleast_2d(np.asarray(pts, float))
    d = pts.shape[-1]
    h = np.broadcast_to(np.asarray(step, float), (len(pts),))[:, None]
    cols = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        f2, f1, m1, m2 = (fn(pts + s * h * e) for s in (2.0, 1.0, -1.0, -2.0))
        cols.append((-f2 + 8 * f1 - 8 * m1 + m2) / (12 * h))
    return np.stack(cols, axis=-1)
