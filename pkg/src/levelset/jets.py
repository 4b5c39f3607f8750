"""Taylor-mode derivative propagation through third order.

A :class:`Jet` carries the value of a scalar function together with its
gradient, Hessian and third-derivative tensor at one point or at a batch of
points.  Arrays are dense: ``grad[..., i]``, ``hess[..., i, j]`` and
``third[..., i, j, k]`` with an arbitrary leading batch shape.  Jets of
lower order (``third is None`` or ``hess is None``) arise when a jet is
differentiated once (see :func:`partial`); arithmetic truncates to the
lowest order among its operands.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Jet",
    "Curve1Jet",
    "DomainError",
    "DegenerateRootError",
    "NoSignChangeError",
    "constant",
    "jet_seed",
    "seed_point",
    "partial",
    "compose",
    "exp",
    "log",
    "sqrt",
    "sin",
    "cos",
    "tan",
    "atan",
    "atan2",
    "sinh",
    "cosh",
    "power",
    "reciprocal",
    "jet_implicit_root",
]

MAX_DIM = 6


class DomainError(ValueError):
    """An elementary function was applied outside its domain."""

    def __init__(self, function: str, detail: str = ""):
        self.function = function
        msg = f"{function}: argument outside domain"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NoSignChangeError(ValueError):
    pass


class DegenerateRootError(ValueError):
    pass


def _sym3(x):
    """Return x_ijk + x_jik + x_kij for x_ijk = a_i B_jk (B symmetric)."""
    return x + np.swapaxes(x, -3, -2) + np.moveaxis(x, -3, -1)


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


def _outer3(a, b, c):
    return a[..., :, None, None] * b[..., None, :, None] * c[..., None, None, :]


@functools.lru_cache(maxsize=None)
def _sorted_index(d: int, rank: int):
    """Index grids mapping every multi-index to its sorted representative."""
    grids = np.meshgrid(*([np.arange(d)] * rank), indexing="ij")
    return tuple(np.sort(np.stack(grids), axis=0))


def canonical(t, rank: int):
    """Copy each entry from its sorted-index slot so symmetry holds bit for bit."""
    return t[(Ellipsis,) + _sorted_index(t.shape[-1], rank)]


def symmetrize_hess(h):
    return canonical(0.5 * (h + np.swapaxes(h, -1, -2)), 2)


def symmetrize_third(t):
    perms = [
        t,
        np.transpose(t, _axes(t, (0, 2, 1))),
        np.transpose(t, _axes(t, (1, 0, 2))),
        np.transpose(t, _axes(t, (1, 2, 0))),
        np.transpose(t, _axes(t, (2, 0, 1))),
        np.transpose(t, _axes(t, (2, 1, 0))),
    ]
    return canonical(sum(perms) / 6.0, 3)


def _axes(t, perm):
    lead = t.ndim - 3
    return tuple(range(lead)) + tuple(lead + p for p in perm)


class Jet:
    """Value and partial derivatives (orders 1..3) of a scalar field."""

    __slots__ = ("value", "grad", "hess", "third")
    __array_priority__ = 100.0

    def __init__(self, value, grad, hess=None, third=None):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = None if hess is None else np.asarray(hess, dtype=float)
        self.third = None if (third is None or hess is None) else np.asarray(third, dtype=float)

    @property
    def dim(self) -> int:
        return self.grad.shape[-1]

    @property
    def order(self) -> int:
        if self.hess is None:
            return 1
        return 2 if self.third is None else 3

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Jet(dim={self.dim}, order={self.order}, shape={self.shape})"

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.value, self.grad, self.hess if order >= 2 else None, None)

    def laplacian(self):
        return np.trace(self.hess, axis1=-2, axis2=-1)

    def __getitem__(self, idx):
        """Select points from the batch."""
        return Jet(
            self.value[idx],
            self.grad[idx],
            None if self.hess is None else self.hess[idx],
            None if self.third is None else self.third[idx],
        )

    # arithmetic -----------------------------------------------------
    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise ValueError(f"jet dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return constant(other, self.dim, self.order, np.shape(self.value))

    def __neg__(self):
        return Jet(-self.value, -self.grad,
                   None if self.hess is None else -self.hess,
                   None if self.third is None else -self.third)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.value + np.asarray(other, float)[...], self.grad, self.hess, self.third)
        other = self._lift(other)
        order = min(self.order, other.order)
        a, b = self.truncate(order), other.truncate(order)
        return Jet(
            a.value + b.value,
            a.grad + b.grad,
            None if order < 2 else a.hess + b.hess,
            None if order < 3 else a.third + b.third,
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other, float))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            s = np.asarray(other, dtype=float)
            return Jet(
                self.value * s,
                self.grad * s[..., None],
                None if self.hess is None else self.hess * s[..., None, None],
                None if self.third is None else self.third * s[..., None, None, None],
            )
        other = self._lift(other)
        order = min(self.order, other.order)
        a, b = self.truncate(order), other.truncate(order)
        av, bv = a.value[..., None], b.value[..., None]
        grad = av * b.grad + bv * a.grad
        hess = third = None
        if order >= 2:
            ag, bg = _outer(a.grad, b.grad), _outer(b.grad, a.grad)
            hess = canonical(av[..., None] * b.hess + bv[..., None] * a.hess + ag + bg, 2)
        if order >= 3:
            third = canonical(
                av[..., None, None] * b.third
                + bv[..., None, None] * a.third
                + _sym3(a.grad[..., :, None, None] * b.hess[..., None, :, :])
                + _sym3(b.grad[..., :, None, None] * a.hess[..., None, :, :]),
                3,
            )
        return Jet(a.value * b.value, grad, hess, third)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, exponent):
        if isinstance(exponent, Jet):
            return exp(exponent * log(self))
        return power(self, exponent)


@dataclass(frozen=True)
class Curve1Jet:
    """A function of one real variable and its first three derivatives."""

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray

    def __call__(self, u: Jet) -> Jet:
        return compose(self, u)


def constant(value, dim: int, order: int = 3, shape=None) -> Jet:
    value = np.asarray(value, dtype=float)
    if shape is not None:
        value = np.broadcast_to(value, shape).copy()
    s = value.shape
    return Jet(
        value,
        np.zeros(s + (dim,)),
        np.zeros(s + (dim, dim)) if order >= 2 else None,
        np.zeros(s + (dim, dim, dim)) if order >= 3 else None,
    )


def jet_seed(point, index: int, order: int = 3) -> Jet:
    """Jet of the coordinate function x_index at ``point`` (shape (..., d))."""
    point = np.asarray(point, dtype=float)
    d = point.shape[-1]
    if not 0 <= index < d:
        raise IndexError(f"coordinate index {index} out of range for dimension {d}")
    j = constant(point[..., index], d, order)
    j.grad[..., index] = 1.0
    return j


def seed_point(point, order: int = 3) -> list[Jet]:
    point = np.asarray(point, dtype=float)
    d = point.shape[-1]
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension {d} outside 1..{MAX_DIM}")
    if not np.all(np.isfinite(point)):
        raise ValueError("non-finite coordinates")
    return [jet_seed(point, i, order) for i in range(d)]


def partial(u: Jet, index: int) -> Jet:
    """Jet of the partial derivative of ``u`` along coordinate ``index``.

    The result has one order less than ``u``.
    """
    if u.order < 2:
        raise ValueError("need at least a second-order jet to differentiate")
    return Jet(
        u.grad[..., index],
        u.hess[..., index, :],
        None if u.third is None else u.third[..., index, :, :],
    )


def compose(g: Curve1Jet, u: Jet) -> Jet:
    """Jet of g(u) by the chain rule through third order."""
    d1 = np.asarray(g.d1, float)[..., None]
    grad = d1 * u.grad
    hess = third = None
    if u.order >= 2:
        d2 = np.asarray(g.d2, float)[..., None, None]
        hess = canonical(d1[..., None] * u.hess + d2 * _outer(u.grad, u.grad), 2)
    if u.order >= 3:
        d3 = np.asarray(g.d3, float)[..., None, None, None]
        third = canonical(
            d1[..., None, None] * u.third
            + d2[..., None] * _sym3(u.grad[..., :, None, None] * u.hess[..., None, :, :])
            + d3 * _outer3(u.grad, u.grad, u.grad),
            3,
        )
    return Jet(np.asarray(g.value, float), grad, hess, third)


# elementary functions -------------------------------------------------------

def exp(u: Jet) -> Jet:
    e = np.exp(u.value)
    return compose(Curve1Jet(e, e, e, e), u)


def log(u: Jet) -> Jet:
    x = u.value
    if np.any(x <= 0):
        raise DomainError("log", "non-positive value")
    r = 1.0 / x
    return compose(Curve1Jet(np.log(x), r, -r * r, 2 * r ** 3), u)


def sqrt(u: Jet) -> Jet:
    x = u.value
    if np.any(x <= 0):
        raise DomainError("sqrt", "non-positive value")
    s = np.sqrt(x)
    return compose(Curve1Jet(s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)), u)


def sin(u: Jet) -> Jet:
    s, c = np.sin(u.value), np.cos(u.value)
    return compose(Curve1Jet(s, c, -s, -c), u)


def cos(u: Jet) -> Jet:
    s, c = np.sin(u.value), np.cos(u.value)
    return compose(Curve1Jet(c, -s, -c, s), u)


def tan(u: Jet) -> Jet:
    t = np.tan(u.value)
    sec2 = 1.0 + t * t
    return compose(Curve1Jet(t, sec2, 2 * t * sec2, 2 * sec2 * (1 + 3 * t * t)), u)


def atan(u: Jet) -> Jet:
    x = u.value
    q = 1.0 / (1.0 + x * x)
    return compose(Curve1Jet(np.arctan(x), q, -2 * x * q * q, (6 * x * x - 2) * q ** 3), u)


def sinh(u: Jet) -> Jet:
    s, c = np.sinh(u.value), np.cosh(u.value)
    return compose(Curve1Jet(s, c, s, c), u)


def cosh(u: Jet) -> Jet:
    s, c = np.sinh(u.value), np.cosh(u.value)
    return compose(Curve1Jet(c, s, c, s), u)


def reciprocal(u: Jet) -> Jet:
    x = u.value
    if np.any(x == 0):
        raise ZeroDivisionError("jet division by a zero value")
    r = 1.0 / x
    return compose(Curve1Jet(r, -r * r, 2 * r ** 3, -6 * r ** 4), u)


def power(u: Jet, a) -> Jet:
    """u**a; integer exponents accept any sign of u, real ones need u > 0."""
    x = u.value
    a_f = float(a)
    if a_f == int(a_f) and a_f >= 0:
        n = int(a_f)
        if n == 0:
            return constant(1.0, u.dim, u.order, x.shape)
        # falling factorials vanish past n, so x**0 stands in for negative powers
        coef = [1.0, n, n * (n - 1), n * (n - 1) * (n - 2)]
        derivs = [c * x ** max(n - k, 0) for k, c in enumerate(coef)]
        return compose(Curve1Jet(*derivs), u)
    if a_f == int(a_f):
        return reciprocal(power(u, -a_f))
    if np.any(x <= 0):
        raise DomainError("power", f"non-positive base with exponent {a_f}")
    return compose(
        Curve1Jet(
            x ** a_f,
            a_f * x ** (a_f - 1),
            a_f * (a_f - 1) * x ** (a_f - 2),
            a_f * (a_f - 1) * (a_f - 2) * x ** (a_f - 3),
        ),
        u,
    )


def atan2(y: Jet, x: Jet) -> Jet:
    """Two-argument arctangent, keeping the quadrant of (x, y).

    The derivatives follow from d(theta) = (x dy - y dx) / (x^2 + y^2), which
    is evaluated as a lower-order jet for each coordinate direction.
    """
    if y.dim != x.dim:
        raise ValueError("jet dimension mismatch in atan2")
    order = min(x.order, y.order)
    x, y = x.truncate(order), y.truncate(order)
    rho2 = x.value ** 2 + y.value ** 2
    if np.any(rho2 == 0):
        raise DomainError("atan2", "both arguments vanish")
    d = x.dim
    value = np.arctan2(y.value, x.value)
    grad = (x.value[..., None] * y.grad - y.value[..., None] * x.grad) / rho2[..., None]
    if order == 1:
        return Jet(value, grad)
    lo = order - 1
    xl, yl = x.truncate(lo), y.truncate(lo)
    inv = reciprocal(xl * xl + yl * yl)
    hess = np.empty(value.shape + (d, d))
    third = np.empty(value.shape + (d, d, d)) if order == 3 else None
    for i in range(d):
        qi = (xl * partial(y, i) - yl * partial(x, i)) * inv
        hess[..., i, :] = qi.grad
        if third is not None:
            third[..., i, :, :] = qi.hess
    hess = symmetrize_hess(hess)
    if third is not None:
        third = symmetrize_third(third)
    return Jet(value, grad, hess, third)


# implicit roots -------------------------------------------------------------

ImplicitFunction = Callable[[Jet, Sequence[Jet]], Jet]


def _value_of(g: ImplicitFunction, t, point):
    d = point.shape[-1]
    tj = constant(t, 1, 1)
    xs = [constant(point[..., i], 1, 1) for i in range(d)]
    return g(tj, xs).value


def _t_derivative(g: ImplicitFunction, t, point):
    d = point.shape[-1]
    tj = constant(t, 1, 1)
    tj.grad[..., 0] = 1.0
    xs = [constant(point[..., i], 1, 1) for i in range(d)]
    return g(tj, xs).grad[..., 0]


def find_bracketed_root(g: ImplicitFunction, point, lo, hi, tol=1e-13, max_iter=80):
    """Bisection on [lo, hi] followed by a safeguarded Newton polish.

    Vectorized over the batch of points; returns the root values.
    """
    point = np.asarray(point, float)
    shape = point.shape[:-1]
    lo = np.broadcast_to(np.asarray(lo, float), shape).copy()
    hi = np.broadcast_to(np.asarray(hi, float), shape).copy()
    glo = _value_of(g, lo, point)
    ghi = _value_of(g, hi, point)
    if np.any(np.sign(glo) * np.sign(ghi) > 0):
        raise NoSignChangeError("implicit function does not change sign on the bracket")
    exact_lo = glo == 0
    exact_hi = ghi == 0
    neg_lo = glo < 0
    scale = np.maximum(np.abs(glo), np.abs(ghi))
    n_bisect = max(max_iter - 10, 1)
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        gm = _value_of(g, mid, point)
        go_right = (gm < 0) == neg_lo
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
        if np.all(np.abs(hi - lo) <= 4 * np.finfo(float).eps * np.maximum(np.abs(lo), 1e-300)):
            break
    t = 0.5 * (lo + hi)
    for _ in range(max_iter - n_bisect):
        gt = _value_of(g, t, point)
        if np.all(np.abs(gt) <= tol * np.maximum(scale, 1.0)):
            break
        dg = _t_derivative(g, t, point)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dg != 0, gt / dg, 0.0)
        cand = t - step
        inside = (cand >= lo) & (cand <= hi)
        t = np.where(inside, cand, t)
    t = np.where(exact_lo, lo, t)
    t = np.where(exact_hi & ~exact_lo, hi, t)
    return t


def jet_implicit_root(
    g: ImplicitFunction,
    point,
    bracket,
    tol: float = 1e-13,
    order: int = 3,
    degeneracy: float = 1e-10,
) -> Jet:
    """Jet of t(x) defined implicitly by g(t(x), x) = 0.

    ``g(t, xs)`` is written with jet arithmetic; ``t`` and each element of
    ``xs`` are jets in the same variables.  ``bracket`` is a pair (lo, hi),
    scalars or per-point arrays, on which g changes sign.

    The value comes from :func:`find_bracketed_root`.  Derivatives come from
    chord-Newton iteration on jets, t <- t - g(t, x) / g_t, where g_t is the
    (constant) t-derivative at the root: each pass makes one more derivative
    order exact.
    """
    point = np.asarray(point, float)
    lo, hi = bracket
    t0 = find_bracketed_root(g, point, lo, hi, tol=tol)
    shape = point.shape[:-1]
    c = _t_derivative(g, t0, point)
    scale = np.maximum(
        np.abs(_t_derivative(g, np.broadcast_to(np.asarray(lo, float), shape), point)),
        np.abs(_t_derivative(g, np.broadcast_to(np.asarray(hi, float), shape), point)),
    )
    if np.any(np.abs(c) < degeneracy * np.maximum(scale, np.finfo(float).tiny)):
        raise DegenerateRootError("implicit function has vanishing t-derivative at the root")
    xs = seed_point(point, order)
    d = point.shape[-1]
    t = constant(t0, d, order)
    for _ in range(order + 1):
        t = t - g(t, xs) * (1.0 / c)
    return t
