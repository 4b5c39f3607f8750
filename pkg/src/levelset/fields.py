"""Catalog of closed-form scalar fields used as the test corpus.

Every entry has two independent evaluation routes: ``jet`` builds a
:class:`~levelset.jets.Jet` with jet arithmetic, and ``value`` evaluates the
plain function with numpy only.  The finite-difference oracle uses the
second route so it never touches jet code.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import ellipsoidal as ell
from . import jets as J


class FieldError(ValueError):
    """Bad field name, dimension or parameters."""


class ExclusionError(ValueError):
    """A point lies in the singular set of a field."""


@dataclass(frozen=True)
class Param:
    name: str
    default: object
    doc: str
    kind: str = "float"  # float | int | list


@dataclass(frozen=True)
class FieldDef:
    name: str
    dims: tuple[int, ...]
    params: tuple[Param, ...]
    exclusion: str
    jet: Callable
    value: Callable
    validate: Callable
    excluded: Callable  # (spec, points, margin) -> bool mask of inadmissible points
    default_region: Callable
    harmonic: bool = False
    min_field: float = 0.0
    value_accuracy: float = 2.2e-16
    extra_params: bool = False  # accepts cIJ style keys


@dataclass(frozen=True)
class FieldSpec:
    name: str
    dim: int
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in CATALOG:
            raise FieldError(f"unknown field {self.name!r}")
        fd = CATALOG[self.name]
        if not 2 <= self.dim <= 6:
            raise FieldError(f"dimension {self.dim} outside 2..6")
        if self.dim not in fd.dims:
            raise FieldError(f"field {self.name} does not support dimension {self.dim}")
        merged = {p.name: p.default for p in fd.params}
        for k, v in dict(self.params).items():
            if k not in merged and not fd.extra_params:
                raise FieldError(f"field {self.name} has no parameter {k!r}")
            merged[k] = v
        object.__setattr__(self, "params", _Frozen(merged))
        fd.validate(self)

    @property
    def definition(self) -> FieldDef:
        return CATALOG[self.name]

    @property
    def exclusion(self) -> str:
        return self.definition.exclusion

    @property
    def harmonic(self) -> bool:
        return self.definition.harmonic

    def __getitem__(self, key):
        return self.params[key]

    @classmethod
    def from_strings(cls, name: str, dim: int, items=()) -> "FieldSpec":
        """Build from ``key=value`` strings; list values are comma separated."""
        if name not in CATALOG:
            raise FieldError(f"unknown field {name!r}")
        kinds = {p.name: p.kind for p in CATALOG[name].params}
        params = {}
        for item in items:
            if "=" not in item:
                raise FieldError(f"malformed parameter {item!r}, expected key=value")
            k, v = (s.strip() for s in item.split("=", 1))
            try:
                kind = kinds.get(k, "float")
                if kind == "list":
                    params[k] = tuple(float(s) for s in v.split(",") if s.strip())
                elif kind == "int":
                    params[k] = int(v)
                else:
                    params[k] = float(v)
            except ValueError as exc:
                raise FieldError(f"malformed value for {k}: {v!r}") from exc
        return cls(name, dim, params)


class _Frozen(dict):
    def __setitem__(self, key, value):
        raise TypeError("FieldSpec parameters are immutable")

    def __hash__(self):
        return hash(tuple(sorted(self.items())))


# helpers ------------------------------------------------------------------------

def _r2(xs):
    out = xs[0] * xs[0]
    for x in xs[1:]:
        out = out + x * x
    return out


def _norm(points):
    return np.sqrt(np.sum(points * points, axis=-1))


def _no_check(spec):
    pass


def _origin_excluded(spec, points, margin):
    return _norm(points) <= margin


def _planes_excluded(spec, points, margin):
    return np.any(np.abs(points) <= np.asarray(margin)[..., None], axis=-1)


def _shell(lo, hi):
    return lambda spec: Region("shell", (lo, hi))


def _box(lo, hi):
    return lambda spec: Region("box", tuple((lo, hi) for _ in range(spec.dim)))


def _check_axes(spec):
    a, b, c = spec["a"], spec["b"], spec["c"]
    if not a > b > c > 0:
        raise FieldError("semi-axes must satisfy a > b > c > 0")


# sphere and radial fields ------------------------------------------------------

def _sphere_jet(spec, xs):
    return J.sqrt(_r2(xs))


def _sphere_value(spec, p):
    return _norm(p)


def _charge_jet(spec, xs):
    d = spec.dim
    if d == 2:
        return 0.5 * J.log(_r2(xs))
    return J.power(_r2(xs), -(d - 2) / 2.0)


def _charge_value(spec, p):
    d = spec.dim
    r = _norm(p)
    return np.log(r) if d == 2 else r ** (2 - d)


def p_harmonic_exponent(p: float, d: int):
    """Radial profile exponent (p - d)/(p - 1); None stands for log r."""
    if p == d:
        return None
    return (p - d) / (p - 1.0)


def _pharm_check(spec):
    if not spec["p"] > 1:
        raise FieldError("p-harmonic exponent requires p > 1")


def _pharm_jet(spec, xs):
    beta = p_harmonic_exponent(spec["p"], spec.dim)
    if beta is None:
        return 0.5 * J.log(_r2(xs))
    return J.power(_r2(xs), beta / 2.0)


def _pharm_value(spec, p):
    beta = p_harmonic_exponent(spec["p"], spec.dim)
    r = _norm(p)
    return np.log(r) if beta is None else r ** beta


def _quad_jet(spec, xs):
    a, b, c = spec["a"], spec["b"], spec["c"]
    return xs[0] * xs[0] * (1 / a ** 2) + xs[1] * xs[1] * (1 / b ** 2) + xs[2] * xs[2] * (1 / c ** 2)


def _quad_value(spec, p):
    a, b, c = spec["a"], spec["b"], spec["c"]
    return p[..., 0] ** 2 / a ** 2 + p[..., 1] ** 2 / b ** 2 + p[..., 2] ** 2 / c ** 2


def _quad_check(spec):
    if min(spec["a"], spec["b"], spec["c"]) <= 0:
        raise FieldError("semi-axes must be positive")


# Monge graph ----------------------------------------------------------------------

def monge_terms(spec):
    """[(i, j, coefficient)] for f(x, y) = sum c_ij x^i y^j."""
    terms = []
    for k, v in spec.params.items():
        if len(k) == 3 and k[0] == "c" and k[1:].isdigit():
            terms.append((int(k[1]), int(k[2]), float(v)))
    return sorted(terms)


def _monge_check(spec):
    for k in spec.params:
        if not (len(k) == 3 and k[0] == "c" and k[1:].isdigit()):
            raise FieldError(f"monge_graph parameters are cIJ coefficients, got {k!r}")


def _monge_jet(spec, xs):
    x, y, z = xs
    f = J.constant(0.0, 3, z.order, z.shape)
    for i, j, c in monge_terms(spec):
        if c == 0:
            continue
        f = f + c * (J.power(x, i) * J.power(y, j))
    return z - f


def _monge_value(spec, p):
    f = np.zeros(p.shape[:-1])
    for i, j, c in monge_terms(spec):
        f = f + c * p[..., 0] ** i * p[..., 1] ** j
    return p[..., 2] - f


# planar harmonic ---------------------------------------------------------------

def _complex_powers(x, y, n):
    """Real and imaginary jets of (x + iy)^k for k = 0..n."""
    one = J.constant(1.0, x.dim, x.order, x.shape)
    zero = J.constant(0.0, x.dim, x.order, x.shape)
    out = [(one, zero)]
    re, im = one, zero
    for _ in range(n):
        re, im = re * x - im * y, re * y + im * x
        out.append((re, im))
    return out


def _planar_jet(spec, xs):
    coeffs = spec["coeffs"]
    powers = _complex_powers(xs[0], xs[1], len(coeffs) - 1)
    part = 1 if spec["imag"] else 0
    out = J.constant(0.0, 2, xs[0].order, xs[0].shape)
    for ck, pk in zip(coeffs, powers):
        if ck:
            out = out + ck * pk[part]
    return out


def _planar_value(spec, p):
    z = p[..., 0] + 1j * p[..., 1]
    w = sum(ck * z ** k for k, ck in enumerate(spec["coeffs"]))
    return np.imag(w) if spec["imag"] else np.real(w)


def _planar_check(spec):
    if len(spec["coeffs"]) < 2:
        raise FieldError("planar_harmonic needs at least a linear coefficient")


# conical harmonic ---------------------------------------------------------------

def _conical_jet(spec, xs):
    x, y, z = xs
    s = J.sqrt(x * x + y * y)
    theta = J.atan2(s, z)
    rho = J.tan(0.5 * theta)
    az = J.atan2(y, x)
    out = J.constant(0.0, 3, x.order, x.shape)
    for k, ak in enumerate(spec["cos"], start=1):
        if ak:
            out = out + ak * J.power(rho, k) * J.cos(k * az)
    for k, bk in enumerate(spec["sin"], start=1):
        if bk:
            out = out + bk * J.power(rho, k) * J.sin(k * az)
    return out


def _conical_value(spec, p):
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    theta = np.arctan2(np.hypot(x, y), z)
    rho = np.tan(theta / 2)
    az = np.arctan2(y, x)
    out = np.zeros(p.shape[:-1])
    for k, ak in enumerate(spec["cos"], start=1):
        out = out + ak * rho ** k * np.cos(k * az)
    for k, bk in enumerate(spec["sin"], start=1):
        out = out + bk * rho ** k * np.sin(k * az)
    return out


CONE_LIMIT = 0.8 * math.pi  # polar angle beyond which tan(theta/2) is excluded


def _conical_excluded(spec, p, margin):
    s = np.hypot(p[..., 0], p[..., 1])
    theta = np.arctan2(s, p[..., 2])
    return (s <= margin) | (theta >= CONE_LIMIT)


# confocal ellipsoid fields -------------------------------------------------------

def _charged_jet(spec, xs, point):
    a, b, c = spec["a"], spec["b"], spec["c"]
    xi = ell.root_jet(point, a, b, c, "xi", order=xs[0].order)
    return J.compose(ell.charged_potential_curve(xi.value, a, b, c), xi)


def _charged_value(spec, p):
    a, b, c = spec["a"], spec["b"], spec["c"]
    xi = ell.confocal_roots(p, a, b, c)[..., 0]
    return ell.charged_potential_value(xi, a, b, c)


def _uniform_jet(spec, xs, point):
    a, b, c, e0 = spec["a"], spec["b"], spec["c"], spec["E0"]
    xi = ell.root_jet(point, a, b, c, "xi", order=xs[0].order)
    ratio = J.compose(ell.depolarization_ratio_curve(xi.value, a, b, c), xi)
    return (-e0) * xs[0] * (1.0 - ratio)


def _uniform_value(spec, p):
    a, b, c, e0 = spec["a"], spec["b"], spec["c"], spec["E0"]
    xi = ell.confocal_roots(p, a, b, c)[..., 0]
    ratio = ell.depolarization_integral(xi, a, b, c) / ell.depolarization_integral(0.0, a, b, c)
    return -e0 * p[..., 0] * (1.0 - ratio)


# grounded plate ---------------------------------------------------------------------

def plate_modes(spec):
    a, b = spec["a"], spec["b"]
    L = int(spec["L"])
    for l in range(1, L + 1):
        for m in range(1, L + 1):
            gamma = math.pi * math.sqrt(l * l / a ** 2 + m * m / b ** 2)
            yield l, m, 1.0 / (l * l + m * m), gamma


def _plate_jet(spec, xs):
    x, y, z = xs
    a, b, c = spec["a"], spec["b"], spec["c"]
    out = J.constant(0.0, 3, x.order, x.shape)
    for l, m, coef, gamma in plate_modes(spec):
        term = J.sin((l * math.pi / a) * x) * J.sin((m * math.pi / b) * y)
        out = out + coef * term * J.sinh(gamma * (c - z))
    return out


def _plate_value(spec, p):
    a, b, c = spec["a"], spec["b"], spec["c"]
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    out = np.zeros(p.shape[:-1])
    for l, m, coef, gamma in plate_modes(spec):
        out = out + coef * np.sin(l * math.pi * x / a) * np.sin(m * math.pi * y / b) * np.sinh(gamma * (c - z))
    return out


def _plate_check(spec):
    if min(spec["a"], spec["b"], spec["c"]) <= 0:
        raise FieldError("box dimensions must be positive")
    if int(spec["L"]) < 1:
        raise FieldError("truncation order L must be >= 1")


def _plate_excluded(spec, p, margin):
    a, b, c = spec["a"], spec["b"], spec["c"]
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    # the face z = c itself is admissible at zero margin
    top = np.where(np.asarray(margin) > 0, z > c - margin, z > c)
    return (x <= margin) | (x >= a - margin) | (y <= margin) | (y >= b - margin) | (z <= margin) | top


def _plate_region(spec):
    return Region("box", ((0.0, spec["a"]), (0.0, spec["b"]), (0.0, spec["c"])))


# random polynomial -------------------------------------------------------------------

def polynomial_terms(spec):
    """Multi-indices and seeded coefficients in [-1, 1], in a fixed order."""
    idx, coeffs = _terms(spec.dim, int(spec["degree"]), int(spec["seed"]))
    return [tuple(int(k) for k in a) for a in idx], coeffs.copy()


@functools.lru_cache(maxsize=64)
def _terms(d, deg, seed):
    idx = [a for a in itertools.product(range(deg + 1), repeat=d) if sum(a) <= deg]
    idx.sort(key=lambda a: (sum(a), tuple(-k for k in a)))
    rng = np.random.default_rng(seed)
    return np.array(idx), rng.uniform(-1.0, 1.0, size=len(idx))


def _poly_check(spec):
    if not 1 <= int(spec["degree"]) <= 6:
        raise FieldError("degree must be in 1..6")


def _poly_jet(spec, xs):
    idx, coeffs = polynomial_terms(spec)
    deg = int(spec["degree"])
    pw = [[J.power(x, k) for k in range(deg + 1)] for x in xs]
    out = J.constant(0.0, spec.dim, xs[0].order, xs[0].shape)
    for alpha, c in zip(idx, coeffs):
        term = None
        for i, k in enumerate(alpha):
            if k:
                term = pw[i][k] if term is None else term * pw[i][k]
        out = out + (c if term is None else c * term)
    return out


def _poly_value(spec, p):
    idx, coeffs = _terms(spec.dim, int(spec["degree"]), int(spec["seed"]))
    return np.prod(p[..., None, :] ** idx, axis=-1) @ coeffs


# catalog -------------------------------------------------------------------------------

ALL_DIMS = (2, 3, 4, 5, 6)
AXES = (
    Param("a", 2.0, "largest semi-axis"),
    Param("b", 1.5, "middle semi-axis"),
    Param("c", 1.0, "smallest semi-axis"),
)

CATALOG: dict[str, FieldDef] = {}


def _register(fd: FieldDef):
    CATALOG[fd.name] = fd


_register(FieldDef(
    "sphere", ALL_DIMS, (), "origin",
    _sphere_jet, _sphere_value, _no_check, _origin_excluded, _shell(0.5, 2.0),
))
_register(FieldDef(
    "point_charge", ALL_DIMS, (), "origin",
    _charge_jet, _charge_value, _no_check, _origin_excluded, _shell(0.5, 2.0), harmonic=True,
))
_register(FieldDef(
    "quadratic_ellipsoid", (3,), AXES, "origin",
    _quad_jet, _quad_value, _quad_check, _origin_excluded, _shell(0.5, 2.0),
))
_register(FieldDef(
    "monge_graph", (3,), (Param("c20", 0.5, "x^2 coefficient"), Param("c02", 0.5, "y^2 coefficient")),
    "none", _monge_jet, _monge_value, _monge_check, lambda s, p, m: np.zeros(p.shape[:-1], bool),
    _box(-1.0, 1.0), extra_params=True,
))
_register(FieldDef(
    "planar_harmonic", (2,),
    (Param("coeffs", (0.0, 1.0, 0.5, 0.2), "coefficients c_k of sum c_k (x+iy)^k", "list"),
     Param("imag", 0, "1 for the imaginary part", "int")),
    "critical points (|grad| < 0.05)", _planar_jet, _planar_value, _planar_check,
    lambda s, p, m: np.zeros(p.shape[:-1], bool), _box(-1.0, 1.0), harmonic=True, min_field=0.05,
))
_register(FieldDef(
    "conical_harmonic", (3,),
    (Param("cos", (1.0,), "coefficients of rho^k cos(k az)", "list"),
     Param("sin", (0.0, 0.5), "coefficients of rho^k sin(k az)", "list")),
    "apex, polar axis, cone theta >= 0.8 pi around the negative z-axis",
    _conical_jet, _conical_value, _no_check, _conical_excluded, _shell(0.5, 2.0),
    harmonic=True, min_field=0.05,
))
_register(FieldDef(
    "charged_ellipsoid_potential", (3,), AXES, "coordinate planes",
    _charged_jet, _charged_value, _check_axes, _planes_excluded, _box(-3.0, 3.0),
    harmonic=True, value_accuracy=1e-13,
))
_register(FieldDef(
    "uniform_field_ellipsoid", (3,), AXES + (Param("E0", 1.0, "external field strength"),),
    "coordinate planes", _uniform_jet, _uniform_value, _check_axes, _planes_excluded, _box(-3.0, 3.0),
    harmonic=True, min_field=0.05, value_accuracy=1e-13,
))
_register(FieldDef(
    "grounded_plate", (3,),
    (Param("a", 1.0, "box length in x"), Param("b", 1.0, "box length in y"),
     Param("c", 1.0, "box length in z"), Param("L", 3, "truncation order", "int")),
    "outside the open box (face z = c allowed)", _plate_jet, _plate_value, _plate_check,
    _plate_excluded, _plate_region, harmonic=True, min_field=0.05,
))
_register(FieldDef(
    "p_harmonic_radial", ALL_DIMS, (Param("p", 3.0, "exponent p > 1"),), "origin",
    _pharm_jet, _pharm_value, _pharm_check, _origin_excluded, _shell(0.5, 2.0),
))
_register(FieldDef(
    "random_polynomial", ALL_DIMS,
    (Param("seed", 0, "coefficient seed", "int"), Param("degree", 4, "total degree", "int")),
    "points with |grad| < 0.1", _poly_jet, _poly_value, _poly_check,
    lambda s, p, m: np.zeros(p.shape[:-1], bool), _box(-1.0, 1.0), min_field=0.1,
))

NEEDS_POINT = {"charged_ellipsoid_potential", "uniform_field_ellipsoid"}


def list_fields():
    """(name, parameter schema, exclusion description) in catalog order."""
    out = []
    for name, fd in CATALOG.items():
        schema = {p.name: {"default": p.default, "doc": p.doc, "kind": p.kind} for p in fd.params}
        if name == "p_harmonic_radial":
            schema["p"]["constraint"] = "p > 1"
        if fd.name in ("charged_ellipsoid_potential", "uniform_field_ellipsoid"):
            for k in "abc":
                schema[k]["constraint"] = "a > b > c > 0"
        out.append((name, schema, fd.exclusion))
    return out


def _as_points(spec, point):
    p = np.asarray(point, dtype=float)
    if p.shape[-1] != spec.dim:
        raise FieldError(f"point has dimension {p.shape[-1]}, field expects {spec.dim}")
    if not np.all(np.isfinite(p)):
        raise FieldError("non-finite coordinates")
    return p


def check_admissible(spec: FieldSpec, points, margin: float = 0.0):
    p = _as_points(spec, points)
    bad = spec.definition.excluded(spec, p, margin)
    if np.any(bad):
        first = np.asarray(p.reshape(-1, spec.dim)[np.flatnonzero(np.ravel(bad))[0]])
        raise ExclusionError(f"{spec.name}: point {first.tolist()} lies in the excluded set ({spec.exclusion})")
    return p


def eval_field(spec: FieldSpec, point, order: int = 3) -> J.Jet:
    """Jet of the field at ``point`` (shape (d,) or (N, d))."""
    p = check_admissible(spec, point)
    xs = J.seed_point(p, order)
    fd = spec.definition
    if spec.name in NEEDS_POINT:
        return fd.jet(spec, xs, p)
    return fd.jet(spec, xs)


def field_value(spec: FieldSpec, points) -> np.ndarray:
    """Plain numpy evaluation of the field (no jet code)."""
    return spec.definition.value(spec, _as_points(spec, points))


# sampling ---------------------------------------------------------------------------------

class EmptyRegionError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    """``box`` (per-axis bounds), ``shell`` (radii), ``surface`` (ellipsoid
    xi = 0 of a confocal field) or ``face`` (top face z = c of the plate)."""

    kind: str
    bounds: tuple = ()

    def diameter(self, spec: FieldSpec) -> float:
        if self.kind == "box":
            return math.sqrt(sum((hi - lo) ** 2 for lo, hi in self.bounds))
        if self.kind == "shell":
            return 2.0 * self.bounds[1]
        if self.kind == "surface":
            return 2.0 * spec["a"]
        if self.kind == "face":
            return math.hypot(spec["a"], spec["b"])
        raise FieldError(f"unknown region kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str, dim: int) -> "Region":
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        nums = [float(s) for s in rest.split(",") if s.strip()] if rest else []
        if kind == "box":
            if len(nums) == 2:
                return cls("box", tuple((nums[0], nums[1]) for _ in range(dim)))
            if len(nums) == 2 * dim:
                return cls("box", tuple((nums[2 * i], nums[2 * i + 1]) for i in range(dim)))
            raise FieldError("box region needs lo,hi or per-axis bounds")
        if kind == "shell":
            if len(nums) != 2 or not 0 <= nums[0] < nums[1]:
                raise FieldError("shell region needs 0 <= rmin < rmax")
            return cls("shell", tuple(nums))
        if kind in ("surface", "face"):
            return cls(kind)
        raise FieldError(f"unknown region {text!r}")


def _draw(spec, region, rng, n):
    d = spec.dim
    if region.kind == "box":
        lo = np.array([b[0] for b in region.bounds])
        hi = np.array([b[1] for b in region.bounds])
        return lo + (hi - lo) * rng.random((n, d))
    if region.kind == "shell":
        r0, r1 = region.bounds
        v = rng.standard_normal((n, d))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return v * (r0 + (r1 - r0) * rng.random((n, 1)))
    if region.kind == "surface":
        if spec.name not in NEEDS_POINT and spec.name != "quadratic_ellipsoid":
            raise FieldError("surface region needs an ellipsoid field")
        v = rng.standard_normal((n, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return v * np.array([spec["a"], spec["b"], spec["c"]])
    if region.kind == "face":
        if spec.name != "grounded_plate":
            raise FieldError("face region needs the grounded_plate field")
        u = rng.random((n, 2))
        return np.column_stack([u[:, 0] * spec["a"], u[:, 1] * spec["b"], np.full(n, spec["c"])])
    raise FieldError(f"unknown region kind {region.kind!r}")


def _field_strength(spec, p):
    return np.linalg.norm(eval_field(spec, p, order=1).grad, axis=-1)


def sample_points(
    spec: FieldSpec,
    count: int,
    seed: int,
    region: Region | None = None,
    margin: float | None = None,
    min_field: float | None = None,
) -> np.ndarray:
    """Seeded uniform points in ``region`` kept away from the excluded set.

    ``margin`` defaults to 5% of the region diameter; points where the
    gradient is weaker than the field's ``min_field`` are rejected too.
    """
    if count < 0:
        raise FieldError("count must be non-negative")
    region = region or spec.definition.default_region(spec)
    if margin is None:
        margin = 0.05 * region.diameter(spec)
    if min_field is None:
        min_field = spec.definition.min_field
    rng = np.random.default_rng(seed)
    kept = []
    have = 0
    for _ in range(200):
        if have >= count:
            break
        cand = _draw(spec, region, rng, max(2 * (count - have), 16))
        if region.kind == "face":
            a, b = spec["a"], spec["b"]
            ok = (cand[:, 0] > margin) & (cand[:, 0] < a - margin) & (cand[:, 1] > margin) & (cand[:, 1] < b - margin)
        else:
            ok = ~spec.definition.excluded(spec, cand, margin)
        cand = cand[ok]
        if len(cand) and min_field > 0:
            cand = cand[_field_strength(spec, cand) >= min_field]
        kept.append(cand)
        have += len(cand)
    if have < count:
        raise EmptyRegionError(f"could only place {have} of {count} admissible points for {spec.name}")
    return np.concatenate(kept)[:count] if count else np.zeros((0, spec.dim))
