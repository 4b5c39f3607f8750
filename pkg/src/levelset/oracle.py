"""Finite-difference derivative oracle.

Gradients, Hessians and third derivatives of a plain value function are
estimated by central differences with a Richardson tableau in the step
size.  Nothing here uses jet arithmetic: field values come from the numpy
evaluation route of :mod:`levelset.fields`.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

EPS = np.finfo(float).eps


class StencilError(ValueError):
    """A finite-difference stencil reaches into an excluded region."""


@dataclass(frozen=True)
class FDConfig:
    """Steps are h * (1 + |x|) for orders 1-2 and h3 * (1 + |x|) for order 3."""

    h: float = 1e-3
    h3: float = 1e-2
    richardson_levels: int = 3
    guard: float = 10.0
    value_accuracy: float | None = None  # relative accuracy of field values; None = from the field
    roundoff_factor: tuple = (1.0, 4.0, 16.0)  # stencil amplification of value errors per order

    def __post_init__(self):
        if not (self.h > 0 and self.h3 > 0):
            raise ValueError("steps must be positive")
        if not 1 <= self.richardson_levels <= 4:
            raise ValueError("richardson_levels must be in 1..4")


def _unit(d, i):
    e = np.zeros(d)
    e[i] = 1.0
    return e


def _grad(f, x, h):
    d = x.shape[-1]
    hh = h[:, None]
    return np.stack([(f(x + hh * _unit(d, i)) - f(x - hh * _unit(d, i))) / (2 * h) for i in range(d)], -1)


def _hess(f, x, h):
    d = x.shape[-1]
    hh = h[:, None]
    f0 = f(x)
    out = np.empty(x.shape[:-1] + (d, d))
    for i in range(d):
        ei = hh * _unit(d, i)
        out[:, i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h ** 2
        for j in range(i + 1, d):
            ej = hh * _unit(d, j)
            v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h ** 2)
            out[:, i, j] = out[:, j, i] = v
    return out


def _third(f, x, h):
    d = x.shape[-1]
    hh = h[:, None]
    cols = [(_hess(f, x + hh * _unit(d, k), h) - _hess(f, x - hh * _unit(d, k), h)) / (2 * h[:, None, None]) for k in range(d)]
    t = np.stack(cols, -1)
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    return sum(np.transpose(t, (0,) + tuple(p + 1 for p in perm)) for perm in perms) / 6.0


def _richardson(estimates):
    """Diagonal of the h^2 Richardson tableau; returns (best, previous diagonal entry)."""
    rows = []
    for i, e in enumerate(estimates):
        row = [e]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - rows[i - 1][j - 1]) / (4 ** j - 1))
        rows.append(row)
    prev = rows[-2][-1] if len(rows) > 1 else None
    return rows[-1][-1], prev


@dataclass
class FDJet:
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray
    error: dict  # order -> per-point error estimate


def _tensor_max(a):
    return np.max(np.abs(a.reshape(a.shape[0], -1)), axis=-1)


def fd_jet(value_fn, points, config: FDConfig = FDConfig(), admissible=None, value_accuracy=None) -> FDJet:
    """Finite-difference jet of ``value_fn`` at each point (shape (N, d)).

    ``admissible(points, radius) -> bool mask`` tells whether the ball of the
    given radius around each point is admissible; it guards the stencil,
    which reaches 2 * h3 * (1 + |x|) along each axis.
    """
    x = np.atleast_2d(np.asarray(points, float))
    base = 1.0 + np.linalg.norm(x, axis=-1)
    acc = value_accuracy if value_accuracy is not None else (config.value_accuracy or EPS)
    if admissible is not None:
        reach = 2.0 * config.h3 * base * np.sqrt(x.shape[-1])
        if not np.all(admissible(x, reach)):
            raise StencilError("finite-difference stencil leaves the admissible region")
    f0 = np.asarray(value_fn(x), float)
    levels = config.richardson_levels
    out = {}
    err = {}
    for order, h0, op in ((1, config.h, _grad), (2, config.h, _hess), (3, config.h3, _third)):
        steps = [h0 * base / 2 ** k for k in range(levels)]
        ests = [op(value_fn, x, h) for h in steps]
        best, prev = _richardson(ests)
        scale = np.maximum(np.abs(f0), 1e-300)
        # the stencil samples values of size up to ~|f| + |grad| h; use the largest seen
        roundoff = config.roundoff_factor[order - 1] * acc * (scale + _tensor_max(ests[0]) * steps[-1] ** order) / steps[-1] ** order
        trunc = _tensor_max(best - prev) if prev is not None else np.zeros_like(roundoff)
        out[order] = best
        err[order] = trunc + roundoff
    return FDJet(f0, out[1], out[2], out[3], err)


@dataclass
class OracleReport:
    field: str
    dim: int
    count: int
    discrepancy: dict = field(default_factory=dict)  # order -> max discrepancy
    estimate: dict = field(default_factory=dict)  # order -> estimate at the worst point
    worst_ratio: dict = field(default_factory=dict)  # order -> max(discrepancy / estimate)
    guard: float = 10.0

    @property
    def passed(self) -> dict:
        return {k: bool(v <= self.guard) for k, v in self.worst_ratio.items()}

    @property
    def all_pass(self) -> bool:
        return all(self.passed.values())

    def rows(self):
        for order in (0, 1, 2, 3):
            if order in self.discrepancy:
                yield (order, self.discrepancy[order], self.estimate[order], self.worst_ratio[order], self.passed[order])

    def to_text(self) -> str:
        lines = [f"oracle {self.field} d={self.dim} points={self.count} guard={self.guard:g}",
                 f"{'order':>5}  {'max_discrepancy':>16}  {'estimate':>12}  {'ratio':>10}  pass"]
        for order, dis, est, ratio, ok in self.rows():
            lines.append(f"{order:>5}  {dis:>16.3e}  {est:>12.3e}  {ratio:>10.3g}  {'yes' if ok else 'NO'}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["order", "max_discrepancy", "estimate", "ratio", "pass"])
        for order, dis, est, ratio, ok in self.rows():
            w.writerow([order, "%.17g" % dis, "%.17g" % est, "%.17g" % ratio, int(ok)])
        return buf.getvalue()


def validate_jets(spec, points, config: FDConfig = FDConfig()) -> OracleReport:
    """Compare analytic jets of ``spec`` with the finite-difference oracle."""
    from .fields import eval_field, field_value

    pts = np.atleast_2d(np.asarray(points, float))
    acc = config.value_accuracy if config.value_accuracy is not None else max(spec.definition.value_accuracy, EPS)

    def admissible(q, radius):
        return ~spec.definition.excluded(spec, q, radius)

    fd = fd_jet(lambda q: field_value(spec, q), pts, config, admissible=admissible, value_accuracy=acc)
    jet = eval_field(spec, pts, order=3)
    rep = OracleReport(spec.name, spec.dim, len(pts), guard=config.guard)
    # values: the two evaluation routes must agree to the value accuracy
    vdis = np.abs(jet.value - fd.value)
    vest = acc * np.maximum(np.abs(fd.value), 1.0) * 4.0
    _record(rep, 0, vdis, vest)
    for order, a, b in ((1, jet.grad, fd.grad), (2, jet.hess, fd.hess), (3, jet.third, fd.third)):
        dis = _tensor_max(a - b)
        _record(rep, order, dis, fd.error[order])
    return rep


def _record(rep, order, dis, est):
    est = np.maximum(est, np.finfo(float).tiny)
    ratio = dis / est
    worst = int(np.argmax(ratio))
    rep.discrepancy[order] = float(np.max(dis))
    rep.estimate[order] = float(est[worst])
    rep.worst_ratio[order] = float(ratio[worst])
