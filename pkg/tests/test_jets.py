import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levelset import jets as J


def coords(point):
    return J.seed_point(np.asarray(point, float))


def test_seed_coordinate_functions():
    x = J.jet_seed([3.0, 4.0], 0)
    assert x.value == 3 and np.array_equal(x.grad, [1, 0])
    assert not x.hess.any() and not x.third.any()
    y = J.jet_seed([3.0, 4.0], 1)
    assert y.value == 4 and np.array_equal(y.grad, [0, 1])
    z = J.jet_seed([1.0, 1.0, 1.0], 2)
    assert z.value == 1 and np.array_equal(z.grad, [0, 0, 1])


def test_seed_index_out_of_range():
    with pytest.raises((IndexError, ValueError)):
        J.jet_seed([1.0, 2.0], 2)


def test_products():
    (x,) = coords([2.0])
    sq = x * x
    assert sq.value == 4 and sq.grad[0] == 4 and sq.hess[0, 0] == 2 and sq.third[0, 0, 0] == 0
    x0, x1 = coords([1.0, 2.0])
    p = x0 * x1
    assert p.value == 2
    assert np.array_equal(p.grad, [2, 1])
    assert p.hess[0, 1] == p.hess[1, 0] == 1 and p.hess[0, 0] == 0
    assert not p.third.any()
    x, y, z = coords([1.0, 1.0, 1.0])
    r2 = x * x + y * y + z * z
    assert r2.value == 3
    assert np.array_equal(r2.grad, [2, 2, 2])
    assert np.array_equal(r2.hess, 2 * np.eye(3))
    assert not r2.third.any()


def test_compose_examples():
    x, y, z = coords([1.0, 0.0, 0.0])
    lg = J.log(x * x + y * y + z * z)
    assert lg.value == pytest.approx(0)
    np.testing.assert_allclose(lg.grad, [2, 0, 0], atol=1e-15)
    np.testing.assert_allclose(np.diag(lg.hess), [-2, 2, 2], atol=1e-14)
    x, y = coords([3.0, 4.0])
    r = J.sqrt(x * x + y * y)
    assert r.value == pytest.approx(5)
    np.testing.assert_allclose(r.grad, [0.6, 0.8], rtol=1e-15)


def test_compose_identity():
    x, y = coords([0.3, -1.2])
    u = J.sin(x) * J.exp(y)
    ident = J.Curve1Jet(u.value, 1.0, 0.0, 0.0)
    v = J.compose(ident, u)
    for a, b in zip((u.value, u.grad, u.hess, u.third), (v.value, v.grad, v.hess, v.third)):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("fn", [J.log, J.sqrt])
def test_domain_errors_name_the_function(fn):
    (x,) = coords([-1.0])
    with pytest.raises(J.DomainError, match=fn.__name__):
        fn(x)


def test_division_by_zero():
    x, y = coords([0.0, 1.0])
    with pytest.raises((ZeroDivisionError, J.DomainError)):
        y / x


def test_dimension_mismatch():
    (a,) = coords([1.0])
    b, _ = coords([1.0, 2.0])
    with pytest.raises(ValueError):
        a * b


def test_atan2_keeps_quadrant():
    x, y = coords([-1.0, -1.0])
    t = J.atan2(y, x)
    assert t.value == pytest.approx(-3 * np.pi / 4)
    # d atan2(y, x) = (x dy - y dx) / r^2
    np.testing.assert_allclose(t.grad, [0.5, -0.5], rtol=1e-15)


def test_implicit_root_examples():
    p = np.array([[8.0, 0.5]])
    t = J.jet_implicit_root(lambda t, xs: t - xs[0], p, (0.0, 20.0))
    x0 = J.jet_seed(p[0], 0)
    np.testing.assert_allclose(t.value, x0.value, atol=1e-13)
    np.testing.assert_allclose(t.grad[0], x0.grad, atol=1e-13)
    t = J.jet_implicit_root(lambda t, xs: t ** 3 - xs[0], p, (0.0, 5.0))
    assert t.value[0] == pytest.approx(2, abs=1e-13)
    assert t.grad[0, 0] == pytest.approx(1 / 12, rel=1e-12)
    assert t.hess[0, 0, 0] == pytest.approx(-1 / 144, rel=1e-10)
    a = np.array([2.0, 1.5, 1.0])
    q = np.array([[2.0 * 0.6, 1.5 * 0.0, 1.0 * 0.8]])
    q[0, 1] = 1e-3
    q[0] /= np.sqrt(np.sum(q[0] ** 2 / a ** 2))

    def cubic(t, xs):
        return sum(xs[i] * xs[i] / (a[i] ** 2 + t) for i in range(3)) - 1.0

    xi = J.jet_implicit_root(cubic, q, (-0.9, 10.0))
    assert abs(xi.value[0]) <= 1e-12


def test_implicit_root_errors():
    p = np.array([[1.0]])
    with pytest.raises(J.NoSignChangeError):
        J.jet_implicit_root(lambda t, xs: t * t + 1.0, p, (-1.0, 1.0))
    with pytest.raises(J.DegenerateRootError):
        J.jet_implicit_root(lambda t, xs: t ** 3 - 0.0 * xs[0], np.array([[0.0]]), (-1.0, 2.0))


def test_implicit_root_consistency():
    rng = np.random.default_rng(3)
    p = rng.uniform(0.5, 2.0, (20, 3))

    def g(t, xs):
        return t ** 3 + t * xs[0] - J.exp(xs[1]) * xs[2]

    t = J.jet_implicit_root(g, p, (-10.0, 10.0))
    back = g(t, J.seed_point(p))
    for part in (back.value, back.grad, back.hess, back.third):
        assert np.max(np.abs(part)) <= 1e-8


finite = st.floats(-2.0, 2.0, allow_nan=False)
point3 = st.tuples(finite, finite, finite)


def _random_jet(seed, point):
    x, y, z = coords(point)
    c = np.random.default_rng(seed).uniform(-1, 1, 6)
    return c[0] + c[1] * x + c[2] * y * z + c[3] * J.sin(x + y) + c[4] * J.exp(0.3 * z) + c[5] * x * x * y


@settings(max_examples=60, deadline=None)
@given(point3, st.integers(0, 10_000), st.integers(0, 10_000), st.integers(0, 10_000))
def test_algebra_properties(point, sa, sb, sc):
    a, b, c = (_random_jet(s, point) for s in (sa, sb, sc))
    for lhs, rhs in ((a * b, b * a), ((a * b) * c, a * (b * c))):
        for u, v in zip((lhs.value, lhs.grad, lhs.hess, lhs.third), (rhs.value, rhs.grad, rhs.hess, rhs.third)):
            np.testing.assert_allclose(u, v, rtol=1e-12, atol=1e-12)
    if abs(b.value) > 1e-3:
        back = (a / b) * b
        for u, v in zip((back.value, back.grad, back.hess, back.third), (a.value, a.grad, a.hess, a.third)):
            scale = max(1.0, np.max(np.abs(v)))
            assert np.max(np.abs(u - v)) <= 1e-12 * scale * (1 + 1 / abs(b.value)) ** 4


@settings(max_examples=60, deadline=None)
@given(point3, st.integers(0, 10_000))
def test_symmetry_is_exact(point, seed):
    u = J.atan(_random_jet(seed, point)) * J.cosh(_random_jet(seed + 1, point))
    assert np.array_equal(u.hess, np.swapaxes(u.hess, -1, -2))
    for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0), (1, 2, 0), (2, 0, 1)]:
        assert np.array_equal(u.third, np.transpose(u.third, perm))


def test_elementary_functions_against_closed_forms():
    (x,) = coords([0.7])
    cases = {
        J.exp: (np.exp, np.exp, np.exp, np.exp),
        J.sin: (np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t)),
        J.cos: (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t), np.sin),
        J.sinh: (np.sinh, np.cosh, np.sinh, np.cosh),
        J.atan: (np.arctan, lambda t: 1 / (1 + t * t), lambda t: -2 * t / (1 + t * t) ** 2,
                 lambda t: (6 * t * t - 2) / (1 + t * t) ** 3),
        J.reciprocal: (lambda t: 1 / t, lambda t: -1 / t ** 2, lambda t: 2 / t ** 3, lambda t: -6 / t ** 4),
    }
    for fn, (f0, f1, f2, f3) in cases.items():
        u = fn(x)
        np.testing.assert_allclose(
            [u.value, u.grad[0], u.hess[0, 0], u.third[0, 0, 0]], [f0(0.7), f1(0.7), f2(0.7), f3(0.7)], rtol=1e-13
        )
    u = J.power(x, 2.5)
    np.testing.assert_allclose(u.third[0, 0, 0], 2.5 * 1.5 * 0.5 * 0.7 ** -0.5, rtol=1e-13)
