import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levelset import fields as FL
from levelset import geometry as G
from levelset import jets as J


def jet_of(name, point, dim=3, **params):
    return FL.eval_field(FL.FieldSpec(name, dim, params), np.atleast_2d(point))


def test_sphere_sample():
    geo = G.geometry_sample(jet_of("sphere", [0.0, 0.0, 2.0]))
    assert geo.F[0] == pytest.approx(1)
    assert geo.V[0] == pytest.approx(1)
    assert geo.trW[0] == pytest.approx(1)
    np.testing.assert_allclose(geo.principal_curvatures[0], [0.5, 0.5], rtol=1e-14)
    assert geo.R_extrinsic[0] == pytest.approx(0.5)
    assert geo.R_formula[0] == pytest.approx(0.5, rel=1e-14)


def test_monge_sample():
    geo = G.geometry_sample(jet_of("monge_graph", [0.0, 0.0, 0.0]))
    assert geo.F[0] == pytest.approx(1)
    np.testing.assert_allclose(geo.principal_curvatures[0], [-1, -1], atol=1e-14)
    assert geo.R_extrinsic[0] == pytest.approx(2)
    assert geo.R_extrinsic[0] / 2 == pytest.approx(1)


def test_planar_level_curves_are_flat():
    geo = G.geometry_sample(jet_of("planar_harmonic", [1.0, 1.0], dim=2, coeffs=(0.0, 0.0, 1.0)))
    assert geo.principal_curvatures.shape == (1, 1)
    assert geo.R_extrinsic[0] == pytest.approx(0, abs=1e-14)
    assert G.scalar_curvature_formula(jet_of("planar_harmonic", [1.0, 1.0], dim=2, coeffs=(0.0, 0.0, 1.0)))[0] == pytest.approx(0, abs=1e-14)


def test_formula_examples():
    assert G.scalar_curvature_formula(jet_of("point_charge", [1.0, 0.0, 0.0]))[0] == pytest.approx(2, rel=1e-14)
    assert G.scalar_curvature_formula(jet_of("sphere", [0.0, 2.0, 0.0]))[0] == pytest.approx(0.5, rel=1e-14)


def test_critical_point():
    psi = jet_of("planar_harmonic", [0.0, 0.0], dim=2, coeffs=(0.0, 0.0, 1.0))
    with pytest.raises(G.CriticalPoint):
        G.geometry_sample(psi)


def test_psi_derivative_examples():
    psi = jet_of("point_charge", [1.0, 0.0, 0.0])
    assert G.psi_derivative(psi, psi, 1)[0] == pytest.approx(1)
    c = J.constant(np.array([3.0]), 3)
    assert G.psi_derivative(c, psi, 1)[0] == 0
    assert G.psi_derivative(c, psi, 2)[0] == 0
    # E = |grad psi| = 1/r^2 for psi = 1/r
    E = G.strength_jet(psi)
    assert G.psi_derivative(E, psi, 1)[0] == pytest.approx(2, rel=1e-14)


def test_surface_laplacian_examples():
    psi = jet_of("sphere", [0.0, 0.0, 1.0])
    assert G.surface_laplacian(psi, psi)[0] == pytest.approx(0, abs=1e-14)
    z = J.jet_seed(np.array([[0.0, 0.0, 1.0]]), 2)
    assert G.surface_laplacian(z, psi)[0] == pytest.approx(-2, rel=1e-14)
    pc = jet_of("point_charge", [0.3, -0.4, 1.1])
    inv = J.reciprocal(G.strength_jet(pc))
    assert G.surface_laplacian(inv, pc)[0] == pytest.approx(0, abs=1e-12)


def test_surface_hessian_examples():
    psi = jet_of("sphere", [1.0, 0.0, 0.0])
    c = J.constant(np.array([2.0]), 3)
    assert not G.surface_covariant_hessian(c, psi).any()
    z = J.jet_seed(np.array([[1.0, 0.0, 0.0]]), 2)
    np.testing.assert_allclose(G.surface_covariant_hessian(z, psi), 0, atol=1e-15)
    psi = jet_of("sphere", [0.0, 0.0, 1.0])
    z = J.jet_seed(np.array([[0.0, 0.0, 1.0]]), 2)
    H = G.surface_covariant_hessian(z, psi)[0]
    np.testing.assert_allclose(H, -np.diag([1.0, 1.0, 0.0]), atol=1e-15)


def test_surface_hessian_trace_matches_laplacian():
    spec = FL.FieldSpec("random_polynomial", 4, {"seed": 2})
    pts = FL.sample_points(spec, 40, 2)
    psi = FL.eval_field(spec, pts)
    u = J.sin(J.jet_seed(pts, 0)) * J.exp(J.jet_seed(pts, 3))
    geo = G.geometry_sample(psi)
    H = G.surface_covariant_hessian(u, psi)
    # the projected Hessian has no normal row or column
    assert np.max(np.abs(np.einsum("nij,nj->ni", H, geo.normal))) <= 1e-10
    lap = G.surface_laplacian(u, psi)
    np.testing.assert_allclose(np.trace(H, axis1=-2, axis2=-1), lap, rtol=1e-9, atol=1e-9)


def test_frame_tensors_examples():
    r = 2.0
    ft = G.frame_tensors([1 / r, 1 / r])
    np.testing.assert_allclose(ft.ricci_diag, [1 / r ** 2] * 2)
    assert ft.R == pytest.approx(2 / r ** 2)
    np.testing.assert_allclose(ft.einstein_diag, 0, atol=1e-16)
    ft = G.frame_tensors([1.0, 1.0, 1.0])
    assert ft.R == 6
    np.testing.assert_array_equal(ft.ricci_diag, [2, 2, 2])
    np.testing.assert_array_equal(ft.beta_diag, [2, 2, 2])
    assert G.frame_tensors([0.7, 0.0, 0.0, 0.0]).R == 0


def test_comb_id_examples():
    assert G.comb_id_check([1.0, 1.0, 1.0]) == pytest.approx((3, 3))
    assert G.comb_id_check([1.0, 1.0, 1.0, 1.0]) == pytest.approx((20, 20))
    assert G.comb_id_check([0.8, 0.0, 0.0]) == (0, 0)
    with pytest.raises(ValueError):
        G.comb_id_check([1.0, 2.0])


@pytest.mark.parametrize("n", [3, 4, 5])
def test_comb_id_random(n):
    k = np.random.default_rng(n).uniform(-3, 3, (1000, n))
    lhs, rhs = G.comb_id_check(k)
    scale = np.sum(np.abs(k), axis=-1) ** 4
    assert np.max(np.abs(lhs - rhs) / scale) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=6))
def test_frame_tensor_invariants(k):
    ft = G.frame_tensors(k)
    n = len(k)
    assert np.sum(ft.ricci_diag) == pytest.approx(ft.R, abs=1e-9)
    assert np.sum(ft.beta_diag) == pytest.approx((n - 1) * np.sum(k), abs=1e-9)


def test_sample_invariants():
    spec = FL.FieldSpec("random_polynomial", 4, {"seed": 5})
    psi = FL.eval_field(spec, FL.sample_points(spec, 200, 5))
    geo = G.geometry_sample(psi)
    assert np.max(np.abs(np.linalg.norm(geo.normal, axis=-1) - 1)) <= 1e-12
    P = geo.projector
    assert np.max(np.abs(P @ P - P)) <= 1e-12
    Wn = np.einsum("nij,nj->ni", geo.weingarten, geo.normal)
    assert np.all(np.linalg.norm(Wn, axis=-1) <= 1e-10 * np.linalg.norm(geo.weingarten, axis=(-2, -1)) + 1e-300)
    assert np.max(np.abs(np.sum(geo.principal_curvatures, -1) - geo.trW)) <= 1e-10 * max(1, np.max(np.abs(geo.trW)))
    assert np.all(np.diff(geo.principal_curvatures, axis=-1) >= 0)
    assert np.array_equal(geo.R_extrinsic, geo.trW ** 2 - geo.trW2)


def test_sphere_orientation():
    spec = FL.FieldSpec("sphere", 5)
    geo = G.geometry_sample(FL.eval_field(spec, FL.sample_points(spec, 30, 0)))
    assert np.all(geo.principal_curvatures > 0)


def test_sphere_identities_vanish():
    spec = FL.FieldSpec("sphere", 3)
    rep = G.identity_residuals(spec, FL.sample_points(spec, 50, 3))
    assert max(rep.max_abs().values()) <= 1e-12
    assert rep.all_pass


def test_report_passes_iff_within_tolerance():
    spec = FL.FieldSpec("random_polynomial", 3, {"seed": 1})
    rep = G.identity_residuals(spec, FL.sample_points(spec, 20, 1), tolerances={"main": 1e-30})
    for name, res in rep.residuals.items():
        np.testing.assert_array_equal(rep.passed[name], np.abs(res) <= rep.tolerances[name])
    assert set(rep.residuals) == set(rep.tolerances)
    assert not rep.all_pass


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_main_identity_universal(d, seed):
    spec = FL.FieldSpec("random_polynomial", d, {"seed": seed})
    rep = G.identity_residuals(spec, FL.sample_points(spec, 100, seed))
    assert rep.all_pass, rep.max_abs()
    assert ("2d_triv" in rep.residuals) == (d == 2)
    assert ("gauss" in rep.residuals) == (d == 3)


@pytest.mark.parametrize("name", list(FL.CATALOG))
def test_formula_equivalence_catalog(name):
    fd = FL.CATALOG[name]
    for dim in fd.dims:
        spec = FL.FieldSpec(name, dim)
        pts = FL.sample_points(spec, 200, 12)
        geo = G.geometry_sample(FL.eval_field(spec, pts))
        tol = G.default_tolerance(spec)
        assert np.all(np.abs(geo.R_formula - geo.R_extrinsic) <= tol * (1 + np.abs(geo.R_extrinsic)))


@pytest.mark.parametrize("name,dim", [(n, d) for n, fd in FL.CATALOG.items() if fd.harmonic for d in fd.dims])
def test_harmonic_specialization(name, dim):
    spec = FL.FieldSpec(name, dim)
    psi = FL.eval_field(spec, FL.sample_points(spec, 100, 4))
    lap_log = J.log(G.strength_jet(psi)).laplacian()
    geo = G.geometry_sample(psi)
    assert np.max(np.abs(lap_log + geo.R_extrinsic)) <= G.default_tolerance(spec) * max(1.0, np.max(np.abs(geo.R_extrinsic)))


def test_gauss_bonnet_spot_check():
    spec = FL.FieldSpec("quadratic_ellipsoid", 3)
    geo = G.geometry_sample(FL.eval_field(spec, FL.sample_points(spec, 100, 1)))
    k = geo.principal_curvatures
    np.testing.assert_allclose(geo.R_extrinsic, 2 * k[:, 0] * k[:, 1], rtol=1e-12, atol=1e-14)


def test_monge_curvature_identity():
    spec = FL.FieldSpec("monge_graph", 3, {"c20": 0.7, "c02": -0.3, "c11": 0.4, "c30": 0.2})
    rep = G.identity_residuals(spec, FL.sample_points(spec, 50, 9))
    assert "monge_K" in rep.residuals and rep.all_pass


@pytest.mark.parametrize("lam", [0.5, 2.0, 7.0])
def test_scaling_invariance(lam):
    spec = FL.FieldSpec("random_polynomial", 3, {"seed": 8})
    pts = FL.sample_points(spec, 50, 8)
    psi = FL.eval_field(spec, pts)
    scaled = psi * lam
    a, b = G.geometry_sample(psi), G.geometry_sample(scaled)
    np.testing.assert_allclose(b.R_extrinsic, a.R_extrinsic, rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(b.R_formula, a.R_formula, rtol=1e-10, atol=1e-10)
    mean, scalar = G.diffeo_residuals_jet(psi, G.diffeo_family("scale", lam))
    assert np.max(np.abs(mean)) <= 1e-7 and np.max(np.abs(scalar)) <= 1e-7


def test_diffeo_identity_matches_base():
    spec = FL.FieldSpec("random_polynomial", 3, {"seed": 3})
    pts = FL.sample_points(spec, 30, 3)
    rep = G.identity_residuals(spec, pts)
    mean, scalar = G.diffeo_residuals(spec, pts, "t")
    np.testing.assert_allclose(scalar, rep.residuals["main"], atol=1e-13)
    np.testing.assert_allclose(mean, rep.residuals["nH"], atol=1e-13)


def test_diffeo_orientation_flip_on_sphere():
    spec = FL.FieldSpec("sphere", 3)
    mean, scalar = G.diffeo_residuals(spec, FL.sample_points(spec, 30, 2), "-t")
    assert np.max(np.abs(mean)) <= 1e-10 and np.max(np.abs(scalar)) <= 1e-10


@pytest.mark.parametrize("f", G.DIFFEO_FAMILIES)
def test_diffeo_random_polynomial(f):
    spec = FL.FieldSpec("random_polynomial", 3, {"seed": 6})
    mean, scalar = G.diffeo_residuals(spec, FL.sample_points(spec, 50, 6), f)
    assert np.max(np.abs(mean)) <= 1e-6 and np.max(np.abs(scalar)) <= 1e-6


def test_diffeo_degenerate():
    spec = FL.FieldSpec("random_polynomial", 3, {"seed": 6})
    flat = lambda t: J.Curve1Jet(t, np.zeros_like(t), np.ones_like(t), np.zeros_like(t))  # noqa: E731
    with pytest.raises(ValueError):
        G.diffeo_residuals(spec, FL.sample_points(spec, 5, 6), flat)


def test_evolution_closed_forms():
    # psi = 1/r: trW = -2 psi, R = 2 psi^2, so both rates are analytic
    r = 1.5
    psi = jet_of("point_charge", [0.0, r, 0.0])
    assert G.mean_curvature_rate(psi)[0] == pytest.approx(-2, rel=1e-13)
    assert G.scalar_curvature_rate(psi)[0] == pytest.approx(4 / r, rel=1e-13)
    spec = FL.FieldSpec("point_charge", 3)
    h, rr, _ = G.evolution_residuals(spec, FL.sample_points(spec, 20, 1))
    assert np.max(np.abs(h)) <= 1e-8 and np.max(np.abs(rr)) <= 1e-8


def test_evolution_four_dimensional_spheres():
    spec = FL.FieldSpec("point_charge", 4)
    h, r, est = G.evolution_residuals(spec, FL.sample_points(spec, 20, 2))
    assert np.max(np.abs(h)) <= 1e-6 and np.max(np.abs(r)) <= 1e-6


def test_evolution_general_field():
    spec = FL.FieldSpec("random_polynomial", 3, {"seed": 2})
    pts = FL.sample_points(spec, 40, 2)
    psi = FL.eval_field(spec, pts)
    h, r, _ = G.evolution_residuals(spec, pts)
    assert np.max(np.abs(h) / (1 + np.abs(G.mean_curvature_rate(psi)))) <= 1e-6
    assert np.max(np.abs(r) / (1 + np.abs(G.scalar_curvature_rate(psi)))) <= 1e-6
