import numpy as np
import pytest

from levelset import fields as FL
from levelset import geometry as G
from levelset import pharmonic as PH

PS = [1.5, 2.0, 2.5, 3.0, 4.0]
DIMS = [2, 3, 4]


def radial_points(d, count=20, seed=0, r=(0.5, 2.0)):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.uniform(*r, (count, 1))


def on_axis(d, r):
    p = np.zeros((1, d))
    p[0, 0] = r
    return p


def test_case_validation():
    with pytest.raises(ValueError):
        PH.PHarmonicCase(1.0, 3)
    with pytest.raises(ValueError):
        PH.PHarmonicCase(2.0, 7)


def test_log_profile_closed_forms():
    case = PH.PHarmonicCase(3.0, 3)
    r = 2.0
    psi = FL.eval_field(case.spec, on_axis(3, r))
    geo = G.geometry_sample(psi)
    assert geo.trW[0] == pytest.approx(2 / r)
    dF = G.psi_derivative(G.strength_jet(psi), psi, 1)
    assert dF[0] == pytest.approx(-1 / r)
    res = PH.p_identity_residuals(case, on_axis(3, r))
    assert abs(res["TrW_p"][0]) <= 1e-14
    assert abs(res["R_p"][0]) <= 1e-13
    assert geo.R_extrinsic[0] == pytest.approx(2 / r ** 2)


def test_p4_planar_closed_form():
    case = PH.PHarmonicCase(4.0, 2)
    psi = FL.eval_field(case.spec, on_axis(2, 1.0))
    geo = G.geometry_sample(psi)
    assert geo.F[0] == pytest.approx(2 / 3)
    assert geo.trW[0] == pytest.approx(1.0)
    assert abs(PH.p_identity_residuals(case, on_axis(2, 1.0))["TrW_p"][0]) <= 1e-14


@pytest.mark.parametrize("p", PS)
@pytest.mark.parametrize("d", DIMS)
def test_identities(p, d):
    case = PH.PHarmonicCase(p, d)
    res = PH.p_identity_residuals(case, radial_points(d, seed=int(10 * p) + d))
    tol = 1e-9 if p == 2 else 1e-6
    for name, r in res.items():
        assert np.max(np.abs(r)) <= tol, name


@pytest.mark.parametrize("p", PS)
@pytest.mark.parametrize("d", DIMS)
def test_r_fp_diff(p, d):
    case = PH.PHarmonicCase(p, d)
    res = PH.r_fp_diff_residual(case, radial_points(d, seed=d))
    assert np.max(np.abs(res)) <= 1e-6


def test_r_fp_diff_pinned():
    # psi = log r in R^3 with p = 3: R/F^p = 2r = trW/F^(p-1), both sides 2
    case = PH.PHarmonicCase(3.0, 3)
    assert abs(PH.r_fp_diff_residual(case, on_axis(3, 1.0))[0]) <= 1e-6
    assert abs(PH.r_fp_diff_residual(PH.PHarmonicCase(4.0, 3), on_axis(3, 1.0))[0]) <= 1e-6


def test_tangential_term_vanishes():
    case = PH.PHarmonicCase(2.5, 3)
    tang, Y = PH.tangential_term(case, radial_points(3, 10))
    assert np.max(np.abs(tang)) <= 1e-10 and np.max(np.abs(Y)) <= 1e-10


@pytest.mark.parametrize("p,r,tol", [(4.0, 1.0, 1e-6), (2.0, 1.3, 1e-9), (1.5, 2.0, 1e-6), (3.0, 0.7, 1e-6)])
def test_min_principle(p, r, tol):
    case = PH.PHarmonicCase(p, 2)
    assert abs(PH.min_principle_residual(case, on_axis(2, r))[0]) <= tol
    assert np.max(np.abs(PH.min_principle_residual(case, radial_points(2, 20, 3)))) <= 1e-6


def test_min_principle_needs_plane():
    with pytest.raises(ValueError):
        PH.min_principle_residual(PH.PHarmonicCase(3.0, 3), on_axis(3, 1.0))


def test_alpha_examples():
    assert all(PH.alpha_admissible(2.0, a) for a in np.linspace(-10, 10, 41))
    assert PH.alpha_admissible(1.5, -0.5)
    assert not PH.alpha_admissible(4.0, -3.0)
    with pytest.raises(ValueError):
        PH.alpha_admissible(1.0, 0.0)


def test_alpha_intervals_match_sign_conditions():
    rng = np.random.default_rng(2024)
    ps = rng.uniform(1.0, 6.0, 100_000)
    ps[ps == 1.0] = 1.5
    alphas = rng.uniform(-12.0, 12.0, 100_000)
    mismatches = [(p, a) for p, a in zip(ps, alphas) if PH.alpha_admissible(p, a) != PH.alpha_conditions(p, a)]
    assert not mismatches


def test_alpha_range_for_one_minus_p():
    ps = PH.admissible_p_range()
    assert ps[0] == pytest.approx(1.5, abs=1e-3)
    assert ps[-1] == pytest.approx(3.0, abs=1e-3)
    # contiguous on the grid
    assert np.allclose(np.diff(ps), 1e-3)
