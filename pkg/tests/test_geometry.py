import numpy as np
import pytest

from qchkit import algebra, catalog, geometry, qch
from qchkit.algebra import EYE, STANDARD_J
from qchkit.chart import chart_from_dict
from qchkit.errors import DomainError, IncompatiblePair
from qchkit.jets import Jet

SPHERE_FACTOR = {
    "name": "sphere_x_plane",
    "metric": ["4/(1 + x1^2 + x2^2)^2", "0", "0", "0", "4/(1 + x1^2 + x2^2)^2", "0", "0", "1", "0", "1"],
}


def sample(fixture, n, seed=0):
    spec = fixture.spec
    box = np.array(catalog.sample_box(spec))
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        p = tuple(box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random(4))
        if not spec.contains(p):
            out.append(p)
    return out


@pytest.fixture(scope="module")
def fixtures():
    return {name: catalog.get(name) for name in catalog.NAMES}


class TestChristoffel:
    def test_flat(self, fixtures):
        assert np.all(geometry.christoffel(fixtures["flat_c2"].spec, (0.3, 0.1, 0.2, 0.4)).gamma == 0)

    def test_sphere_origin(self):
        g = geometry.christoffel(chart_from_dict(SPHERE_FACTOR), (0, 0, 0, 0)).gamma
        assert np.abs(g).max() < 1e-15

    def test_sphere_hand_formula(self):
        x1, x2 = 0.3, 0.1
        gam = geometry.christoffel(chart_from_dict(SPHERE_FACTOR), (x1, x2, 0, 0)).gamma
        q = 1 + x1**2 + x2**2
        assert gam[0, 0, 0] == pytest.approx(-2 * x1 / q, rel=1e-13)
        assert gam[0, 1, 1] == pytest.approx(2 * x1 / q, rel=1e-13)
        assert gam[0, 0, 1] == pytest.approx(-2 * x2 / q, rel=1e-13)
        np.testing.assert_array_equal(gam, np.swapaxes(gam, 1, 2))

    def test_calabi_compatibility(self, fixtures):
        spec = fixtures["calabi"].spec
        geo = geometry.riemann_at(spec, (0, 0, 1, 0))
        assert geometry.metric_compatibility(geo) < 1e-11

    def test_outside_domain(self, fixtures):
        with pytest.raises(DomainError):
            geometry.riemann_at(fixtures["calabi"].spec, (0, 0, -1, 0))


class TestRiemann:
    def test_flat(self, fixtures):
        geo = geometry.riemann_at(fixtures["flat_c2"].spec, (0.5, -0.5, 0.2, 0.9))
        assert np.abs(geo.riemann).max() < 1e-12

    def test_product_origin(self, fixtures):
        geo = geometry.riemann_at(fixtures["product_spheres"].spec, (0, 0, 0, 0))
        R = geo.riemann_frame
        assert R[0, 1, 1, 0] == pytest.approx(1.0, abs=1e-13)
        assert R[2, 3, 3, 2] == pytest.approx(1.0, abs=1e-13)
        assert abs(R[0, 2, 2, 0]) < 1e-13 and abs(R[0, 1, 3, 2]) < 1e-13
        assert geo.tau == pytest.approx(4.0)

    def test_fubini_study_constant_hsc(self, fixtures):
        rng = np.random.default_rng(1)
        for p in ((0, 0, 0, 0), (0.4, -0.3, 0.2, 0.7)):
            geo = geometry.riemann_at(fixtures["fubini_study"].spec, p)
            for X in rng.normal(size=(6, 4)):
                assert qch.hsc(geo.riemann, geo.J, X, geo.metric) == pytest.approx(4.0, abs=1e-12)

    @pytest.mark.parametrize("name", catalog.NAMES)
    def test_symmetries_and_compatibility(self, fixtures, name):
        for p in sample(fixtures[name], 5):
            geo = geometry.riemann_at(fixtures[name].spec, p)
            assert geometry.metric_compatibility(geo) < 1e-11
            assert geometry.curvature_symmetry(geo) < 1e-9
            assert geo.tau == pytest.approx(algebra.scalar_curvature(geo.riemann, geo.metric))


class TestComplexStructure:
    def test_standard(self):
        np.testing.assert_allclose(geometry.complex_structure_from(EYE, STANDARD_J.T), STANDARD_J)

    def test_calabi(self, fixtures):
        spec = fixtures["calabi"].spec
        p = (0, 0, 1, 0)
        J = geometry.complex_structure_from(spec.metric_value(p), spec.omega_jet(p).v)
        assert np.abs(J @ J + EYE).max() < 1e-12
        np.testing.assert_allclose(J, spec.J_jet(p).v, atol=1e-14)

    def test_degenerate_form(self):
        Om = np.zeros((4, 4))
        Om[0, 1], Om[1, 0] = 1, -1
        with pytest.raises(IncompatiblePair):
            geometry.complex_structure_from(EYE, Om)

    def test_kahler_flat(self, fixtures):
        assert geometry.kahler_residual(geometry.riemann_at(fixtures["flat_c2"].spec, (0.1, 0, 0, 0))) == 0

    def test_kahler_calabi(self, fixtures):
        for p in sample(fixtures["calabi"], 20, seed=3):
            assert geometry.kahler_residual(geometry.riemann_at(fixtures["calabi"].spec, p)) < 1e-9

    def test_perturbed_structure_is_not_parallel(self, fixtures):
        geo = geometry.riemann_at(fixtures["calabi"].spec, (0.2, 0.1, 1.4, 0.3))
        rng = np.random.default_rng(0)
        N = rng.normal(size=(4, 4))
        N = 0.01 * (N + N.T)
        A = geo.J + N
        A = 0.5 * (A - np.linalg.solve(geo.metric, A.T @ geo.metric))  # re-skew
        pert = geo.J_jet + Jet(0, A - geo.J)
        assert geometry.kahler_residual(geo, pert) > 1e-3


class TestResiduals:
    def test_semisym_symmetric_fixtures(self, fixtures):
        for name in ("flat_c2", "product_spheres", "fubini_study"):
            for p in sample(fixtures[name], 3):
                assert geometry.semisym_residual(geometry.riemann_at(fixtures[name].spec, p)) < 1e-9

    def test_semisym_calabi(self, fixtures):
        for p in sample(fixtures["calabi"], 5):
            assert geometry.semisym_residual(geometry.riemann_at(fixtures["calabi"].spec, p)) < 1e-8

    def test_calabi_general_control(self, fixtures):
        geo = geometry.riemann_at(fixtures["calabi_general"].spec, (0, 0, 2, 0))
        assert geometry.semisym_residual(geo) > 1e-4
        assert geometry.rweyl_residual(geo) > 1e-4
        coeffs, fit = geometry.frame_qch(geo)
        assert fit < 1e-10 and abs(geo.tau - geometry.weyl_at(geo).kappa) > 1e-4

    def test_calabi_general_degenerate_slice(self, fixtures):
        # 2V - zV' = z - z^3 vanishes at z = 1
        geo = geometry.riemann_at(fixtures["calabi_general"].spec, (0.3, -0.2, 1.0, 0.5))
        assert geometry.semisym_residual(geo) < 1e-12

    def test_rweyl(self, fixtures):
        p = sample(fixtures["calabi"], 1)[0]
        assert geometry.rweyl_residual(geometry.riemann_at(fixtures["calabi"].spec, p)) < 1e-8
        assert geometry.rweyl_residual(geometry.riemann_at(fixtures["flat_c2"].spec, (0, 0, 0, 0))) == 0


class TestLee:
    def test_kahler_structure_has_zero_lee_form(self, fixtures):
        geo = geometry.riemann_at(fixtures["calabi"].spec, (0.3, 0.2, 1.1, 0.0))
        assert np.abs(geometry.lee_form_at(geo, "J").theta).max() < 1e-12

    def test_product_opposite_is_kahler(self, fixtures):
        geo = geometry.riemann_at(fixtures["product_spheres"].spec, (0.2, -0.1, 0.3, 0.1))
        lee = geometry.lee_form_at(geo, "Jbar", analytic=False)
        assert np.abs(lee.theta).max() < 1e-9
        assert geometry.gauduchon_residual(geo, lee) < 1e-8

    def test_calabi_solved_matches_analytic(self, fixtures):
        spec = fixtures["calabi"].spec
        for p in sample(fixtures["calabi"], 5):
            geo = geometry.riemann_at(spec, p)
            lee = geometry.lee_form_at(geo)
            assert lee.solve_residual < 1e-9
            np.testing.assert_allclose(lee.theta_solved, [0, 0, 2 / p[2], 0], atol=1e-12)
            assert lee.norm2 > 0

    @pytest.mark.parametrize("name", ["calabi", "calabi_general"])
    def test_gauduchon_from_analytic_and_solved(self, fixtures, name):
        spec = fixtures[name].spec
        for p in sample(fixtures[name], 10, seed=5):
            geo = geometry.riemann_at(spec, p, order=3)
            assert geometry.gauduchon_residual(geo, geometry.lee_form_at(geo)) < 1e-7
            assert geometry.gauduchon_residual(geo, geometry.lee_form_at(geo, analytic=False)) < 1e-7

    def test_gauduchon_flat(self, fixtures):
        geo = geometry.riemann_at(fixtures["flat_c2"].spec, (0, 0, 0, 0), order=3)
        assert geometry.gauduchon_residual(geo, geometry.lee_form_at(geo)) == 0

    def test_codifferential_closed_form(self, fixtures):
        # theta = 2 dz / z, so |theta|^2 + 2 delta theta = 8V/z^3 - 4V'/z^2
        spec = fixtures["calabi_general"].spec
        z = 1.7
        geo = geometry.riemann_at(spec, (0.1, 0.2, z, 0.3))
        lee = geometry.lee_form_at(geo)
        V, dV = z**3 + z, 3 * z**2 + 1
        assert lee.norm2 + 2 * lee.codifferential == pytest.approx(8 * V / z**3 - 4 * dV / z**2, rel=1e-12)


class TestFoliation:
    def test_product_vanishes(self, fixtures):
        geo = geometry.riemann_at(fixtures["product_spheres"].spec, (0.1, 0.2, 0.3, 0.1))
        r = geometry.foliation_sweep(geo)
        assert r.residual_a < 1e-12 and r.residual_b < 1e-12

    def test_calabi_pins_a_reading(self, fixtures):
        spec = fixtures["calabi"].spec
        for p in sample(fixtures["calabi"], 5):
            geo = geometry.riemann_at(spec, p)
            f = geo.frame
            r = geometry.foliation_residual(geo, f.e(0), f.e(2), f.e(2))
            assert r.best < 1e-7
            assert geometry.foliation_sweep(geo).residual_b < 1e-7

    def test_unscaled_lee_form_fails_both_readings(self, fixtures):
        geo = geometry.riemann_at(fixtures["calabi"].spec, (0.1, 0.2, 1.3, 0.0))
        r = geometry.foliation_sweep(geo, theta_scale=1.0)
        assert min(r.residual_a, r.residual_b) > 0.1

    def test_linear_in_zeta(self, fixtures):
        geo = geometry.riemann_at(fixtures["calabi"].spec, (0.1, 0.2, 1.3, 0.0))
        f = geo.frame
        zeta = 0.7 * f.e(0) - 0.4 * f.e(1)
        base = geometry.foliation_residual(geo, zeta, f.e(2), f.e(3), theta_scale=1.0)
        for s in (0.5, 2.0, -3.0):
            r = geometry.foliation_residual(geo, s * zeta, f.e(2), f.e(3), theta_scale=1.0)
            assert r.lhs == pytest.approx(s * base.lhs, rel=1e-12)
            assert r.residual_a == pytest.approx(abs(s) * base.residual_a, rel=1e-12)


class TestInvariance:
    def test_frame_covariance(self, fixtures):
        spec = fixtures["calabi"].spec
        geo = geometry.riemann_at(spec, (0.2, -0.3, 1.6, 0.1))
        ref, _ = geometry.frame_qch(geo)
        d = spec.dist_jet(geo.point).v
        std = algebra.make_adapted_frame(EYE, STANDARD_J, EYE[0])
        for ang, hint in [(0.3, EYE[0]), (1.2, EYE[1]), (2.0, np.array([1.0, -1, 0.5, 0]))]:
            dd = np.cos(ang) * d + np.sin(ang) * geo.J @ d
            fr = algebra.make_adapted_frame(geo.metric, geo.J, dd, e3_hint=hint)
            R = fr.components(geo.riemann)
            c, res = qch.fit_qch(R, EYE, STANDARD_J, std)
            assert res < 1e-10
            assert c.as_tuple() == pytest.approx(ref.as_tuple(), abs=1e-8)

    @pytest.mark.parametrize("s2", [0.25, 4.0])
    def test_scaling_law(self, fixtures, s2):
        p = (0.2, -0.3, 1.6, 0.1)
        base = geometry.riemann_at(fixtures["calabi_general"].spec, p)
        scaled = geometry.riemann_at(fixtures["calabi_general"].spec.with_metric_scale(s2), p)
        c0, _ = geometry.frame_qch(base)
        c1, res = geometry.frame_qch(scaled)
        assert np.array(c1.as_tuple()) * s2 == pytest.approx(np.array(c0.as_tuple()), abs=1e-10)
        assert res < 1e-10
        assert (geometry.semisym_residual(scaled) > 1e-4) == (geometry.semisym_residual(base) > 1e-4)

    def test_semisymmetric_faces_agree(self, fixtures):
        for name in ("product_spheres", "calabi", "flat_c2"):
            for p in sample(fixtures[name], 4, seed=9):
                geo = geometry.riemann_at(fixtures[name].spec, p)
                c, _ = geometry.frame_qch(geo)
                assert abs(geo.tau - geometry.weyl_at(geo).kappa) < 1e-7
                assert abs(2 * c.a + c.b) < 1e-7
                assert qch.gray_residual(geo.riemann_frame, geo.Jbar_frame, 1) < 1e-7
