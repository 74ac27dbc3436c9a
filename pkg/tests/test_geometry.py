import numpy as np
import numpy.testing as npt
import pytest

import polar_derham as pd
from polar_derham import SingularityProximityError


EPS_LIST = (1e-2, 1e-3, 1e-4)


# ------------------------------ polar map F ------------------------------------

class TestPolarMap:
    def test_polar_curve_collapse(self, cx443):
        F = cx443.polar_map
        for t in (0.0, 0.1, 0.5, 0.93):
            points = np.stack([F.eval((r, 0.0, t)) for r in (0.0, 1 / 3, 1.0)])
            assert np.abs(points - points[0]).max() <= 1e-13
            assert np.abs(points[:, 2]).max() <= 1e-13  # w = 0

    def test_radius_endpoints(self, cx443):
        data = cx443.polar_map.data
        assert data.rhos[0] == 0.0
        assert data.rhos[-1] == 1.0

    def test_rho_bar_floor(self, cx443):
        with pytest.raises(ValueError, match="exceed 2"):
            pd.build_polar_map(cx443.tensor, 2.0)
        with pytest.raises(ValueError):
            pd.TorusComplexSpec(degrees=(2, 2, 2), dims=(4, 4, 3), rho_bar=1.5)

    def test_control_net_formula(self, cx443):
        F = cx443.polar_map
        vmap = cx443.tensor.index_map
        d = F.data
        i, j, k = 2, 3, 2
        expected = np.array([
            (d.rho_bar + d.rhos[j - 1] * np.cos(d.thetas[i - 1])) * np.cos(d.phis[k - 1]),
            (d.rho_bar + d.rhos[j - 1] * np.cos(d.thetas[i - 1])) * np.sin(d.phis[k - 1]),
            d.rhos[j - 1] * np.sin(d.thetas[i - 1]),
        ])
        npt.assert_allclose(F.control_points[vmap.ravel(i, j, k) - 1], expected)


# ------------------------------- Jacobian --------------------------------------

class TestJacobian:
    def test_singular_at_polar_face(self, cx443):
        for (r, t) in [(0.2, 0.1), (0.7, 0.8)]:
            _, _, det = cx443.polar_map.jacobian((r, 0.0, t))
            assert abs(det) <= 1e-12

    def test_orientation_interior(self, cx443):
        rng = np.random.default_rng(31)
        for _ in range(100):
            point = (rng.uniform(0, 1), rng.uniform(0.1, 1.0), rng.uniform(0, 1))
            assert cx443.polar_map.jacobian(point)[2] > 0.0

    def test_finite_difference_oracle(self, cx443):
        F = cx443.polar_map
        rng = np.random.default_rng(32)
        h = 1e-6
        for _ in range(20):
            p = np.array([rng.uniform(.05, .95), rng.uniform(.15, .9),
                          rng.uniform(.05, .95)])
            _, jac, _ = F.jacobian(p)
            fd = np.empty((3, 3))
            for a in range(3):
                e = np.zeros(3)
                e[a] = h
                fd[:, a] = (F.eval(p + e) - F.eval(p - e)) / (2 * h)
            assert np.abs(jac - fd).max() / np.abs(jac).max() <= 1e-6

    def test_point_domain_check(self, cx443):
        with pytest.raises(ValueError, match="outside"):
            cx443.polar_map.eval((0.1, 1.5, 0.1))


# ---------------------------- geometry map G -----------------------------------

class TestGeometryMap:
    def test_center_points_at_120_degrees(self, cx443):
        G = cx443.geometry_map.reduced_control_points
        c = cx443.counts
        data = cx443.polar_map.data
        rho2 = data.rhos[1]
        for k in range(c.nt):
            triple = G[k * c.nbar0: k * c.nbar0 + 3]
            # meridian-plane coordinates: (radial offset, height)
            radial = np.hypot(triple[:, 0], triple[:, 1]) - data.rho_bar
            planar = np.column_stack([radial, triple[:, 2]])
            npt.assert_allclose(planar[0], [rho2, 0.0], atol=1e-14)
            npt.assert_allclose(planar[1], [-rho2 / 2, np.sqrt(3) / 2 * rho2],
                                atol=1e-14)
            npt.assert_allclose(planar[2], [-rho2 / 2, -np.sqrt(3) / 2 * rho2],
                                atol=1e-14)
            for a in range(3):
                cos = planar[a] @ planar[(a + 1) % 3] / (rho2 ** 2)
                assert abs(cos - np.cos(2 * np.pi / 3)) <= 1e-12

    def test_outer_points_match_polar_net(self, cx443):
        G = cx443.geometry_map.reduced_control_points
        c = cx443.counts
        vmap = cx443.tensor.index_map
        F = cx443.polar_map.control_points
        for k in range(1, c.nt + 1):
            for j in range(3, c.ns + 1):
                for i in range(1, c.nr + 1):
                    ell = 3 + i + (j - 3) * c.nr + (k - 1) * c.nbar0
                    npt.assert_allclose(G[ell - 1], F[vmap.ravel(i, j, k) - 1])

    def test_geometry_map_is_c1_at_polar_curve(self, cx443):
        for axis in range(3):
            coeffs = cx443.geometry_map.reduced_control_points[:, axis]
            report = cx443.smoothness_probe(coeffs, t=0.2, eps_list=EPS_LIST)
            disc, table = report.scalar()
            assert disc <= 1e-12
            for _, delta in table:
                assert delta <= 1e-10 or delta <= table[0][1]


# ----------------------------- pushforwards ------------------------------------

class TestPushforward:
    def test_level0_constant(self, cx443):
        ones = np.ones(cx443.counts.n0)
        for point in [(0.0, 0.0, 0.0), (0.3, 0.0, 0.7), (0.9, 0.5, 0.2)]:
            xyz, value = cx443.pushforward(ones, point, level=0)
            assert abs(value - 1.0) <= 1e-12

    def test_gradient_chain_rule(self, cx443):
        rng = np.random.default_rng(33)
        f = rng.standard_normal(cx443.counts.n0)
        g = cx443.grad(f)
        h = 1e-6

        def scalar(pt):
            return f @ cx443.reduced_basis_values(0, pt)

        for _ in range(10):
            p = np.array([rng.uniform(.05, .95), rng.uniform(.15, .9),
                          rng.uniform(.05, .95)])
            xyz, value = cx443.pushforward(g, p)
            fd_grad = np.array([
                (scalar(p + h * e) - scalar(p - h * e)) / (2 * h)
                for e in np.eye(3)
            ])
            _, jac, _ = cx443.polar_map.jacobian(p)
            expected = np.linalg.solve(jac.T, fd_grad)
            err = np.abs(value - expected).max() / max(1.0, np.abs(expected).max())
            assert err <= 1e-4

    def test_level3_bounded_near_polar_curve(self, cx443):
        rng = np.random.default_rng(34)
        m = rng.standard_normal(cx443.counts.n3)
        sweep = np.logspace(-1, -6, 11)
        values = [cx443.pushforward(m, (0.37, s, 0.44), level=3)[1] for s in sweep]
        assert np.all(np.isfinite(values))
        scale = 1.0 + abs(values[0])
        assert np.abs(values).max() <= 100 * scale
        # the sweep converges to the finite limit the construction guarantees
        assert abs(values[-1] - values[-2]) <= abs(values[1] - values[0]) + 1e-12

    def test_singularity_floor(self, cx443):
        m = np.zeros(cx443.counts.n3)
        with pytest.raises(SingularityProximityError, match="s_min"):
            cx443.pushforward(m, (0.2, 1e-10, 0.4), level=3)
        with pytest.raises(SingularityProximityError):
            cx443.pushforward(np.zeros(cx443.counts.n1), (0.2, 0.0, 0.4), level=1)

    def test_level0_allowed_at_polar_face(self, cx443):
        f = np.zeros(cx443.counts.n0)
        f[0] = 1.0
        xyz, value = cx443.pushforward(f, (0.5, 0.0, 0.25), level=0)
        assert np.isfinite(value)

    def test_coefficient_length_check(self, cx443):
        with pytest.raises(ValueError, match="coefficients"):
            cx443.pushforward(np.zeros(5), (0.3, 0.4, 0.5), level=0)


# --------------------------- smoothness probes ---------------------------------

class TestSmoothnessProbe:
    def test_constant_field_all_zero(self, cx443):
        # discrepancies vanish up to roundoff in the weighted sums (the
        # 1/eps division amplifies the 1e-16 noise at the smallest step)
        report = cx443.smoothness_probe(np.ones(cx443.counts.n0), t=0.4,
                                        eps_list=EPS_LIST)
        disc, table = report.scalar()
        assert disc <= 1e-15
        for eps, delta in table:
            assert delta <= 1e-11

    def test_reduced_fields_single_valued(self, cx443):
        rng = np.random.default_rng(35)
        report = cx443.smoothness_probe(rng.standard_normal(cx443.counts.n0),
                                        t=0.61, eps_list=EPS_LIST)
        disc, table = report.scalar()
        assert disc <= 1e-12
        deltas = [d for _, d in table]
        assert deltas[1] <= deltas[0] and deltas[2] <= deltas[1]

    def test_every_basis_function(self, cx443):
        report = cx443.basis_smoothness_probe(t=0.33, eps_list=EPS_LIST, num_r=8)
        assert report.value_discrepancy.shape == (cx443.counts.n0,)
        assert report.value_discrepancy.max() <= 1e-12
        deltas = [d for _, d in report.c1_table]
        floor = 1e-10
        assert np.all((deltas[1] <= deltas[0]) | (deltas[1] <= floor))
        assert np.all((deltas[2] <= deltas[1]) | (deltas[2] <= floor))

    def test_raw_tensor_negative_control(self, cx443):
        report = cx443.basis_smoothness_probe(t=0.33, eps_list=(1e-2,),
                                              space="tensor")
        assert report.value_discrepancy.max() > 1e-3

    def test_raw_random_field_negative_control(self, cx443):
        rng = np.random.default_rng(36)
        coeffs = rng.standard_normal(cx443.tensor.level_dim(0))
        report = cx443.smoothness_probe(coeffs, t=0.5, eps_list=(1e-2,),
                                        space="tensor")
        disc, _ = report.scalar()
        assert disc > 1e-3

    def test_probe_on_odd_poloidal_count(self, complex_cache):
        # no antipodal parametric pair exists for odd nr; the weighted
        # three-direction combination must still shrink linearly
        cx = complex_cache(dims=(5, 5, 4))
        report = cx.basis_smoothness_probe(t=0.4, eps_list=EPS_LIST)
        assert report.value_discrepancy.max() <= 1e-12
        deltas = [d for _, d in report.c1_table]
        floor = 1e-10
        assert np.all((deltas[1] <= deltas[0]) | (deltas[1] <= floor))
        assert np.all((deltas[2] <= deltas[1]) | (deltas[2] <= floor))

    def test_unknown_space_rejected(self, cx443):
        with pytest.raises(ValueError, match="unknown space"):
            cx443.smoothness_probe(np.ones(cx443.counts.n0), 0.3, EPS_LIST,
                                   space="bogus")
