import numpy as np
import pytest

from conftest import random_s1_mesh
from pfc.kernels import (bdf2_coeffs, cross_form_theta, doc_kernels,
                         doc_kernels_recursive, eigen_bounds, kernel_matrices,
                         max_eig_bound, min_eig_bound, quad_form_b,
                         quad_form_theta, refined_quad_const,
                         scaled_tridiagonals, tridiag_extreme_eig,
                         verify_orthogonality, verify_telescope)
from pfc.mesh import (R_SUP, TimeMesh, mesh_from_ratios, stability_bound,
                      uniform_mesh)


class TestBDF2Coeffs:
    def test_first_level(self):
        c = bdf2_coeffs(TimeMesh(np.array([0.5])))
        assert c.b0[0] == pytest.approx(2.0)
        assert c.b1[0] == 0.0

    def test_hand_values(self):
        # tau_n = 0.1, r_n = 1
        m = TimeMesh(np.array([0.1, 0.1]))
        c = bdf2_coeffs(m)
        assert c.b0[1] == pytest.approx(15.0)
        assert c.b1[1] == pytest.approx(-5.0)

    def test_degenerate_ratio_limit(self):
        m = mesh_from_ratios(1.0, [1e-10])
        c = bdf2_coeffs(m)
        assert c.b0[1] == pytest.approx(1.0 / m.steps[1], rel=1e-8)
        assert abs(c.b1[1]) < 1e-9 / m.steps[1]

    def test_signs_and_scaling(self, rng):
        for _ in range(20):
            m = random_s1_mesh(rng)
            c = bdf2_coeffs(m)
            assert np.all(c.b0 > 0)
            assert np.all(c.b1 <= 0)
            scaled = m.steps * c.b0
            assert np.all(scaled > 1.0 - 1e-12)
            assert np.all(scaled < 2.0)


class TestDOCKernels:
    def test_first_level(self):
        d = doc_kernels(TimeMesh(np.array([0.7])))
        assert d.rows[0][0] == pytest.approx(0.7)

    def test_uniform_hand_values(self):
        d = doc_kernels(uniform_mesh(3, 3.0))  # tau = 1
        # level 2: theta_0 = 2/3, theta_1 = 1/3
        assert d.rows[1][1] == pytest.approx(2.0 / 3.0)
        assert d.rows[1][0] == pytest.approx(1.0 / 3.0)
        # level 3: theta_0 = 2/3, theta_1 = 2/9, theta_2 = 1/9
        assert d.rows[2][2] == pytest.approx(2.0 / 3.0)
        assert d.rows[2][1] == pytest.approx(2.0 / 9.0)
        assert d.rows[2][0] == pytest.approx(1.0 / 9.0)

    def test_row_sums_are_steps(self, rng):
        for _ in range(20):
            m = random_s1_mesh(rng)
            sums = doc_kernels(m).row_sums()
            assert np.allclose(sums, m.steps, rtol=1e-12, atol=0)

    def test_positive(self, rng):
        for _ in range(20):
            m = random_s1_mesh(rng)
            for row in doc_kernels(m).rows:
                assert np.all(row > 0)

    def test_recursion_matches_product(self, rng):
        for _ in range(20):
            m = random_s1_mesh(rng)
            a = doc_kernels(m)
            b = doc_kernels_recursive(m)
            for ra, rb in zip(a.rows, b.rows):
                assert np.allclose(ra, rb, rtol=1e-12, atol=0)


class TestOrthogonality:
    def test_single_level(self):
        assert verify_orthogonality(TimeMesh(np.array([0.3]))) == 0.0

    def test_uniform(self):
        assert verify_orthogonality(uniform_mesh(50, 1.0)) <= 1e-12

    def test_random_s1(self, rng):
        m = random_s1_mesh(rng, n_max=200, n_min=150)
        assert verify_orthogonality(m) <= 1e-10

    def test_matrix_identity(self, rng):
        m = random_s1_mesh(rng, n_max=40, n_min=20)
        km = kernel_matrices(m)
        resid = np.max(np.abs(km.Theta2 @ km.B2 - np.eye(m.N)))
        assert resid <= 1e-10


class TestTelescope:
    def test_constant_sequence(self, rng):
        m = random_s1_mesh(rng, n_max=30)
        assert verify_telescope(m, np.full(m.N + 1, 4.2)) <= 1e-13

    def test_linear_sequence(self, rng):
        m = random_s1_mesh(rng, n_max=30)
        v = np.concatenate([[0.0], m.times])
        assert verify_telescope(m, v) <= 1e-12

    def test_random_sequence(self, rng):
        m = random_s1_mesh(rng, n_max=100, n_min=50)
        v = rng.standard_normal(m.N + 1)
        assert verify_telescope(m, v) <= 1e-10

    def test_length_checked(self):
        m = uniform_mesh(5, 1.0)
        with pytest.raises(ValueError):
            verify_telescope(m, np.zeros(3))


class TestScaledMatrices:
    def test_entries(self, rng):
        m = random_s1_mesh(rng, n_max=20, n_min=5)
        km = kernel_matrices(m)
        tb0, tb1 = scaled_tridiagonals(m)
        assert np.allclose(np.diag(km.B2t), tb0)
        assert np.allclose(np.diag(km.B2t, -1), tb1[1:])
        assert np.allclose(km.Bt, km.B2t + km.B2t.T)


class TestEigenBounds:
    def test_tridiag_solver_against_dense(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 30))
            d = rng.standard_normal(n)
            e = rng.standard_normal(n - 1)
            dense = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
            lams = np.linalg.eigvalsh(dense)
            assert tridiag_extreme_eig(d, e, "min") == pytest.approx(lams[0], abs=1e-9)
            assert tridiag_extreme_eig(d, e, "max") == pytest.approx(lams[-1], abs=1e-9)

    def test_certificates_on_s1_meshes(self, rng):
        for _ in range(20):
            m = random_s1_mesh(rng, n_max=100)
            eb = eigen_bounds(m)
            assert eb.s1_ok
            assert eb.lam_min >= 21.0 / 40.0 - 1e-9
            assert eb.lam_max <= 53.0 / 5.0 + 1e-9
            assert eb.quad_const <= 39.0

    def test_against_dense_eigensolver(self, rng):
        m = random_s1_mesh(rng, n_max=50, n_min=10)
        km = kernel_matrices(m)
        eb = eigen_bounds(m)
        assert eb.lam_min == pytest.approx(np.linalg.eigvalsh(km.Bt)[0], abs=1e-9)
        prod = km.B2t.T @ km.B2t
        assert eb.lam_max == pytest.approx(np.linalg.eigvalsh(prod)[-1], abs=1e-9)

    def test_uniform_mesh_values(self):
        eb = eigen_bounds(uniform_mesh(50, 1.0))
        # interior Gershgorin rows give min_eig_bound(1, 1) = 2 and
        # max_eig_bound(1, 1) = 4; the first level (ratio 0) weakens the
        # lower bound to min_eig_bound(0, 1) = 1.5
        assert eb.lam_min >= min_eig_bound(0.0, 1.0) - 1e-9
        assert eb.lam_max <= max_eig_bound(1.0, 1.0) + 1e-9
        assert eb.quad_const <= max_eig_bound(1.0, 1.0) / min_eig_bound(0.0, 1.0) ** 2


class TestBoundFunctions:
    def test_hand_values(self):
        assert min_eig_bound(0.0, 0.0) == pytest.approx(2.0)
        assert max_eig_bound(0.0, 0.0) == pytest.approx(1.0)
        assert min_eig_bound(1.0, 1.0) == pytest.approx(2.0)
        assert max_eig_bound(1.0, 1.0) == pytest.approx(4.0)

    def test_global_bounds(self, rng):
        pts = rng.uniform(0, R_SUP - 1e-9, size=(500, 2))
        for z, s in pts:
            assert min_eig_bound(z, s) > 21.0 / 40.0
            assert max_eig_bound(z, s) < 53.0 / 5.0
        r = R_SUP - 1e-12
        assert max_eig_bound(r, r) < 53.0 / 5.0

    def test_domain_checked(self):
        with pytest.raises(ValueError):
            min_eig_bound(3.6, 0.0)
        with pytest.raises(ValueError):
            max_eig_bound(0.0, 3.6)

    def test_refined_constants(self):
        assert refined_quad_const(0.5) == 1.19
        assert refined_quad_const(2.0) == 3.25
        assert refined_quad_const(3.0, 1.45) == 3.94
        assert refined_quad_const(3.0) == 4.0
        assert refined_quad_const(3.0, 2.0) == 4.0


class TestQuadraticForms:
    def test_positive_definiteness_lower_bound(self, rng):
        for _ in range(50):
            m = random_s1_mesh(rng, n_max=64)
            w = rng.standard_normal(m.N)
            lhs = quad_form_b(m, w)
            r_ext = np.append(m.ratios, 0.0)
            bound = sum(stability_bound(r_ext[k], r_ext[k + 1]) * w[k] ** 2
                        / m.steps[k] for k in range(m.N))
            assert lhs >= bound - 1e-10 * max(1.0, abs(bound))

    def test_doc_positive_definite(self, rng):
        for _ in range(50):
            m = random_s1_mesh(rng, n_max=64)
            v = rng.standard_normal(m.N)
            assert quad_form_theta(m, v) > 0.0

    def test_convolution_inequality(self, rng):
        for _ in range(20):
            m = random_s1_mesh(rng, n_max=48)
            doc = doc_kernels(m)
            mr = eigen_bounds(m).quad_const
            w = rng.standard_normal(m.N)
            v = rng.standard_normal(m.N)
            lhs = cross_form_theta(m, w, v, doc)
            qv = 0.5 * quad_form_theta(m, v, doc)
            qw = 0.5 * quad_form_theta(m, w, doc)
            for eps in (0.1, 1.0, 10.0):
                rhs = eps * qv + (mr / eps) * qw
                assert lhs <= rhs + 1e-9 * max(1.0, abs(rhs))
