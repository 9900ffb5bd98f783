import numpy as np
import pytest

from pfc.mesh import (R_SUP, TimeMesh, analyze, check_restriction,
                      mesh_from_ratios, parse_mesh_spec, random_mesh,
                      stability_bound, uniform_mesh)


class TestTimeMesh:
    def test_levels_and_ratios(self):
        m = TimeMesh(np.array([0.5, 1.0, 0.25]))
        assert np.allclose(m.times, [0.5, 1.5, 1.75])
        assert m.ratios[0] == 0.0
        assert np.allclose(m.ratios[1:], [2.0, 0.25])

    def test_ratios_match_steps(self, rng):
        m = TimeMesh(rng.uniform(0.1, 2.0, size=20))
        recomputed = m.steps[1:] / m.steps[:-1]
        assert np.array_equal(m.ratios[1:], recomputed)

    def test_positive_steps_required(self):
        with pytest.raises(ValueError):
            TimeMesh(np.array([0.5, -0.1]))

    def test_cumsum_exact(self, rng):
        m = TimeMesh(rng.uniform(0.1, 2.0, size=50))
        assert m.times[-1] == np.cumsum(m.steps)[-1]


class TestRandomMesh:
    def test_single_step(self):
        for seed in (0, 1, 99):
            m = random_mesh(1, 2.5, seed)
            assert m.steps[0] == pytest.approx(2.5, rel=1e-15)

    def test_deterministic(self):
        a = random_mesh(20, 1.0, 1)
        b = random_mesh(20, 1.0, 1)
        assert np.array_equal(a.steps, b.steps)

    def test_sum_and_positivity(self):
        m = random_mesh(320, 1.0, 7)
        assert np.all(m.steps > 0)
        assert m.T == pytest.approx(1.0, rel=1e-12)

    def test_bad_args(self):
        with pytest.raises(ValueError):
            random_mesh(0, 1.0, 1)
        with pytest.raises(ValueError):
            random_mesh(10, -1.0, 1)


class TestStabilityBound:
    def test_root_at_sup(self):
        r = R_SUP
        assert stability_bound(r - 1e-12, r - 1e-12) == pytest.approx(0.0, abs=1e-10)

    def test_hand_values(self):
        assert stability_bound(0.0, 0.0) == pytest.approx(2.0)
        assert stability_bound(1.0, 1.0) == pytest.approx(2.0)

    def test_domain_checked(self):
        with pytest.raises(ValueError):
            stability_bound(4.0, 0.0)
        with pytest.raises(ValueError):
            stability_bound(0.0, -0.1)

    def test_monotonicity(self):
        crit = np.sqrt(3.0) - 1.0
        s = 0.7
        zs = np.linspace(1e-6, crit - 1e-6, 500)
        vals = [stability_bound(z, s) for z in zs]
        assert np.all(np.diff(vals) > 0)
        zs = np.linspace(crit + 1e-6, R_SUP - 1e-6, 500)
        vals = [stability_bound(z, s) for z in zs]
        assert np.all(np.diff(vals) < 0)
        ss = np.linspace(0, R_SUP - 1e-6, 1000)
        vals = [stability_bound(1.3, s) for s in ss]
        assert np.all(np.diff(vals) < 0)


class TestRestriction:
    def test_uniform_no_violation(self):
        m = uniform_mesh(20, 1.0)  # tau = 0.05
        assert check_restriction(m, 0.02) == []

    def test_first_step_rule(self):
        # single-step mesh: flag iff eps * tau1 > 2/3
        eps = 0.5
        ok = TimeMesh(np.array([2.0 / (3 * eps) - 1e-9]))
        bad = TimeMesh(np.array([2.0 / (3 * eps) + 1e-3]))
        assert check_restriction(ok, eps) == []
        assert check_restriction(bad, eps) == [1]

    def test_small_ratio_threshold(self):
        # ratios below sqrt(3)-1: threshold is 2/(3 eps)
        eps = 0.1
        thr = 2.0 / (3.0 * eps)
        m = mesh_from_ratios(thr * 0.99, [0.7, 0.7])
        assert check_restriction(m, eps) == []

    def test_eps_domain(self):
        m = uniform_mesh(5, 1.0)
        with pytest.raises(ValueError):
            check_restriction(m, 0.0)
        with pytest.raises(ValueError):
            check_restriction(m, 1.5)

    def test_scaling_homogeneity(self, rng):
        m = TimeMesh(rng.uniform(0.5, 10.0, size=30))
        eps = 0.3
        base = check_restriction(m, eps)
        for alpha in (0.5, 2.0, 13.0):
            scaled = TimeMesh(alpha * m.steps)
            assert check_restriction(scaled, eps / alpha) == base


class TestAnalyze:
    def test_uniform(self):
        rep = analyze(uniform_mesh(10, 1.0))
        assert rep.max_ratio == 1.0
        assert rep.s1_violations == []
        assert rep.n0 == 0

    def test_s1_violation_index(self):
        m = mesh_from_ratios(0.1, [2.0, 3.8])
        rep = analyze(m)
        assert rep.s1_violations == [3]

    def test_n0_count(self):
        m = mesh_from_ratios(0.1, [2.5, 1.0])
        rep = analyze(m)
        assert rep.n0 == 1


class TestMeshSpec:
    def test_uniform_spec(self):
        m = parse_mesh_spec("uniform:4,2.0")
        assert np.allclose(m.steps, 0.5)

    def test_random_spec(self):
        m = parse_mesh_spec("random:10,1.0,5")
        assert np.array_equal(m.steps, random_mesh(10, 1.0, 5).steps)

    def test_file_spec(self, tmp_path):
        p = tmp_path / "mesh.txt"
        p.write_text("0.5\n0.25\n")
        m = parse_mesh_spec(str(p))
        assert np.allclose(m.steps, [0.5, 0.25])
