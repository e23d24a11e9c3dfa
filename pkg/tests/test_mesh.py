import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from l1subdiff.mesh import InvalidParameterError, build_graded_mesh, check_mesh_properties


class TestBuild:
    def test_quadratic_grading(self):
        mesh = build_graded_mesh(1.0, 4, 2.0)
        np.testing.assert_array_equal(mesh.nodes, [0, 1 / 16, 1 / 4, 9 / 16, 1])

    def test_uniform(self):
        mesh = build_graded_mesh(1.0, 4, 1.0)
        np.testing.assert_array_equal(mesh.nodes, [0, 0.25, 0.5, 0.75, 1])
        np.testing.assert_array_equal(mesh.steps, [0.25] * 4)

    def test_first_node(self):
        mesh = build_graded_mesh(1.0, 160, 2.0)
        assert mesh.nodes[1] == pytest.approx(3.90625e-5, rel=1e-15)

    def test_closed_formula_without_accumulation(self):
        mesh = build_graded_mesh(2.5, 37, 3.3)
        tau = 2.5 ** (1 / 3.3) / 37
        i = np.arange(1, 37)
        np.testing.assert_array_equal(mesh.nodes[1:-1], (i * tau) ** 3.3)
        assert mesh.nodes[-1] == 2.5
        assert mesh.tau == tau

    def test_immutable(self):
        mesh = build_graded_mesh(1.0, 4, 2.0)
        with pytest.raises(ValueError):
            mesh.nodes[1] = 0.5

    @pytest.mark.parametrize("T,N,gamma", [(0, 4, 1), (-1, 4, 1), (1, 0, 1), (1, 2.5, 1), (1, 4, 0.5)])
    def test_rejects_bad_parameters(self, T, N, gamma):
        with pytest.raises(InvalidParameterError):
            build_graded_mesh(T, N, gamma)


class TestProperties:
    def test_uniform_holds(self):
        assert check_mesh_properties(build_graded_mesh(1.0, 4, 1.0)).ok

    def test_quadratic_holds(self):
        mesh = build_graded_mesh(1.0, 4, 2.0)
        assert check_mesh_properties(mesh).ok
        # n = 2: tau_2 = 3/16 sits below 2 tau t_2^(1/2) = 1/4
        assert mesh.step(2) == 3 / 16
        assert 2 * mesh.tau * mesh.nodes[2] ** 0.5 == 0.25

    def test_cubic_fine_mesh(self):
        assert check_mesh_properties(build_graded_mesh(1.0, 640, 3.0)).violations == []

    def test_detects_violation(self):
        mesh = build_graded_mesh(1.0, 8, 2.0)
        bad = mesh.nodes.copy()
        bad[4] = bad[3] * 1e-3 + bad[5] * (1 - 1e-3)  # a step far above the upper bound
        object.__setattr__(mesh, "nodes", bad)
        report = check_mesh_properties(mesh)
        assert not report.ok
        assert 4 in report.violations

    @settings(max_examples=60, deadline=None)
    @given(st.floats(1.0, 5.0), st.integers(2, 2000))
    def test_random_meshes(self, gamma, N):
        mesh = build_graded_mesh(1.0, N, gamma)
        assert check_mesh_properties(mesh).ok
        assert mesh.nodes[0] == 0 and mesh.nodes[-1] == 1.0
        assert np.all(np.diff(mesh.nodes) > 0)
        assert np.all(np.diff(mesh.steps) >= -4e-16)
