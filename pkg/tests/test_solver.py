import numpy as np
import pytest

from l1subdiff.fem1d import Problem, build_system, constant, load_vector, benchmark_problem, ritz_project, tridiagonal_solve
from l1subdiff.frackernel import WeightTable, weight_oracle
from l1subdiff.mesh import build_graded_mesh
from l1subdiff.solver import DivergenceError, SolutionHistory, run, step_gcn, step_l1


def dense_march(problem, mesh, sys, scheme, U0):
    """Monolithic solve of all N levels at once.

    Each block row is I^alpha-increment form of the scheme written
    straight from its definition: M (U^n - U^{n-1}) + G [Q_n - Q_{n-1}] = F^n,
    with Q_n the fractional integral of the piecewise linear (L1) or
    piecewise constant mean (GCN) interpolant at t_n.  Weights come from
    adaptive quadrature, not the closed forms.
    """
    N, d = mesh.N, sys.dim
    Mm, G = sys.mass.dense(), sys.stiff.dense()
    alpha = problem.alpha
    W = np.zeros((N + 1, N + 1))
    WH = np.zeros((N + 1, N + 1))
    for n in range(1, N + 1):
        for j in range(1, n + 1):
            W[n, j], WH[n, j] = weight_oracle(mesh, alpha, n, j)
    tau = np.r_[np.nan, mesh.steps]

    # Q_n = sum_j coef[n, k] U^k  over levels k = 0..N
    Q = np.zeros((N + 1, N + 1))
    for n in range(1, N + 1):
        for j in range(1, n + 1):
            if scheme == "l1":
                Q[n, j - 1] += W[n, j] - WH[n, j] / tau[j]
                Q[n, j] += WH[n, j] / tau[j]
            else:
                Q[n, j - 1] += W[n, j] / 2
                Q[n, j] += W[n, j] / 2
    A = np.zeros((N * d, N * d))
    b = np.zeros(N * d)
    for n in range(1, N + 1):
        rows = slice((n - 1) * d, n * d)
        b[rows] = load_vector(sys, problem, mesh.nodes[n - 1], mesh.nodes[n])
        level = {n: Mm.copy(), n - 1: -Mm.copy()}
        for k in range(N + 1):
            c = Q[n, k] - Q[n - 1, k]
            if c:
                level[k] = level.get(k, 0) + c * G
        for k, blk in level.items():
            if k == 0:
                b[rows] -= blk @ U0
            else:
                A[rows, (k - 1) * d : k * d] += blk
    return np.vstack([U0, np.linalg.solve(A, b).reshape(N, d)])


def crank_nicolson(problem, mesh, sys, U0):
    out = [U0]
    for n in range(1, mesh.N + 1):
        tau = mesh.step(n)
        lhs = sys.mass + sys.stiff.scaled(tau / 2)
        rhs = sys.mass.matvec(out[-1]) - sys.stiff.matvec(out[-1]) * tau / 2
        rhs = rhs + load_vector(sys, problem, mesh.nodes[n - 1], mesh.nodes[n])
        out.append(tridiagonal_solve(lhs, rhs))
    return np.array(out)


def source_problem(alpha):
    return Problem(
        alpha=alpha,
        kappa=lambda x: 1 + x,
        react=constant(0.5),
        init=lambda x: np.sin(np.pi * x),
        init_deriv=lambda x: np.pi * np.cos(np.pi * x),
        source=lambda x, t: (1 + t) * x * (1 - x),
    )


class TestDenseOracle:
    @pytest.mark.parametrize("scheme", ["l1", "gcn"])
    @pytest.mark.parametrize("alpha,gamma,N,M", [(0.5, 1.0, 2, 3), (0.3, 2.0, 4, 4), (0.75, 3.0, 3, 2), (0.9, 1.5, 4, 3)])
    def test_matches_monolithic_solve(self, scheme, alpha, gamma, N, M):
        prob = source_problem(alpha)
        mesh = build_graded_mesh(1.0, N, gamma)
        sys = build_system(0, 1, M, prob)
        hist = run(prob, mesh, sys, scheme=scheme)
        ref = dense_march(prob, mesh, sys, scheme, hist.coeffs[0])
        np.testing.assert_allclose(hist.coeffs, ref, rtol=0, atol=1e-11)

    def test_uniform_two_steps_hat(self):
        prob = Problem(alpha=0.5, kappa=constant(1), react=constant(0), init=lambda x: x)
        mesh = build_graded_mesh(1.0, 2, 1.0)
        sys = build_system(0, 1, 3, prob)
        U0 = np.array([1.0, 0.0])
        hist = run(prob, mesh, sys, initial=U0)
        ref = dense_march(prob, mesh, sys, "l1", U0)
        np.testing.assert_allclose(hist.coeffs, ref, atol=1e-12)


class TestCrankNicolsonLimit:
    @pytest.mark.parametrize("gamma", [1.0, 2.0, 3.7])
    @pytest.mark.parametrize("scheme", ["l1", "gcn"])
    def test_alpha_one(self, gamma, scheme):
        prob = source_problem(1.0)
        mesh = build_graded_mesh(1.0, 25, gamma)
        sys = build_system(0, 1, 30, prob)
        hist = run(prob, mesh, sys, scheme=scheme)
        ref = crank_nicolson(prob, mesh, sys, hist.coeffs[0])
        scale = np.max(np.abs(ref))
        assert np.max(np.abs(hist.coeffs - ref)) <= 1e-12 * scale

    def test_schemes_coincide_at_alpha_one(self):
        prob = benchmark_problem(1.0)
        mesh = build_graded_mesh(1.0, 20, 2.0)
        sys = build_system(0, 1, 40, prob)
        a = run(prob, mesh, sys, "l1").coeffs
        b = run(prob, mesh, sys, "gcn").coeffs
        assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))


class TestSteps:
    def setup_method(self):
        self.prob = benchmark_problem(0.5)
        self.mesh = build_graded_mesh(1.0, 5, 2.0)
        self.sys = build_system(0, 1, 6, self.prob)
        self.weights = WeightTable(self.mesh, 0.5)

    def history(self):
        return SolutionHistory(self.mesh, np.zeros((6, 5)), "l1")

    def test_zero_data_first_step(self):
        hist = self.history()
        zero = np.zeros(5)
        np.testing.assert_array_equal(step_l1(self.sys, self.weights, hist, 1, zero), zero)
        np.testing.assert_array_equal(step_gcn(self.sys, self.weights, hist, 1, zero), zero)

    def test_trivial_solution_stays_zero(self):
        prob = Problem(alpha=0.4, kappa=constant(1), react=constant(1), init=lambda x: 0 * x, init_deriv=lambda x: 0 * x)
        sys = build_system(0, 1, 10, prob)
        for scheme in ("l1", "gcn"):
            hist = run(prob, build_graded_mesh(1.0, 12, 3.0), sys, scheme)
            assert np.all(hist.coeffs == 0)

    def test_initial_level_is_ritz_projection(self):
        hist = run(self.prob, self.mesh, self.sys)
        np.testing.assert_array_equal(hist.coeffs[0], ritz_project(self.sys, self.prob.init, self.prob.init_deriv))

    def test_divergence_is_an_error(self):
        hist = self.history()
        bad = np.full(5, np.nan)
        with pytest.raises(DivergenceError, match="step 1"):
            step_l1(self.sys, self.weights, hist, 1, bad)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            run(self.prob, self.mesh, self.sys, scheme="bdf2")

    def test_deterministic(self):
        a = run(self.prob, build_graded_mesh(1.0, 30, 2.5), build_system(0, 1, 25, self.prob)).coeffs
        b = run(self.prob, build_graded_mesh(1.0, 30, 2.5), build_system(0, 1, 25, self.prob)).coeffs
        assert np.array_equal(a, b)

    def test_difference_quotient(self):
        hist = run(self.prob, self.mesh, self.sys)
        np.testing.assert_allclose(
            hist.difference_quotient(3), (hist.coeffs[3] - hist.coeffs[2]) / (self.mesh.nodes[3] - self.mesh.nodes[2])
        )
