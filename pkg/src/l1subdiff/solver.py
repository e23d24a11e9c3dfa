"""Time marching for the fully discrete L1 and generalized Crank-Nicolson schemes.

Both schemes solve one tridiagonal system per step,

    (M + c_n G) U^n = M U^{n-1} - G (b_n U^{n-1} + H^n) + F^n,

where H^n is the nonlocal history vector accumulated from all earlier
steps.  G is applied once to the accumulated vector, never per term.
"""

import math
from dataclasses import dataclass

import numpy as np

from .fem1d import ZeroPivotError, l2_project, load_vector, ritz_project, tridiagonal_solve
from .frackernel import WeightTable

SCHEMES = ("l1", "gcn")


class DivergenceError(ArithmeticError):
    pass


@dataclass
class SolutionHistory:
    mesh: object
    coeffs: np.ndarray  # shape (N + 1, d_h); row n holds U_h^n
    scheme: str

    def difference_quotient(self, j):
        return (self.coeffs[j] - self.coeffs[j - 1]) / self.mesh.step(j)


def _history_l1(weights, history, n):
    """sum_{j<n} (w[n,j]-w[n-1,j]) U^{j-1} + (wh[n,j]-wh[n-1,j]) dU^j as one product.

    dU^j = (U^j - U^{j-1}) / tau_j is folded into the coefficients of
    U^{j-1} and U^j, so only one pass over the stored levels is needed.
    """
    if n == 1:
        return None
    w, wh = weights.row(n)
    wp, whp = weights.row(n - 1)
    q = (wh[: n - 1] - whp) / history.mesh.steps[: n - 1]
    coef = np.zeros(n)
    coef[: n - 1] = (w[: n - 1] - wp) - q
    coef[1:] += q
    return coef @ history.coeffs[:n]


def step_l1(sys, weights, history, n, F_n):
    """Advance the L1 scheme to level n given levels 0..n-1 in ``history``."""
    alpha = weights.alpha
    tau_n = history.mesh.step(n)
    c = tau_n / 2 if alpha == 1 else tau_n**alpha / math.gamma(alpha + 2)
    prev = history.coeffs[n - 1]
    acc = alpha * c * prev
    mem = _history_l1(weights, history, n)
    if mem is not None:
        acc = acc + mem
    rhs = sys.mass.matvec(prev) - sys.stiff.matvec(acc) + F_n
    return _solve(sys, c, rhs, n)


def step_gcn(sys, weights, history, n, F_n):
    """Advance the generalized Crank-Nicolson scheme (memory acts on interval means)."""
    w, _ = weights.row(n)
    U = history.coeffs
    prev = U[n - 1]
    c = w[-1] / 2
    acc = c * prev
    if n > 1:
        wp, _ = weights.row(n - 1)
        acc = acc + (w[: n - 1] - wp) @ (0.5 * (U[1:n] + U[: n - 1]))
    rhs = sys.mass.matvec(prev) - sys.stiff.matvec(acc) + F_n
    return _solve(sys, c, rhs, n)


def _solve(sys, c, rhs, n):
    lhs = sys.mass + sys.stiff.scaled(c)
    try:
        out = tridiagonal_solve(lhs, rhs)
    except ZeroPivotError as exc:
        raise ZeroPivotError(f"step {n}: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise DivergenceError(f"non-finite solution at step {n}")
    return out


def initial_coefficients(sys, problem, initial="ritz"):
    """U^0 from ``problem.init``: "ritz" (elliptic projection) or "l2" (mass projection)."""
    if initial == "ritz":
        return ritz_project(sys, problem.init, problem.init_deriv)
    if initial == "l2":
        return l2_project(sys, problem.init)
    raise ValueError(f"initial must be 'ritz' or 'l2', got {initial!r}")


def run(problem, mesh, sys, scheme="l1", initial="ritz"):
    """March n = 1..N and return the full history.

    ``initial`` selects how U^0 is built from ``problem.init`` (see
    ``initial_coefficients``) or gives the coefficient vector directly.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    step = step_l1 if scheme == "l1" else step_gcn
    weights = WeightTable(mesh, problem.alpha)
    coeffs = np.zeros((mesh.N + 1, sys.dim))
    if isinstance(initial, str):
        coeffs[0] = initial_coefficients(sys, problem, initial)
    else:
        coeffs[0] = initial
    history = SolutionHistory(mesh=mesh, coeffs=coeffs, scheme=scheme)
    t = mesh.nodes
    for n in range(1, mesh.N + 1):
        F = load_vector(sys, problem, t[n - 1], t[n])
        coeffs[n] = step(sys, weights, history, n, F)
    return history
