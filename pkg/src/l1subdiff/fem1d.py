"""P1 Galerkin finite elements on an interval with Dirichlet ends.

Only interior nodes carry unknowns, so every operator here is a
symmetric tridiagonal matrix of size M_elems - 1.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

# Gauss-Legendre rules on [-1, 1]
_G2 = np.polynomial.legendre.leggauss(2)
_G3 = np.polynomial.legendre.leggauss(3)
_G4 = np.polynomial.legendre.leggauss(4)


class NonPositiveDiffusivityError(ValueError):
    pass


class ZeroPivotError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SymTridiag:
    """Symmetric tridiagonal matrix stored as its diagonal and off-diagonal."""

    diag: np.ndarray
    off: np.ndarray

    @property
    def size(self):
        return len(self.diag)

    def matvec(self, v):
        out = self.diag * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out

    def __add__(self, other):
        return SymTridiag(self.diag + other.diag, self.off + other.off)

    def scaled(self, c):
        return SymTridiag(c * self.diag, c * self.off)

    def dense(self):
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)


@dataclass
class Problem:
    """Data of  u_t + D^{1-alpha}(-(kappa u')' + react*u) = source,  u(., 0) = init.

    Callables take numpy arrays. ``source`` is f(x, t) and may be None for
    f = 0; ``init_deriv`` is the exact derivative of ``init`` if known.
    """

    alpha: float
    kappa: Callable
    react: Callable
    init: Callable
    source: Optional[Callable] = None
    init_deriv: Optional[Callable] = None
    exact: Optional[Callable] = None


def constant(c):
    return lambda x: np.full(np.shape(x), float(c))


def benchmark_problem(alpha):
    """kappa = d = 1, f = 0, u0 = x(1-x) on (0, 1)."""
    return Problem(
        alpha=alpha,
        kappa=constant(1.0),
        react=constant(1.0),
        init=lambda x: x * (1.0 - x),
        init_deriv=lambda x: 1.0 - 2.0 * x,
    )


@dataclass(frozen=True)
class SpatialSystem:
    a: float
    b: float
    M_elems: int
    nodes: np.ndarray
    mass: SymTridiag
    stiff: SymTridiag
    kappa: Callable
    react: Callable

    @property
    def h(self):
        return (self.b - self.a) / self.M_elems

    @property
    def dim(self):
        return self.M_elems - 1

    def full_values(self, coeffs):
        """Nodal values including the two zero boundary values."""
        out = np.zeros(self.M_elems + 1)
        out[1:-1] = coeffs
        return out


def _element_points(nodes, rule):
    """Quadrature points (n_elem, q) and weights (n_elem, q) on each element."""
    xi, wq = rule
    left = nodes[:-1, None]
    h = (nodes[1:] - nodes[:-1])[:, None]
    x = left + 0.5 * h * (xi[None, :] + 1.0)
    w = 0.5 * h * wq[None, :]
    return x, w, (xi + 1.0) / 2.0


def _assemble(elem):
    """Interior-node tridiagonal from per-element 2x2 matrices (n_elem, 2, 2)."""
    full_diag = np.zeros(len(elem) + 1)
    full_diag[:-1] += elem[:, 0, 0]
    full_diag[1:] += elem[:, 1, 1]
    off = elem[:, 0, 1]
    return SymTridiag(full_diag[1:-1].copy(), off[1:-1].copy())


def build_system(a, b, M_elems, problem):
    """Assemble mass and stiffness matrices on a uniform partition of (a, b).

    Coefficient integrals use 2-point Gauss on each element.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if int(M_elems) != M_elems or M_elems < 2:
        raise ValueError(f"M_elems must be an integer >= 2, got {M_elems}")
    M_elems = int(M_elems)
    nodes = np.linspace(a, b, M_elems + 1)
    h = (b - a) / M_elems
    x, w, s = _element_points(nodes, _G2)
    kap = problem.kappa(x)
    if np.any(kap <= 0):
        raise NonPositiveDiffusivityError("diffusivity must be positive at every quadrature point")
    react = problem.react(x)
    phi = np.stack([1.0 - s, s])  # shape (2, q): local basis at reference points
    k_e = (w * kap).sum(axis=1) / h**2
    grad = np.array([[1.0, -1.0], [-1.0, 1.0]])
    stiff_e = k_e[:, None, None] * grad[None]
    stiff_e = stiff_e + np.einsum("eq,iq,jq->eij", w * react, phi, phi)
    mass_e = np.einsum("eq,iq,jq->eij", w, phi, phi)
    return SpatialSystem(
        a=float(a),
        b=float(b),
        M_elems=M_elems,
        nodes=nodes,
        mass=_assemble(mass_e),
        stiff=_assemble(stiff_e),
        kappa=problem.kappa,
        react=problem.react,
    )


def _derivative(w, x, step):
    # fourth-order central difference
    return (-w(x + 2 * step) + 8 * w(x + step) - 8 * w(x - step) + w(x - 2 * step)) / (12 * step)


def ritz_project(sys, w, dw=None):
    """Coefficients c with A(R_h w, phi_p) = A(w, phi_p) for every interior hat.

    The right-hand side uses 4-point Gauss per element. Without ``dw`` the
    derivative of w is taken by a fourth-order central difference.
    """
    x, wq, s = _element_points(sys.nodes, _G4)
    h = sys.h
    wx = w(x)
    dwx = dw(x) if dw is not None else _derivative(w, x, 1e-3 * h)
    kap = sys.kappa(x)
    react = sys.react(x)
    phi = np.stack([1.0 - s, s])
    dphi = np.array([-1.0, 1.0]) / h
    # local contributions to the left and right node of each element
    loc = np.einsum("eq,iq->ei", wq * react * wx, phi) + (wq * kap * dwx).sum(axis=1)[:, None] * dphi[None, :]
    r = np.zeros(sys.M_elems + 1)
    r[:-1] += loc[:, 0]
    r[1:] += loc[:, 1]
    return tridiagonal_solve(sys.stiff, r[1:-1])


def l2_project(sys, w):
    """Coefficients of the L2-orthogonal projection of w onto V_h (4-point Gauss)."""
    x, wq, s = _element_points(sys.nodes, _G4)
    phi = np.stack([1.0 - s, s])
    loc = np.einsum("eq,iq->ei", wq * w(x), phi)
    r = np.zeros(sys.M_elems + 1)
    r[:-1] += loc[:, 0]
    r[1:] += loc[:, 1]
    return tridiagonal_solve(sys.mass, r[1:-1])


def load_vector(sys, problem, t_start, t_end):
    """F_p = int_{t_start}^{t_end} <f(t), phi_p> dt, 3-point Gauss in time by 2-point in space."""
    if not t_start < t_end:
        raise ValueError(f"need t_start < t_end, got {t_start}, {t_end}")
    if problem.source is None:
        return np.zeros(sys.dim)
    x, wq, s = _element_points(sys.nodes, _G2)
    phi = np.stack([1.0 - s, s])
    ti, tw = _G3
    half = 0.5 * (t_end - t_start)
    acc = np.zeros_like(x)
    for xi, wi in zip(ti, tw):
        acc += wi * half * problem.source(x, t_start + half * (xi + 1.0))
    loc = np.einsum("eq,iq->ei", wq * acc, phi)
    r = np.zeros(sys.M_elems + 1)
    r[:-1] += loc[:, 0]
    r[1:] += loc[:, 1]
    return r[1:-1]


def quadrature_points(sys, finest=None):
    """2-point Gauss points and weights on the (optionally refined) partition."""
    m = sys.M_elems if finest is None else int(finest)
    if m % sys.M_elems:
        raise ValueError(f"finest mesh ({m}) must refine the system mesh ({sys.M_elems})")
    nodes = np.linspace(sys.a, sys.b, m + 1)
    x, w, _ = _element_points(nodes, _G2)
    return x.ravel(), w.ravel()


def l2_norm_at(sys, coeffs, values, x, w):
    """L2 norm of U_h - g given g already sampled at the quadrature points x."""
    uh = np.interp(x, sys.nodes, sys.full_values(coeffs))
    return float(np.sqrt(np.sum(w * (uh - values) ** 2)))


def l2_error(sys, coeffs, g, finest=None):
    """||U_h - g|| by 2-point Gauss on the system mesh, or on a refinement of it."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (sys.dim,):
        raise ValueError(f"expected {sys.dim} coefficients, got shape {coeffs.shape}")
    x, w = quadrature_points(sys, finest)
    return l2_norm_at(sys, coeffs, g(x), x, w)


def tridiagonal_solve(matrix, rhs):
    """Thomas elimination for a SymTridiag system."""
    d = matrix.diag.tolist()
    e = matrix.off.tolist()
    r = np.asarray(rhs, dtype=float).tolist()
    n = len(d)
    if len(r) != n:
        raise ValueError(f"rhs has length {len(r)}, matrix has size {n}")
    cp = [0.0] * n
    piv = d[0]
    if piv == 0.0:
        raise ZeroPivotError("zero pivot in row 0")
    for i in range(n - 1):
        cp[i] = e[i] / piv
        r[i] /= piv
        piv = d[i + 1] - e[i] * cp[i]
        if piv == 0.0:
            raise ZeroPivotError(f"zero pivot in row {i + 1}")
        r[i + 1] -= e[i] * r[i]
    r[n - 1] /= piv
    for i in range(n - 2, -1, -1):
        r[i] -= cp[i] * r[i + 1]
    return np.array(r)
