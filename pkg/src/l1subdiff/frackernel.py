"""Riemann-Liouville kernel and the exact L1 integration weights.

For a mesh 0 = t_0 < ... < t_N the scheme needs, for 1 <= j <= n,

    w[n, j]  = int_{t_{j-1}}^{t_j} k(t_n - s) ds
    wh[n, j] = int_{t_{j-1}}^{t_j} (q - t_{j-1}) k(t_n - q) dq

with k(t) = t**(alpha-1) / Gamma(alpha).  Both have closed forms; the
functions below evaluate them in a cancellation-free way, and
``weight_oracle`` recomputes them by adaptive quadrature for testing.
"""

import math
import warnings

import numpy as np
from scipy import integrate

_SERIES_CUTOFF = 0.5
_SERIES_TERMS = 64


class QuadratureError(RuntimeError):
    """Adaptive quadrature could not reach the requested accuracy."""


def kernel(alpha, t):
    """t**(alpha-1) / Gamma(alpha) for t > 0."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not t > 0:
        raise ValueError(f"kernel is only defined for t > 0, got {t}")
    if alpha == 1:
        return 1.0
    return t ** (alpha - 1) / math.gamma(alpha)


def _check_indices(mesh, n, j):
    if not (1 <= j <= n <= mesh.N):
        raise IndexError(f"need 1 <= j <= n <= N={mesh.N}, got n={n}, j={j}")


def _excess(u, p):
    """(1 + u)**p - 1 - p*u, accurate for small u."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = u <= _SERIES_CUTOFF
    big = ~small
    if np.any(big):
        ub = u[big]
        out[big] = np.expm1(p * np.log1p(ub)) - p * ub
    if np.any(small):
        us = u[small]
        coef = p * (p - 1) / 2
        power = us * us
        acc = coef * power
        for k in range(3, _SERIES_TERMS):
            coef *= (p - k + 1) / k
            power = power * us
            acc = acc + coef * power
        out[small] = acc
    return out


def weight_rows(mesh, alpha, n):
    """Return (w[n, 1..n], wh[n, 1..n]) as two length-n arrays."""
    if not 1 <= n <= mesh.N:
        raise IndexError(f"row {n} outside 1..{mesh.N}")
    t = mesh.nodes
    tau = np.diff(t[: n + 1])
    if alpha == 1:
        return tau.copy(), 0.5 * tau * tau
    a = t[n] - t[:n]
    b = t[n] - t[1 : n + 1]
    b[-1] = 0.0
    w = np.empty(n)
    wh = np.empty(n)
    inner = b > 0
    # a**alpha - b**alpha written as a product so late-history terms keep their digits
    w[inner] = -a[inner] ** alpha * np.expm1(alpha * np.log(b[inner] / a[inner]))
    w[-1] = tau[-1] ** alpha
    w /= math.gamma(alpha + 1)
    bi = b[inner]
    wh[inner] = bi ** (alpha + 1) * _excess(tau[inner] / bi, alpha + 1)
    wh[-1] = tau[-1] ** (alpha + 1)
    wh /= math.gamma(alpha + 2)
    return w, wh


def primary_weight(mesh, alpha, n, j):
    """w[n, j] = ((t_n - t_{j-1})**alpha - (t_n - t_j)**alpha) / Gamma(alpha+1)."""
    _check_indices(mesh, n, j)
    t = mesh.nodes
    tau_j = t[j] - t[j - 1]
    if alpha == 1:
        return float(tau_j)
    a = t[n] - t[j - 1]
    if j == n:
        return float(a**alpha / math.gamma(alpha + 1))
    b = t[n] - t[j]
    return float(-(a**alpha) * math.expm1(alpha * math.log(b / a)) / math.gamma(alpha + 1))


def secondary_weight(mesh, alpha, n, j):
    """wh[n, j] = int_{t_{j-1}}^{t_j} (q - t_{j-1}) k(t_n - q) dq."""
    _check_indices(mesh, n, j)
    t = mesh.nodes
    tau_j = t[j] - t[j - 1]
    if alpha == 1:
        return float(0.5 * tau_j * tau_j)
    if j == n:
        return float(tau_j ** (alpha + 1) / math.gamma(alpha + 2))
    b = t[n] - t[j]
    return float(b ** (alpha + 1) * _excess(np.array([tau_j / b]), alpha + 1)[0] / math.gamma(alpha + 2))


def _quad(f, lo, hi, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200, **kw)
    return val, err


def weight_oracle(mesh, alpha, n, j, tol=1e-14):
    """(w[n, j], wh[n, j]) by adaptive Gauss-Kronrod quadrature.

    For j == n the kernel singularity sits on the right endpoint and is
    handled by QUADPACK's algebraic-weight rule; the secondary weight is
    integrated as the literal double integral.  Raises QuadratureError
    if the estimated error exceeds ``tol`` by more than a factor 100.
    """
    _check_indices(mesh, n, j)
    t = mesh.nodes
    lo, hi, tn = float(t[j - 1]), float(t[j]), float(t[n])
    g = math.gamma(alpha)
    errs = []

    if j == n:
        def inner(s):
            if s >= hi:
                return 0.0
            v, e = _quad(lambda q: 1.0, s, hi, weight="alg", wvar=(0.0, alpha - 1.0))
            errs.append(e)
            return v

        w, e1 = _quad(lambda s: 1.0, lo, hi, weight="alg", wvar=(0.0, alpha - 1.0))
    else:
        def k(q):
            return (tn - q) ** (alpha - 1.0)

        def inner(s):
            v, e = _quad(k, s, hi)
            errs.append(e)
            return v

        w, e1 = _quad(k, lo, hi)
    wh, e2 = _quad(inner, lo, hi)
    err = (max(e1, e2) + (max(errs) * (hi - lo) if errs else 0.0)) / g
    if not err <= 100 * tol:
        raise QuadratureError(f"weight quadrature for (n={n}, j={j}) stalled at error {err:.2e}")
    return w / g, wh / g


class WeightTable:
    """Row-wise cache of (w, wh) for one mesh and exponent.

    The time march only ever touches rows n and n-1, so by default older
    rows are discarded; ``retain=True`` keeps every row for inspection.
    """

    def __init__(self, mesh, alpha, retain=False):
        if not 0 < alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        self.mesh = mesh
        self.alpha = alpha
        self.retain = retain
        self._rows = {}

    def row(self, n):
        if n not in self._rows:
            self._rows[n] = weight_rows(self.mesh, self.alpha, n)
            if not self.retain:
                for key in [k for k in self._rows if k < n - 1]:
                    del self._rows[key]
        return self._rows[n]

    def primary(self, n, j):
        return self.row(n)[0][j - 1]

    def secondary(self, n, j):
        return self.row(n)[1][j - 1]

    def full(self):
        """Dense (N, N) lower-triangular arrays indexed [n-1, j-1]."""
        N = self.mesh.N
        W = np.zeros((N, N))
        WH = np.zeros((N, N))
        for n in range(1, N + 1):
            w, wh = weight_rows(self.mesh, self.alpha, n)
            W[n - 1, :n] = w
            WH[n - 1, :n] = wh
        return W, WH
