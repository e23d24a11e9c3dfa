"""Mittag-Leffler function on the negative real axis and the series solution.

E_a(-x) = sum_p (-x)**p / Gamma(a*p + 1) is evaluated by its power series
for x below a switch point and by the algebraic asymptotic expansion

    E_a(-x) ~ sum_{k>=1} (-1)**(k+1) x**(-k) / Gamma(1 - a*k)

above it.  The series terms peak near exp(x**(1/a)), so whenever that
exceeds a few units the sum is carried out in mpmath with enough digits
to absorb the cancellation.  The asymptotic expansion is truncated at its
smallest term, which is roughly exp(-x**(1/a)); the switch point is
placed where that is far below double precision.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln, rgamma

# x**(1/alpha) at the switch point; exp(-27) ~ 2e-12 times a small prefactor
_ASYMPTOTIC_SCALE = 27.0
_TOL = 1e-13


class AccuracyLossError(ArithmeticError):
    pass


def switch_point(alpha):
    """Argument above which the asymptotic branch is used.

    Twice the point where the asymptotic expansion first becomes usable,
    so that a band [X/2, 2X] around it is covered by both branches; for
    small alpha the factor shrinks to keep the power series affordable.
    """
    return _ASYMPTOTIC_SCALE**alpha * min(2.0, 10.0**alpha)


def _check(alpha, x):
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not x >= 0 or math.isinf(x):
        raise ValueError(f"x must be finite and nonnegative, got {x}")


def _series_log_peak(alpha, x):
    """(log of the largest series term, index past which terms are < 1e-25)."""
    if x == 0:
        return 0.0, 1
    lx = math.log(x)
    peak_p = max(1.0, x ** (1.0 / alpha) / alpha)
    p = np.arange(0, int(4 * peak_p) + 64)
    logs = p * lx - gammaln(alpha * p + 1.0)
    top = float(logs.max())
    past = int(np.argmax(logs))
    tail = np.nonzero((logs < -25 * math.log(10)) & (p > past))[0]
    stop = int(tail[0]) if len(tail) else len(p)
    return top, stop


_COEFFS = {}


def _series_coefficients(alpha, dps, count):
    """1/Gamma(alpha*p + 1) for p < count as mpf numbers carrying at least dps digits.

    The table depends only on alpha, so one table serves every x.
    """
    have = _COEFFS.get(alpha)
    if have is not None and have[0] >= dps and len(have[1]) >= count:
        return have[1]
    if have is not None:
        dps = max(dps, have[0])
        count = max(count, len(have[1]))
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        table = [mpmath.rgamma(a * p + 1) for p in range(count)]
    _COEFFS[alpha] = (dps, table)
    return table


def ml_series(alpha, x):
    """Power series for E_alpha(-x), exact up to roundoff in the final sum."""
    _check(alpha, x)
    top, stop = _series_log_peak(alpha, x)
    digits = top / math.log(10)
    if digits < 1.0:
        terms = [(-x) ** p * float(rgamma(alpha * p + 1.0)) for p in range(stop)]
        return math.fsum(terms)
    dps = int(digits) + 30
    coeffs = _series_coefficients(alpha, dps, stop)
    with mpmath.workdps(dps):
        z = -mpmath.mpf(x)
        total = mpmath.mpf(0)
        for c in reversed(coeffs[:stop]):
            total = total * z + c
        return float(total)


def ml_asymptotic(alpha, x):
    """Asymptotic expansion truncated before its smallest term.

    Returns (value, size of the smallest term), the latter being a proxy
    for the truncation error.
    """
    _check(alpha, x)
    if x == 0:
        raise ValueError("asymptotic expansion needs x > 0")
    total = 0.0
    smallest = math.inf
    inv = 1.0 / x
    power = 1.0
    rising = 0
    for k in range(1, 400):
        power *= inv
        term = power * float(rgamma(1.0 - alpha * k))
        # envelope ignores the zeros of 1/Gamma so the stop test is not fooled by them
        envelope = math.exp(-k * math.log(x) + gammaln(alpha * k)) if alpha * k > 0 else abs(term)
        if envelope > smallest:
            rising += 1
            if rising >= 2:
                break
        else:
            rising = 0
            smallest = envelope
        if k % 2:
            total += term
        else:
            total -= term
        if envelope < 1e-18 * max(abs(total), 1e-300):
            break
    return total, smallest


def ml_neg(alpha, x):
    """E_alpha(-x) for 0 < alpha <= 1 and x >= 0, to about 1e-13 absolute."""
    _check(alpha, x)
    return _ml_neg(float(alpha), float(x))


@lru_cache(maxsize=200_000)
def _ml_neg(alpha, x):
    if x == 0.0:
        return 1.0
    if alpha == 1.0:
        return math.exp(-x)
    if x < switch_point(alpha):
        return ml_series(alpha, x)
    value, err = ml_asymptotic(alpha, x)
    if err > _TOL:
        raise AccuracyLossError(f"E_{alpha}(-{x}): asymptotic remainder {err:.1e} above tolerance")
    return value


@dataclass
class SeriesSolution:
    """Separated-variables solution of the benchmark problem on (0, 1).

    u(x, t) = 8 sum_m c_m sin(k_m x) E_alpha(-r_m t**alpha).

    ``variant="eigen"`` uses the Dirichlet eigenpairs of -u'' + u,
    k_m = (2m+1) pi, c_m = k_m**-3, r_m = k_m**2 + 1, which is the
    Fourier expansion of u0 = x(1-x).  ``variant="shifted"`` takes
    k_m = (2m+1) pi - 1 in all three places instead.
    """

    alpha: float
    n_terms: int = 60
    variant: str = "eigen"
    freq: np.ndarray = field(init=False, repr=False)
    coef: np.ndarray = field(init=False, repr=False)
    rate: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.variant not in ("eigen", "shifted"):
            raise ValueError(f"unknown variant {self.variant!r}")
        m = np.arange(self.n_terms)
        if self.variant == "eigen":
            self.freq = (2 * m + 1) * np.pi
            self.rate = self.freq**2 + 1.0
        else:
            self.freq = (2 * m + 1) * np.pi - 1.0
            self.rate = self.freq**2
        self.coef = 8.0 * self.freq**-3.0

    @property
    def lambda_m(self):
        return self.freq

    def amplitudes(self, t):
        """8 c_m E_alpha(-r_m t**alpha) for each mode."""
        if t == 0:
            return self.coef.copy()
        ta = t**self.alpha
        return self.coef * np.array([ml_neg(self.alpha, r * ta) for r in self.rate])

    def modes(self, x):
        """sin(k_m x) as an array of shape (n_terms,) + x.shape."""
        x = np.asarray(x, dtype=float)
        return np.sin(np.multiply.outer(self.freq, x))

    def __call__(self, x, t):
        return np.tensordot(self.amplitudes(t), self.modes(x), axes=1)


def exact_solution(sol, x, t):
    """Partial sum of the series at (x, t); x may be an array."""
    return sol(x, t)
