"""Convergence studies against the series solution of the benchmark problem.

The benchmark is u_t + D^{1-alpha}(-u'' + u) = 0 on (0, 1) x (0, T] with
u0 = x(1 - x).  Errors are E = max_n ||U_h^n - u(t_n)|| in L2, with the
norm taken by 2-point Gauss on the run's own mesh or on a common refined
mesh.  Rates are log2 of consecutive error ratios under doubling.
"""

import csv
import io
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fem1d import build_system, l2_norm_at, benchmark_problem, quadrature_points
from .mesh import build_graded_mesh
from .mittag_leffler import SeriesSolution
from .solver import run

log = logging.getLogger(__name__)

DOMINANCE_THRESHOLD = 0.05
CSV_FIELDS = ["study", "alpha", "gamma", "scheme", "N", "M", "error", "rate"]


class DominanceWarning(UserWarning):
    """The supposedly negligible discretisation error is not negligible."""


@dataclass
class StudyConfig:
    alpha: float
    gammas: list
    Ns: list
    Ms: list
    T: float = 1.0
    scheme: str = "l1"
    sigma: Optional[float] = None
    out: Optional[str] = None
    n_terms: int = 60
    initial: str = "ritz"
    include_initial: bool = False
    finest: Optional[int] = None
    check_dominance: bool = True
    workers: int = 1

    def __post_init__(self):
        for name in ("gammas", "Ns", "Ms"):
            vals = list(getattr(self, name))
            if not vals or any(v <= 0 for v in vals):
                raise ValueError(f"{name} must be a non-empty list of positive values")
            setattr(self, name, vals)
        if self.sigma is None:
            self.sigma = self.alpha / 4

    def predicted_rate(self, gamma):
        return predicted_rate(self.alpha, gamma, self.sigma)


@dataclass
class RateRow:
    study: str
    alpha: float
    gamma: float
    scheme: str
    N: int
    M: int
    error: float
    rate: Optional[float] = None

    def as_csv(self):
        return {
            "study": self.study,
            "alpha": f"{self.alpha:g}",
            "gamma": f"{self.gamma:g}",
            "scheme": self.scheme,
            "N": self.N,
            "M": self.M,
            "error": f"{self.error:.6e}",
            "rate": "" if self.rate is None else f"{self.rate:.4f}",
        }


@dataclass
class StudyResult:
    rows: list
    warnings: list = field(default_factory=list)

    def by_gamma(self, gamma):
        return [r for r in self.rows if r.gamma == gamma]

    def errors(self, gamma=None):
        return [r.error for r in self.rows if gamma is None or r.gamma == gamma]

    def rates(self, gamma=None):
        return [r.rate for r in self.rows if r.rate is not None and (gamma is None or r.gamma == gamma)]


def predicted_rate(alpha, gamma, sigma=None):
    """min(gamma * (sigma + alpha), 2), the observed temporal order."""
    if sigma is None:
        sigma = alpha / 4
    return min(gamma * (sigma + alpha), 2.0)


def convergence_rates(errors):
    """log2(E_k / E_{k+1}) for a doubling sequence; one fewer entry than errors."""
    e = np.asarray(errors, dtype=float)
    return list(np.log2(e[:-1] / e[1:]))


def error_series(history, sys, sol, finest=None, include_initial=False):
    """(t_n, ||U_h^n - u(t_n)||) for n = 1..N, or 0..N with ``include_initial``."""
    x, w = quadrature_points(sys, finest)
    modes = sol.modes(x)
    t = history.mesh.nodes
    start = 0 if include_initial else 1
    times = t[start:]
    errs = np.array(
        [l2_norm_at(sys, history.coeffs[n], sol.amplitudes(t[n]) @ modes, x, w) for n in range(start, len(t))]
    )
    return times, errs


def max_error(history, sys, sol, finest=None, include_initial=False):
    """E_{N,M} = max over time levels of the L2 error."""
    return float(error_series(history, sys, sol, finest, include_initial)[1].max())


def _cell(alpha, gamma, N, M, T, scheme, n_terms, initial, include_initial, finest):
    problem = benchmark_problem(alpha)
    mesh = build_graded_mesh(T, N, gamma)
    sys = build_system(0.0, 1.0, M, problem)
    hist = run(problem, mesh, sys, scheme=scheme, initial=initial)
    sol = SeriesSolution(alpha, n_terms=n_terms)
    return max_error(hist, sys, sol, finest, include_initial)


def _run_cells(config, cells):
    args = [
        (config.alpha, g, N, M, config.T, config.scheme, config.n_terms, config.initial, config.include_initial, fin)
        for g, N, M, fin in cells
    ]
    if config.workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_cell, *zip(*args)))
    return [_cell(*a) for a in args]


def _rows(study, config, gamma, pairs, errors):
    rows = []
    rates = [None] + convergence_rates(errors)
    for (N, M), err, rate in zip(pairs, errors, rates):
        rows.append(RateRow(study, config.alpha, gamma, config.scheme, N, M, err, rate))
    return rows


def _dominance(kind, reference, perturbed, gamma, result):
    change = abs(perturbed - reference) / reference
    if change > DOMINANCE_THRESHOLD:
        msg = f"{kind} error not dominant for gamma={gamma:g}: refinement changed E by {100 * change:.1f}%"
        warnings.warn(msg, DominanceWarning, stacklevel=3)
        result.warnings.append(msg)


def temporal_study(config):
    """Rows over the N list at the fixed spatial resolution config.Ms[0], one block per gamma.

    With ``check_dominance`` the largest-N cell is repeated with twice as
    many elements; a change above 5% is reported as a DominanceWarning.
    """
    M = config.Ms[0]
    Ns = sorted(config.Ns)
    cells = [(g, N, M, config.finest) for g in config.gammas for N in Ns]
    if config.check_dominance:
        cells += [(g, Ns[-1], 2 * M, config.finest and 2 * config.finest) for g in config.gammas]
    errs = _run_cells(config, cells)
    result = StudyResult(rows=[])
    k = len(Ns)
    for i, g in enumerate(config.gammas):
        block = errs[i * k : (i + 1) * k]
        result.rows += _rows("temporal", config, g, [(N, M) for N in Ns], block)
        if config.check_dominance:
            _dominance("temporal", block[-1], errs[len(config.gammas) * k + i], g, result)
    _emit(config, result)
    return result


def spatial_study(config):
    """Rows over the M list at the fixed time resolution config.Ns[-1].

    Errors are measured on the finest spatial mesh (``finest`` or the
    largest M) so that every row uses the same quadrature points.
    """
    N = max(config.Ns)
    Ms = sorted(config.Ms)
    finest = config.finest or Ms[-1]
    cells = [(g, N, M, finest) for g in config.gammas for M in Ms]
    if config.check_dominance:
        cells += [(g, 2 * N, Ms[-1], finest) for g in config.gammas]
    errs = _run_cells(config, cells)
    result = StudyResult(rows=[])
    k = len(Ms)
    for i, g in enumerate(config.gammas):
        block = errs[i * k : (i + 1) * k]
        result.rows += _rows("spatial", config, g, [(N, M) for M in Ms], block)
        if config.check_dominance:
            _dominance("spatial", block[-1], errs[len(config.gammas) * k + i], g, result)
    _emit(config, result)
    return result


def error_trace(alpha, gamma, N=160, M=1200, T=1.0, scheme="l1", n_terms=60, initial="ritz", out=None):
    """Per-step errors (t_n, ||U_h^n - u(t_n)||), n = 1..N."""
    problem = benchmark_problem(alpha)
    mesh = build_graded_mesh(T, N, gamma)
    sys = build_system(0.0, 1.0, M, problem)
    hist = run(problem, mesh, sys, scheme=scheme, initial=initial)
    times, errs = error_series(hist, sys, SeriesSolution(alpha, n_terms=n_terms))
    if out is not None:
        with open(out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(trace_csv(alpha, gamma, N, M, times, errs))
    return list(zip(times.tolist(), errs.tolist()))


def trace_csv(alpha, gamma, N, M, times, errs):
    buf = io.StringIO()
    buf.write("alpha,gamma,N,M,n,t,error\n")
    for n, (t, e) in enumerate(zip(times, errs), start=1):
        buf.write(f"{alpha:g},{gamma:g},{N},{M},{n},{t:.16e},{e:.6e}\n")
    return buf.getvalue()


def rows_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r.as_csv())
    return buf.getvalue()


def format_table(rows):
    """Aligned text table: one error/rate column pair per gamma."""
    if not rows:
        return ""
    study = rows[0].study
    key = "N" if study == "temporal" else "M"
    gammas = sorted({r.gamma for r in rows})
    sizes = sorted({getattr(r, key) for r in rows})
    lookup = {(r.gamma, getattr(r, key)): r for r in rows}
    head = f"{key:>6}" + "".join(f" | {'gamma=' + format(g, 'g'):>12} {'rate':>7}" for g in gammas)
    lines = [head, "-" * len(head)]
    for s in sizes:
        line = f"{s:>6}"
        for g in gammas:
            r = lookup.get((g, s))
            if r is None:
                line += f" | {'':>12} {'':>7}"
            else:
                rate = "" if r.rate is None else f"{r.rate:.4f}"
                line += f" | {r.error:>12.4e} {rate:>7}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def _emit(config, result):
    if config.out:
        with open(config.out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(rows_csv(result.rows))
        log.info("wrote %d rows to %s", len(result.rows), config.out)
