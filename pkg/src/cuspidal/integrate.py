"""Numerical convergence verdicts for integrals of radial test functions.

Each integral is first reduced, using rotational symmetry and a completion
of squares, to a handful of one-dimensional coordinates: a line coordinate
``z`` and radial coordinates ``rho`` carrying the measure
``vol(S^{d-1}) rho^{d-1} d rho``.  One radial block of the form
``phi(A + B rho^2)`` can be integrated out through a precomputed table of

    H_d(A) = int_0^oo tau^{d-1} phi(A (1 + tau^2)) d tau,

which is used whenever that block is integrable on its own.

The remaining coordinates are discretised by composite Gauss-Legendre
rules on panels whose endpoints include every truncation radius
``R_j = ratio^j``.  Summing node contributions by the first box
``max|coord| <= R_j`` that contains them yields all truncated integrals in a
single pass.  The verdict comes from the tail of that schedule:

* Divergent: increments stop shrinking and either grow like a power of
  ``R`` (positive fitted exponent) or stay flat while ``I(R)`` is linear in
  ``log R``.
* Convergent: increments shrink geometrically-or-faster with a negative
  fitted exponent and an extrapolated tail that is small.
* Inconclusive otherwise.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .geometry import completed_square, cosh_rank0, cosh_rank1
from .parabolics import ParabolicClass, Rank, is_h_compatible
from .profiles import ProfileKind, RadialProfile, is_schwartz_power

THREADS_ENV = "CUSPIDAL_THREADS"


class Verdict(str, enum.Enum):
    CONVERGENT = "Convergent"
    DIVERGENT = "Divergent"
    INCONCLUSIVE = "Inconclusive"


class Prediction(str, enum.Enum):
    MUST_CONVERGE = "MustConverge"
    MUST_DIVERGE = "MustDiverge"
    UNKNOWN = "Unknown"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class IntegrationConfig:
    ratio: float = 2.0
    levels: int = 64
    fine_levels: int = 8
    grading: int = 6
    nodes: int = 6
    nodes_3d: int = 4
    fit_window: int = 8
    monotone_steps: int = 4
    r2_min: float = 0.99
    slope_tol: float = 0.02
    shrink_ratio: float = 0.99
    tail_tol: float = 0.05
    panel_rel_tol: float = 1e-4
    e2e_rel_tol: float = 5e-3
    chunk_elems: int = 1 << 21
    threads: int = field(default_factory=default_threads)

    def radii(self) -> np.ndarray:
        return self.ratio ** np.arange(1, self.levels + 1, dtype=float)

    def tolerances(self) -> dict:
        d = asdict(self)
        d.pop("threads")
        return d


@dataclass
class IntegralVerdict:
    status: Verdict
    value: Optional[float]
    error_estimate: Optional[float]
    growth_exponent: float
    fit_r2: float
    schedule: list[tuple[float, float]]
    details: dict = field(default_factory=dict)

    @property
    def truncated_values(self) -> np.ndarray:
        return np.array([v for _, v in self.schedule])


# ------------------------------------------------------------------ grids

@dataclass
class Axis:
    name: str
    nodes: np.ndarray
    weights: np.ndarray
    levels: np.ndarray


def _sphere_volume(d: int) -> float:
    return float(2 * math.pi ** (d / 2) / math.gamma(d / 2))


def _level_of(b: np.ndarray, cfg: IntegrationConfig) -> np.ndarray:
    lev = np.ceil(np.log(np.maximum(b, 1e-300)) / math.log(cfg.ratio) - 1e-9)
    return np.clip(lev, 1, cfg.levels).astype(np.int64)


def _panel_rule(breaks: np.ndarray, q: int):
    t, w = np.polynomial.legendre.leggauss(q)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (b - a) * t + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w
    outer = np.maximum(np.abs(breaks[:-1]), np.abs(breaks[1:]))
    return nodes.ravel(), weights.ravel(), np.repeat(outer, q)


def _positive_breaks(cfg: IntegrationConfig, fine: int, foci: tuple[float, ...], depth: int) -> np.ndarray:
    pts = {0.0}
    pts.update(cfg.ratio ** np.arange(-fine, cfg.levels + 1, dtype=float))
    for f in foci:
        for j in range(1, depth + 1):
            h = 2.0 ** (-j)
            pts.update((f - h, f + h))
        pts.add(f)
    return np.array(sorted(p for p in pts if 0 <= p <= cfg.ratio ** cfg.levels))


def radial_axis(name: str, dim: int, cfg: IntegrationConfig, q: int, fine: Optional[int] = None) -> Axis:
    breaks = _positive_breaks(cfg, cfg.fine_levels if fine is None else fine, (), 0)
    x, w, outer = _panel_rule(breaks, q)
    w = w * _sphere_volume(dim) * x ** (dim - 1)
    return Axis(name, x, w, _level_of(outer, cfg))


def line_axis(name: str, cfg: IntegrationConfig, q: int, foci: tuple[float, ...] = (1.0,),
              depth: Optional[int] = None, fine: Optional[int] = None) -> Axis:
    pos = _positive_breaks(cfg, cfg.fine_levels if fine is None else fine, foci,
                           cfg.grading if depth is None else depth)
    breaks = np.concatenate([-pos[::-1], pos[1:]])
    x, w, outer = _panel_rule(breaks, q)
    return Axis(name, x, w, _level_of(outer, cfg))


# ------------------------------------------------------------ inner tables

def _log_phi(profile: RadialProfile, log_r):
    return profile.log_value(log_r)


def inner_converges(profile: RadialProfile, d: int) -> bool:
    """Whether ``int_{R^d} phi(A + |x|^2) dx`` is finite."""
    a, b = profile.tail
    p = d + 2 * a
    return p < 0 or (p == 0 and b > 1)


class InnerTable:
    """Spline for ``log H_d`` as a function of ``log A`` on ``[log 2, log_max]``."""

    def __init__(self, profile: RadialProfile, d: int, log_max: float = 705.0,
                 step: float = 0.125, tau_levels: int = 200, q: int = 8):
        if not inner_converges(profile, d):
            raise ValueError("inner radial integral diverges for this profile")
        self.profile, self.d = profile, d
        logA = np.arange(math.log(2.0), log_max + step, step)
        pts = np.concatenate([[0.0], 2.0 ** np.arange(-24, tau_levels + 1, dtype=float)])
        t, w = np.polynomial.legendre.leggauss(q)
        a, b = pts[:-1, None], pts[1:, None]
        tau = (0.5 * (b - a) * t + 0.5 * (a + b)).ravel()
        wt = (0.5 * (b - a) * w).ravel()
        log_tau = np.log(tau)
        log1p_tau2 = np.log1p(tau * tau)
        vals = np.empty_like(logA)
        for i in range(0, len(logA), 256):
            la = logA[i:i + 256, None]
            lg = (d - 1) * log_tau + _log_phi(profile, la + log1p_tau2)
            peak = lg.max(axis=1, keepdims=True)
            s = np.sum(wt * np.exp(lg - peak), axis=1)
            vals[i:i + 256] = np.logaddexp(peak[:, 0] + np.log(s), self._log_tail(la[:, 0], pts[-1]))
        self.log_max = log_max
        self.spline = CubicSpline(logA, vals)

    def _log_tail(self, logA, T: float):
        # leading-order integral of the profile tail beyond tau = T
        a, b = self.profile.tail
        p = self.d + 2 * a
        c = 1.0 + logA + 2 * math.log(T)
        base = a * logA + math.log(self.profile.coefficient)
        if p == 0:
            return base + (1 - b) * np.log(c) - math.log(2 * (b - 1))
        return base + p * math.log(T) - math.log(-p) - b * np.log(c)

    def __call__(self, A):
        la = np.log(A)
        if np.any(la > self.log_max + 1e-9):
            raise OverflowError("argument beyond the tabulated range")
        return np.exp(self.spline(la))

    def direct(self, A: float) -> float:
        """Adaptive quadrature of ``H_d(A)``, independent of the table."""
        from scipy.integrate import quad
        f = lambda u: math.exp(self.d * u + float(_log_phi(self.profile, math.log(A) + np.logaddexp(0, 2 * u))))
        val, _ = quad(f, -60, 60, limit=400, epsabs=0, epsrel=1e-11)
        tail, _ = quad(f, 60, np.inf, limit=400, epsabs=0, epsrel=1e-10)
        return val + tail


@lru_cache(maxsize=64)
def inner_table(profile: RadialProfile, d: int) -> InnerTable:
    return InnerTable(profile, d)


def inner_block(profile: RadialProfile, d: int, A, B):
    """``int_{R^d} phi(A + B |x|^2) dx`` via the table."""
    table = inner_table(profile, d)
    return _sphere_volume(d) * (A / B) ** (d / 2.0) * table(A)


def phi_values(profile: RadialProfile, r):
    return np.exp(_log_phi(profile, np.log(r)))


# ----------------------------------------------------------- the engine

Integrand = Callable[[dict], np.ndarray]


@dataclass
class ReducedProblem:
    axes: list[Axis]
    integrand: Integrand
    description: dict = field(default_factory=dict)


def _chunk_sums(problem: ReducedProblem, cfg: IntegrationConfig, lo: int, hi: int) -> np.ndarray:
    axes = problem.axes
    D = len(axes)
    coords, weight, level = {}, None, None
    for i, ax in enumerate(axes):
        sl = slice(lo, hi) if i == 0 else slice(None)
        shape = [1] * D
        shape[i] = -1
        coords[ax.name] = ax.nodes[sl].reshape(shape)
        w = ax.weights[sl].reshape(shape)
        lv = ax.levels[sl].reshape(shape)
        weight = w if weight is None else weight * w
        level = lv if level is None else np.maximum(level, lv)
    vals = problem.integrand(coords) * weight
    level = np.broadcast_to(level, vals.shape)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite integrand value encountered")
    return np.bincount(level.ravel(), weights=vals.ravel(), minlength=cfg.levels + 1)


def level_sums(problem: ReducedProblem, cfg: IntegrationConfig) -> np.ndarray:
    """Contribution of each shell ``R_{j-1} < max|coord| <= R_j`` (index ``j``)."""
    if not problem.axes:
        out = np.zeros(cfg.levels + 1)
        out[1] = float(problem.integrand({}))
        return out
    n0 = len(problem.axes[0].nodes)
    rest = int(np.prod([len(a.nodes) for a in problem.axes[1:]])) if len(problem.axes) > 1 else 1
    step = max(1, cfg.chunk_elems // max(rest, 1))
    bounds = [(lo, min(lo + step, n0)) for lo in range(0, n0, step)]
    if cfg.threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            parts = list(pool.map(lambda b: _chunk_sums(problem, cfg, *b), bounds))
    else:
        parts = [_chunk_sums(problem, cfg, *b) for b in bounds]
    stacked = np.stack(parts)
    return np.array([math.fsum(stacked[:, j]) for j in range(stacked.shape[1])])


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss if ss > 0 else 1.0
    return float(coef[0]), float(r2)


def analyse_schedule(sums: np.ndarray, cfg: IntegrationConfig) -> IntegralVerdict:
    radii = cfg.radii()
    trunc = np.cumsum(sums[1:])
    schedule = [(float(R), float(v)) for R, v in zip(radii, trunc)]
    total = float(trunc[-1])
    inc = sums[2:]
    inc_r = radii[1:]
    W = min(cfg.fit_window, len(inc))
    tail_inc = inc[-W:]
    if total > 0 and (np.all(tail_inc <= 1e-15 * total) or inc[-1] <= 1e-14 * total):
        return IntegralVerdict(Verdict.CONVERGENT, total, abs(float(inc[-1])), -math.inf, 1.0,
                               schedule, {"tail": 0.0})
    if np.any(tail_inc <= 0):
        return IntegralVerdict(Verdict.INCONCLUSIVE, None, None, math.nan, math.nan, schedule)
    p, r2 = _linfit(np.log(inc_r[-W:]), np.log(tail_inc))
    m = cfg.monotone_steps
    ratios = inc[-m:] / inc[-m - 1:-1]
    details = {"ratios": ratios.tolist()}
    if np.all(ratios >= 1 - 1e-3):
        if p > cfg.slope_tol and r2 >= cfg.r2_min:
            return IntegralVerdict(Verdict.DIVERGENT, None, None, p, r2, schedule, details)
        if abs(p) <= cfg.slope_tol:
            s_log, r2_log = _linfit(np.log(radii[-W:]), trunc[-W:])
            details["log_fit"] = (s_log, r2_log)
            if s_log > 0 and r2_log >= cfg.r2_min:
                return IntegralVerdict(Verdict.DIVERGENT, None, None, p, r2_log, schedule, details)
    if np.all(ratios <= cfg.shrink_ratio) and p < -cfg.slope_tol:
        rho = cfg.ratio ** p
        tail = float(inc[-1] * rho / (1 - rho))
        details["tail"] = tail
        if tail <= cfg.tail_tol * total:
            return IntegralVerdict(Verdict.CONVERGENT, total + tail, abs(tail), p, r2, schedule, details)
    return IntegralVerdict(Verdict.INCONCLUSIVE, None, None, p, r2, schedule, details)


def solve(build: Callable[[int], ReducedProblem], cfg: IntegrationConfig, q: int) -> IntegralVerdict:
    """Run the schedule with ``q`` nodes per panel and attach an error estimate from ``q - 2``."""
    fine = build(q)
    verdict = analyse_schedule(level_sums(fine, cfg), cfg)
    verdict.details.update(fine.description)
    verdict.details["nodes_per_panel"] = q
    if verdict.status is Verdict.CONVERGENT:
        coarse = level_sums(build(q - 2), cfg)
        quad_err = abs(float(np.sum(coarse[1:])) - verdict.schedule[-1][1])
        verdict.error_estimate = float(verdict.error_estimate + quad_err)
        verdict.details["quadrature_error"] = quad_err
    return verdict


# ---------------------------------------------------------- rank-one

def _rank1_builder(n: int, k: int, l: int, profile: RadialProfile, cfg: IntegrationConfig):
    dx, dv, dw = n - k, k - 2, l - k
    use_table = dx > 0 and inner_converges(profile, dx)
    n_outer = 1 + (dv > 0) + (dw > 0) + (dx > 0 and not use_table)

    def build(q: int) -> ReducedProblem:
        axes = [line_axis("z", cfg, q)]
        if dv:
            axes.append(radial_axis("v", dv, cfg, q))
        if dw:
            axes.append(radial_axis("w", dw, cfg, q))
        if dx and not use_table:
            axes.append(radial_axis("x", dx, cfg, q))

        def integrand(c):
            z = c["z"]
            vv = c["v"] ** 2 if dv else 0.0
            ww = c["w"] ** 2 if dw else 0.0
            cp, jac = completed_square(n, k, l, vv + ww, ww, z)
            if dx == 0:
                return jac * phi_values(profile, cp)
            if use_table:
                return jac * inner_block(profile, dx, cp, 1.0)
            return jac * phi_values(profile, cp + c["x"] ** 2)

        return ReducedProblem(axes, integrand, {"axes": [a.name for a in axes], "inner_table": use_table})

    return build, (cfg.nodes_3d if n_outer >= 3 else cfg.nodes)


def integrate_rank1(n: int, k: int, l: int, profile: RadialProfile,
                    cfg: Optional[IntegrationConfig] = None) -> IntegralVerdict:
    """Integral of the profile over ``U_{k,l}`` with Lebesgue measure ``dx dy dz``."""
    cfg = cfg or IntegrationConfig()
    ParabolicClass(n, Rank.SIGMA_RANK1, k, l)
    if profile.n != n:
        raise ValueError("profile dimension does not match n")
    build, q = _rank1_builder(n, k, l, profile, cfg)
    return solve(build, cfg, q)


# ---------------------------------------------------------- rank-zero

def _rank0_builder(n: int, k: int, profile: RadialProfile, cfg: IntegrationConfig):
    dims = {"x": k - 1, "y": n - k}
    inner, outer = "x", "y"
    if dims["x"] == 0 or (not inner_converges(profile, dims["x"]) and dims["y"] > 0
                          and inner_converges(profile, dims["y"])):
        inner, outer = "y", "x"
    di, do = dims[inner], dims[outer]
    use_table = di > 0 and inner_converges(profile, di)

    def build(q: int) -> ReducedProblem:
        axes = []
        if do:
            axes.append(radial_axis(outer, do, cfg, q))
        if di and not use_table:
            axes.append(radial_axis(inner, di, cfg, q))

        def integrand(c):
            ro = c[outer] ** 2 if do else 0.0
            A = 2.0 + 4.0 * ro
            B = 4.0 + 4.0 * ro
            if di == 0:
                return phi_values(profile, A)
            if use_table:
                return inner_block(profile, di, A, B)
            return phi_values(profile, A + B * c[inner] ** 2)

        return ReducedProblem(axes, integrand, {"axes": [a.name for a in axes], "inner_table": use_table})

    return build, cfg.nodes


def integrate_rank0(n: int, k: int, profile: RadialProfile,
                    cfg: Optional[IntegrationConfig] = None) -> IntegralVerdict:
    """Integral over ``V_k`` in the Lebesgue parameters ``(x, y)`` of ``v_{x,y}``."""
    cfg = cfg or IntegrationConfig()
    ParabolicClass(n, Rank.SIGMA_RANK0, k)
    if profile.n != n:
        raise ValueError("profile dimension does not match n")
    build, q = _rank0_builder(n, k, profile, cfg)
    return solve(build, cfg, q)


# -------------------------------------------------------- predictions

def schwartz_m_threshold(c: ParabolicClass) -> float:
    """Smallest ``m`` beyond which the product bounds for ``SchwartzM(m)`` converge."""
    n = c.n
    if c.rank is Rank.SIGMA_RANK0:
        return 2.0
    if n % 2 == 0:
        return 1.0
    return 2.0 if c.k == c.l else 3.0


def divergence_threshold(c: ParabolicClass) -> float:
    n, k = c.n, c.k
    if c.rank is Rank.SIGMA_RANK1:
        return min((k - n) / 2.0, (2 - c.l) / 2.0)
    return min((1 - k) / 2.0, (k - n) / 2.0)


def predicted_verdict(c: ParabolicClass, profile: RadialProfile) -> Prediction:
    if profile.n != c.n:
        raise ValueError("profile dimension does not match the class")
    compatible = is_h_compatible(c)
    thr = divergence_threshold(c)
    if profile.kind is ProfileKind.POWER_NU:
        nu = profile.param
        if not is_schwartz_power(c.n, nu):
            return Prediction.UNKNOWN
        if compatible:
            return Prediction.MUST_CONVERGE
        beyond = nu > thr if c.rank is Rank.SIGMA_RANK1 else nu >= thr
        return Prediction.MUST_DIVERGE if beyond else Prediction.UNKNOWN
    if compatible:
        return Prediction.MUST_CONVERGE if profile.param > schwartz_m_threshold(c) else Prediction.UNKNOWN
    # the tail exponent (1-n)/4 lies strictly above the divergence threshold
    return Prediction.MUST_DIVERGE


# -------------------------------------------------------- Monte Carlo

MC_LOG_RADIUS = 100.0


def _cauchy(rng, size: int, scale: float):
    t = scale * rng.standard_cauchy(size)
    keep = np.abs(t) <= MC_LOG_RADIUS
    t = np.where(keep, t, 0.0)
    log_pdf = -np.log(math.pi * scale * (1 + (t / scale) ** 2))
    return t, keep, log_pdf


def _sample_block(rng, d: int, size: int, scale: float):
    t, keep, log_pdf = _cauchy(rng, size, scale)
    g = rng.normal(size=(size, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    log_w = np.where(keep, math.log(_sphere_volume(d)) + d * t - log_pdf, -np.inf)
    return g * np.exp(t)[:, None], log_w


def _sample_line(rng, size: int, scale: float):
    t, keep, log_pdf = _cauchy(rng, size, scale)
    log_w = np.where(keep, np.abs(t) + np.log1p(np.exp(-2 * np.abs(t))) - math.log(2) - log_pdf, -np.inf)
    return np.sinh(t), log_w


def monte_carlo_rank1(n: int, k: int, l: int, profile: RadialProfile, samples: int = 1 << 20,
                      seed: int = 0, scale: float = 2.0, batch: int = 1 << 16) -> tuple[float, float]:
    """Importance-sampled integral over the unreduced coordinates ``(x, y, z)``.

    Radii and ``asinh z`` are drawn from a Cauchy law in logarithmic scale, so
    the estimator has finite variance whenever the tails decay at least like
    ``r^{-d} log(r)^{-3/2}``.  Draws with log-radius beyond ``MC_LOG_RADIUS``
    are scored as zero.  Returns ``(mean, standard error)``.
    """
    rng = np.random.default_rng(seed)
    total, total_sq, count = 0.0, 0.0, 0
    for start in range(0, samples, batch):
        m = min(batch, samples - start)
        z, lw = _sample_line(rng, m, scale)
        x = np.zeros((m, n - 2))
        y = np.zeros((m, n - 2))
        if n - k:
            xb, lwx = _sample_block(rng, n - k, m, scale)
            x[:, k - 2:] = xb
            lw = lw + lwx
        if l - 2:
            yb, lwy = _sample_block(rng, l - 2, m, scale)
            y[:, :l - 2] = yb
            lw = lw + lwy
        r = cosh_rank1(x, y, z)
        f = np.exp(lw + _log_phi(profile, np.log(r)))
        total += math.fsum(f)
        total_sq += math.fsum(f * f)
        count += m
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return mean, math.sqrt(var / count)


def monte_carlo_rank0(n: int, k: int, profile: RadialProfile, samples: int = 1 << 20,
                      seed: int = 0, scale: float = 2.0, batch: int = 1 << 16) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    total, total_sq, count = 0.0, 0.0, 0
    for start in range(0, samples, batch):
        m = min(batch, samples - start)
        lw = np.zeros(m)
        x = np.zeros((m, n - 1))
        y = np.zeros((m, n - 1))
        if k - 1:
            xb, lwx = _sample_block(rng, k - 1, m, scale)
            x[:, :k - 1] = xb
            lw += lwx
        if n - k:
            yb, lwy = _sample_block(rng, n - k, m, scale)
            y[:, k - 1:] = yb
            lw += lwy
        r = cosh_rank0(x, y)
        f = np.exp(lw + _log_phi(profile, np.log(r)))
        total += math.fsum(f)
        total_sq += math.fsum(f * f)
        count += m
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return mean, math.sqrt(var / count)
