"""The transform ``s -> e^s int_{U_{k,k}} phi(a_s u . H) du`` on h-compatible classes.

At ``a_s u`` the radial coordinate is ``f1 + f2 |x|^2 + f3 |y|^2 + |x|^2 |y|^2``
with ``x`` in ``R^{n-k}`` and ``y`` in ``R^{k-2}``, so after integrating out
angles only ``z`` and the two radii remain.  One radius is integrated through
the inner tables of :mod:`cuspidal.integrate`; the other, with ``z``, goes on
the truncation grid.

For odd ``n`` the transform tends, as ``s -> +oo``, to the rank-zero integral
over ``V_{(n+1)/2}`` times ``2^{(n-1)/2}``.  The factor comes from the scaling
of the parameters in which the ``N``-orbit limit is taken; it is checked
numerically by :func:`cuspidal.geometry.orbit_limit_check`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import f_triple
from .integrate import (
    IntegralVerdict,
    IntegrationConfig,
    ReducedProblem,
    Verdict,
    inner_block,
    inner_converges,
    integrate_rank0,
    line_axis,
    phi_values,
    radial_axis,
    solve,
)
from .parabolics import ParabolicClass, Rank, is_h_compatible
from .profiles import RadialProfile

IDENTITY_TOL = 1e-9


class HcError(ValueError):
    def __init__(self, message: str, status: Optional[Verdict] = None):
        super().__init__(message)
        self.status = status


@dataclass
class HcSeries:
    n: int
    k: int
    profile: RadialProfile
    points: list[tuple[float, float, float]] = field(default_factory=list)

    def __post_init__(self):
        _check_class(self.n, self.k)

    @property
    def s(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    @property
    def errors(self) -> np.ndarray:
        return np.array([p[2] for p in self.points])


def _check_class(n: int, k: int) -> ParabolicClass:
    c = ParabolicClass(n, Rank.SIGMA_RANK1, k, k)
    if not is_h_compatible(c):
        raise HcError(f"class {c.label()} is not h-compatible for n={n}")
    return c


def _depth(s: float) -> int:
    return int(math.ceil(2 * abs(s) / math.log(2))) + 8


def check_f_identity(f1, f2, f3, tol: float = IDENTITY_TOL) -> float:
    """Largest relative defect of ``f2 f3 = f1 + 2``; raises above ``tol``."""
    defect = np.abs(f2 * f3 - f1 - 2.0) / np.maximum(1.0, f1)
    worst = float(np.max(defect)) if np.size(defect) else 0.0
    if worst > tol:
        raise AssertionError(f"f2*f3 - f1 - 2 off by {worst:.3e} (relative)")
    return worst


def _hc_builder(n: int, k: int, profile: RadialProfile, s: float, cfg: IntegrationConfig):
    dims = {"x": n - k, "y": k - 2}
    inner, outer = "x", "y"
    if dims["x"] == 0 or (not inner_converges(profile, dims["x"]) and dims["y"] > 0
                          and inner_converges(profile, dims["y"])):
        inner, outer = "y", "x"
    di, do = dims[inner], dims[outer]
    use_table = di > 0 and inner_converges(profile, di)
    depth = _depth(s)
    fine = max(cfg.fine_levels, depth)
    stats = {"identity_defect": 0.0}

    def build(q: int) -> ReducedProblem:
        axes = [line_axis("z", cfg, q, foci=(-1.0, 1.0), depth=depth)]
        if do:
            axes.append(radial_axis(outer, do, cfg, q, fine=fine))
        if di and not use_table:
            axes.append(radial_axis(inner, di, cfg, q, fine=fine))

        def integrand(c):
            f1, f2, f3 = f_triple(s, c["z"])
            stats["identity_defect"] = max(stats["identity_defect"], check_f_identity(f1, f2, f3))
            # radial coordinate = (f1 + f_o r_o^2) + (f_i + r_o^2) r_i^2
            f_out, f_in = (f3, f2) if outer == "y" else (f2, f3)
            ro = c[outer] ** 2 if do else 0.0
            A = f1 + f_out * ro
            B = f_in + ro
            if di == 0:
                return phi_values(profile, A)
            if use_table:
                return inner_block(profile, di, A, B)
            return phi_values(profile, A + B * c[inner] ** 2)

        return ReducedProblem(axes, integrand, {"axes": [a.name for a in axes], "inner_table": use_table,
                                                "inner": inner if di else None, "z_depth": depth})

    return build, cfg.nodes, stats


def hc_integral(n: int, k: int, p: RadialProfile, s: float,
                cfg: Optional[IntegrationConfig] = None) -> IntegralVerdict:
    """``int phi(a_s u . H) du`` without the ``e^s`` prefactor."""
    cfg = cfg or IntegrationConfig()
    _check_class(n, k)
    if p.n != n:
        raise ValueError("profile dimension does not match n")
    build, q, stats = _hc_builder(n, k, p, float(s), cfg)
    verdict = solve(build, cfg, q)
    verdict.details["identity_defect"] = stats["identity_defect"]
    return verdict


def hc_point(n: int, k: int, p: RadialProfile, s: float,
             cfg: Optional[IntegrationConfig] = None) -> tuple[float, float]:
    """``(value, error)`` of the transform at ``s``."""
    v = hc_integral(n, k, p, s, cfg)
    if v.status is not Verdict.CONVERGENT:
        raise HcError(f"integral at s={s} is {v.status.value}", v.status)
    scale = math.exp(s)
    return scale * v.value, scale * v.error_estimate


def hc_value(n: int, k: int, p: RadialProfile, s: float,
             cfg: Optional[IntegrationConfig] = None) -> float:
    return hc_point(n, k, p, s, cfg)[0]


def hc_series(n: int, k: int, p: RadialProfile, s_grid: Sequence[float],
              cfg: Optional[IntegrationConfig] = None) -> HcSeries:
    cfg = cfg or IntegrationConfig()
    series = HcSeries(n, k, p)
    grid = [float(s) for s in s_grid]

    def one(s):
        return (s, *hc_point(n, k, p, s, cfg))

    if cfg.threads > 1 and len(grid) > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            pts = list(pool.map(one, grid))
    else:
        pts = [one(s) for s in grid]
    series.points = sorted(pts)
    return series


def default_s_grid(n: int) -> list[float]:
    hi = 8 if n % 2 else 6
    return [float(s) for s in range(-6, hi + 1)]


# ------------------------------------------------------------ the limit

def limit_scale_factor(n: int) -> float:
    return 2.0 ** ((n - 1) / 2)


def limit_rhs(n: int, p: RadialProfile, cfg: Optional[IntegrationConfig] = None) -> tuple[float, float]:
    """``(value, error)`` of the ``s -> oo`` limit for odd ``n``.

    Equal to ``2^{(n-1)/2}`` times the rank-zero integral over ``V_{(n+1)/2}``
    in the Lebesgue parameters of ``v_{x,y}``.
    """
    if n % 2 == 0:
        raise HcError("the limit formula applies to odd n only")
    v = integrate_rank0(n, (n + 1) // 2, p, cfg)
    if v.status is not Verdict.CONVERGENT:
        raise HcError(f"rank-zero integral is {v.status.value}", v.status)
    f = limit_scale_factor(n)
    return f * v.value, f * v.error_estimate


@dataclass
class DecayReport:
    n: int
    k: int
    N: int
    series: HcSeries
    weighted: list[float]
    argmax_s: dict[str, float]
    sides: dict[str, bool]
    bounded: bool
    limit: Optional[float] = None
    limit_error: Optional[float] = None
    limit_gaps: list[tuple[float, float]] = field(default_factory=list)
    gaps_decreasing: Optional[bool] = None


def _side_peak(s: np.ndarray, w: np.ndarray, mask: np.ndarray) -> float:
    return float(s[mask][int(np.argmax(w[mask]))]) if np.any(mask) else math.nan


def decay_check(n: int, k: int, p: RadialProfile, s_grid: Optional[Sequence[float]] = None,
                N: int = 2, cfg: Optional[IntegrationConfig] = None, interior: float = 2.0,
                series: Optional[HcSeries] = None) -> DecayReport:
    """Sup-normalised ``|value| (1+|s|)^N`` and its boundedness on the relevant sides.

    A side counts as bounded when the weighted values on it peak at
    ``|s| <= interior`` rather than growing towards the end of the grid.  Both
    sides are required for even ``n`` and only ``s <= 0`` for odd ``n``, where
    the gaps to the limit on ``s >= interior`` are reported as well.
    """
    if series is None:
        grid = default_s_grid(n) if s_grid is None else list(s_grid)
        if min(grid) >= 0 or max(grid) <= 0:
            raise ValueError("s grid must span both signs")
        series = hc_series(n, k, p, grid, cfg)
    s, vals = series.s, series.values
    w = np.abs(vals) * (1 + np.abs(s)) ** N
    w = w / np.max(w)
    masks = {"negative": s <= 0}
    if n % 2 == 0:
        masks["positive"] = s >= 0
    peaks = {side: _side_peak(s, w, m) for side, m in masks.items()}
    sides = {side: bool(abs(p) <= interior) for side, p in peaks.items()}
    rep = DecayReport(n, k, N, series, w.tolist(), peaks, sides, all(sides.values()))
    if n % 2:
        rep.limit, rep.limit_error = limit_rhs(n, p, cfg)
        gaps = [(float(a), abs(float(b) - rep.limit)) for a, b in zip(s, vals) if a >= interior]
        rep.limit_gaps = gaps
        g = [x for _, x in gaps]
        rep.gaps_decreasing = len(g) >= 2 and all(b < a for a, b in zip(g, g[1:]))
    return rep


def cauchy_gaps(series: HcSeries, s_min: float = 4.0) -> list[float]:
    """Successive differences of the series for ``s >= s_min``."""
    v = [val for s, val, _ in series.points if s >= s_min]
    return [abs(b - a) for a, b in zip(v, v[1:])]


def gaps_shrink(gaps: Sequence[float]) -> bool:
    return len(gaps) >= 1 and all(b < a for a, b in zip(gaps, gaps[1:]))


@dataclass
class DualLimitReport:
    n: int
    s: float
    values: dict[int, float]
    errors: dict[int, float]
    limit: float
    limit_error: float
    rel_dual: float
    rel_limit: dict[int, float]


def dual_class_limit(n: int, p: RadialProfile, s: float = 8.0,
                     cfg: Optional[IntegrationConfig] = None) -> DualLimitReport:
    """Transforms of the two classes ``k = (n+1)/2`` and ``k = (n+3)/2`` at large ``s``."""
    if n % 2 == 0:
        raise HcError("dual class limits are compared for odd n only")
    ks = ((n + 1) // 2, (n + 3) // 2)
    vals, errs = {}, {}
    for k in ks:
        vals[k], errs[k] = hc_point(n, k, p, s, cfg)
    lim, lim_err = limit_rhs(n, p, cfg)
    a, b = vals[ks[0]], vals[ks[1]]
    return DualLimitReport(n, s, vals, errs, lim, lim_err, abs(a - b) / max(abs(a), abs(b)),
                           {k: abs(v - lim) / abs(lim) for k, v in vals.items()})
