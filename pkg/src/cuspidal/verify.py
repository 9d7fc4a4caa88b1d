"""Invariant families run by ``cuspidal verify``.

Each family returns ``(passed, checks, detail)``.  Everything random is drawn
from generators seeded by the caller, and details never contain timings, so
two runs with the same seed produce identical output.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import geometry as geo
from .integrate import IntegrationConfig, Verdict, integrate_rank0, integrate_rank1
from .parabolics import (
    Rank,
    delta_p_exponent,
    dims,
    dims_closed_form,
    enumerate_classes,
    is_h_compatible,
    is_p_star,
    positive_system,
    sigma_theta_dual,
)
from .profiles import PowerNu, SchwartzM, is_schwartz_power, seminorm_mu1m
from .roots import all_roots, rho_h, rho_h_bar, rho_pairing_table, sigma_root


class _Tally:
    def __init__(self):
        self.checks = 0
        self.failures: list[str] = []

    def check(self, ok: bool, what: str):
        self.checks += 1
        if not ok and len(self.failures) < 5:
            self.failures.append(what)
        elif not ok:
            self.failures.append("")

    def result(self):
        bad = [f for f in self.failures if f]
        detail = "ok" if not self.failures else f"{len(self.failures)} failed: " + "; ".join(bad)
        return not self.failures, self.checks, detail


def expected_compatible(n: int, rank: Rank) -> set:
    if rank is Rank.SIGMA_RANK1:
        if n % 2 == 0:
            m = (n + 2) // 2
            return {(m, m)}
        m = (n + 1) // 2
        return {(m, m), (m, m + 1), (m + 1, m + 1)}
    return {((n + 1) // 2, None)} if n % 2 else set()


def family_roots(n_max: int, rng: np.random.Generator):
    t = _Tally()
    for n in range(3, n_max + 1):
        for basis, rho in (("E", rho_h(n)), ("F", rho_h_bar(n))):
            for r in all_roots(n, basis):
                t.check(r.pair(r) == 2, f"|{r}|^2 != 2")
                t.check(r.functional.pair(rho) == rho_pairing_table(r, n), f"pairing table at {r}")
                if basis == "E":
                    t.check(sigma_root(sigma_root(r)) == r, f"sigma not involutive at {r}")
    return t.result()


def family_catalog(n_max: int, rng: np.random.Generator):
    t = _Tally()
    for n in range(3, n_max + 1):
        for rank in Rank:
            classes = enumerate_classes(n, rank)
            comp = {(c.k, c.l) for c in classes if is_h_compatible(c)}
            t.check(comp == expected_compatible(n, rank), f"compatible set n={n} {rank.value}")
            for c in classes:
                positive_system(c)
                d = dims(c)
                t.check(d == dims_closed_form(c), f"dims of {c.label()} n={n}")
                t.check(sum(d) == n * (n - 1) // 2, f"dimension sum {c.label()} n={n}")
                if rank is Rank.SIGMA_RANK1:
                    dual = sigma_theta_dual(c)
                    t.check(sigma_theta_dual(dual) == c, f"duality not involutive at {c.label()}")
                    t.check(dims(dual) == d, f"dual dims differ at {c.label()}")
                    if is_p_star(c):
                        t.check(d[1] == n - 1, f"dim u != n-1 at {c.label()}")
                        t.check(delta_p_exponent(c) == 1, f"modular exponent at {c.label()}")
    return t.result()


def _rel(a, b):
    return np.abs(a - b) / np.maximum(1.0, np.abs(b))


def family_geometry(n_max: int, rng: np.random.Generator, samples: int = 200):
    t = _Tally()
    for n in range(3, min(n_max, 6) + 1):
        for k in range(2, n + 1):
            for l in range(k, n + 1):
                xsl, ysl, _ = geo._support_slices(n, k, l)
                for _ in range(samples // 10):
                    x = np.zeros(n - 2)
                    y = np.zeros(n - 2)
                    x[xsl] = rng.normal(size=n - k)
                    y[ysl] = rng.normal(size=l - 2)
                    z = float(rng.normal())
                    m = geo.radial(geo.u_xyz(x, y, z))
                    t.check(_rel(geo.cosh_rank1(x, y, z), m) < 1e-8, f"cosh_rank1 n={n}")
                    t.check(_rel(geo.cosh_rank1_reduced(k, l, x, y, z), m) < 1e-8, f"reduced n={n}")
        for _ in range(samples):
            x = rng.normal(size=n - 1)
            y = rng.normal(size=n - 1)
            y -= (x @ y) / (x @ x) * x
            m = geo.radial(geo.v_xy(x, y))
            t.check(_rel(geo.cosh_rank0(x, y), m) < 1e-8, f"cosh_rank0 n={n}")
            g = geo.u_xyz(rng.normal(size=n - 2), rng.normal(size=n - 2), float(rng.normal()))
            moved = geo.random_K(n, rng) @ g @ geo.random_H(n, rng)
            t.check(_rel(geo.radial(moved), geo.radial(g)) < 1e-7, f"K x H invariance n={n}")
            h = geo.random_H(n, rng)
            t.check(geo.in_H(h) and np.allclose(geo.sigma(h), h), f"random_H n={n}")
        for k in range(2, n + 1):
            s = float(rng.uniform(-2, 2))
            x = rng.normal(size=n - k)
            y = rng.normal(size=k - 2)
            z = float(rng.normal())
            m = geo.radial(geo.a_t(n, s) @ geo.embed_hc(n, k, x, y, z))
            t.check(_rel(geo.cosh_hc(s, x, y, z), m) < 1e-8, f"cosh_hc n={n} k={k}")
    for _ in range(100):
        q = Fraction(int(rng.integers(1, 10**6)), int(rng.integers(1, 10**6)))
        z = Fraction(int(rng.integers(-10**6, 10**6)), int(rng.integers(1, 10**6)))
        f1, f2, f3 = geo.f_triple_exact(q, z)
        t.check(f2 * f3 - f1 == 2, "f2 f3 - f1 != 2 exactly")
    return t.result()


def random_orbit_point(n: int, rng: np.random.Generator):
    h = (n - 3) // 2
    xi = np.zeros(n - 2)
    eta = np.zeros(n - 2)
    xi[h:] = rng.normal(size=n - 2 - h)
    eta[:h] = rng.normal(size=h)
    return xi, eta, float(rng.normal())


def family_orbit_limit(n_max: int, rng: np.random.Generator, points: int = 3):
    t = _Tally()
    d = geo.sl2_core_limit([2, 4, 6, 8])
    t.check(all(b < a for a, b in zip(d, d[1:])) and d[-1] < 1e-6, "SL(2) core limit")
    for n in (3, 5, 7):
        if n > n_max:
            break
        for _ in range(points):
            xi, eta, om = random_orbit_point(n, rng)
            dist = geo.orbit_limit_check(n, xi, eta, om, [2, 4, 6], dps=40)
            t.check(all(b < a for a, b in zip(dist, dist[1:])) and dist[-1] < 1e-3,
                    f"orbit limit n={n}")
    return t.result()


def family_profiles(n_max: int, rng: np.random.Generator):
    t = _Tally()
    for n in range(3, n_max + 1):
        edge = (1 - n) / 4
        for nu in (edge - 1.0, edge - 0.25):
            p = PowerNu(nu, n)
            t.check(is_schwartz_power(n, nu), f"nu={nu} should be Schwartz")
            t.check(math.isfinite(seminorm_mu1m(p, 3)), f"seminorm finite nu={nu}")
        for nu in (edge, edge + 0.25):
            t.check(not is_schwartz_power(n, nu), f"nu={nu} should not be Schwartz")
            t.check(math.isinf(seminorm_mu1m(PowerNu(nu, n), 1)), f"seminorm infinite nu={nu}")
        p = SchwartzM(6, n)
        t.check(math.isfinite(seminorm_mu1m(p, 6)) and math.isinf(seminorm_mu1m(p, 7)),
                f"SchwartzM seminorm window n={n}")
    return t.result()


def rank1_oracle_n3() -> float:
    f = lambda z: 1.0 / math.sqrt((z ** 4 + 2) * ((1 + z) ** 2 + 1))
    return math.pi * sum(quad(f, a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
                         for a, b in ((-math.inf, -1), (-1, 1), (1, math.inf)))


def rank0_oracle_n3() -> float:
    f = lambda y: 1.0 / math.sqrt((2 + 4 * y * y) * (4 + 4 * y * y))
    return 2 * math.pi * quad(f, 0, math.inf, epsabs=0, epsrel=1e-12, limit=200)[0]


def family_integration(n_max: int, rng: np.random.Generator):
    t = _Tally()
    cfg = IntegrationConfig()
    v = integrate_rank1(3, 2, 2, PowerNu(-1, 3), cfg)
    t.check(v.status is Verdict.CONVERGENT and abs(v.value / rank1_oracle_n3() - 1) < 1e-6,
            "rank-one value against 1-D oracle")
    v = integrate_rank0(3, 2, PowerNu(-1, 3), cfg)
    t.check(v.status is Verdict.CONVERGENT and abs(v.value / rank0_oracle_n3() - 1) < 1e-6,
            "rank-zero value against 1-D oracle")
    v = integrate_rank1(4, 2, 2, PowerNu(-0.9, 4), cfg)
    t.check(v.status is Verdict.DIVERGENT and v.growth_exponent > 0, "P(2,2) for n=4 should diverge")
    from .hc import hc_value
    t.check(abs(hc_value(3, 2, PowerNu(-1, 3), 0.0, cfg) / rank1_oracle_n3() - 1) < 1e-6,
            "transform at s=0 equals the cuspidal integral")
    return t.result()


FAMILIES: dict[str, Callable] = {
    "roots": family_roots,
    "catalog": family_catalog,
    "geometry": family_geometry,
    "orbit_limit": family_orbit_limit,
    "profiles": family_profiles,
    "integration": family_integration,
}


def run_families(n_max: int, seed: int) -> list[tuple[str, bool, int, str]]:
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    out = []
    for i, (name, fn) in enumerate(FAMILIES.items()):
        rng = np.random.default_rng([seed, i])
        try:
            passed, checks, detail = fn(n_max, rng)
        except Exception as exc:  # a crashing family is a failing family
            passed, checks, detail = False, 0, f"{type(exc).__name__}: {exc}"
        out.append((name, passed, checks, detail))
    return out
