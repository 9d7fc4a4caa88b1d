"""Radial test functions on X_n and the first Schwartz seminorm.

A profile is a function of ``r = 2 cosh(4t) >= 2``:

* ``PowerNu(nu)``:   ``r^nu``
* ``SchwartzM(m)``:  ``r^{(1-n)/4} (1 + log r)^{-m}``
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class ProfileKind(str, enum.Enum):
    POWER_NU = "PowerNu"
    SCHWARTZ_M = "SchwartzM"


@dataclass(frozen=True)
class RadialProfile:
    kind: ProfileKind
    param: float
    n: int
    coefficient: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ProfileKind(self.kind))
        if not isinstance(self.n, int) or self.n < 3:
            raise ValueError(f"n must be an integer >= 3, got {self.n!r}")
        if not math.isfinite(self.param):
            raise ValueError("profile parameter must be finite")
        if self.kind is ProfileKind.SCHWARTZ_M and self.param < 0:
            raise ValueError("m must be non-negative")
        if not (self.coefficient > 0 and math.isfinite(self.coefficient)):
            raise ValueError("coefficient must be positive and finite")

    @classmethod
    def power(cls, nu: float, n: int) -> "RadialProfile":
        return cls(ProfileKind.POWER_NU, float(nu), n)

    @classmethod
    def schwartz(cls, m: float, n: int) -> "RadialProfile":
        return cls(ProfileKind.SCHWARTZ_M, float(m), n)

    @property
    def label(self) -> str:
        key = "nu" if self.kind is ProfileKind.POWER_NU else "m"
        text = f"{key}={self.param:g}"
        return text if self.coefficient == 1.0 else f"{self.coefficient:g}*{text}"

    def scaled(self, c: float) -> "RadialProfile":
        return RadialProfile(self.kind, self.param, self.n, self.coefficient * c)

    @property
    def tail(self) -> tuple[float, float]:
        """``(a, b)`` with ``phi(r) = r^a (1 + log r)^{-b}``."""
        if self.kind is ProfileKind.POWER_NU:
            return self.param, 0.0
        return (1 - self.n) / 4.0, self.param

    def log_value(self, log_r):
        a, b = self.tail
        log_r = np.asarray(log_r, dtype=float)
        out = a * log_r
        if self.coefficient != 1.0:
            out = out + math.log(self.coefficient)
        if b:
            out = out - b * np.log1p(log_r)
        return out

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 2.0 - 1e-12):
            raise ValueError("profiles are defined for r = 2 cosh 4t >= 2")
        val = np.exp(self.log_value(np.log(r)))
        return float(val) if val.ndim == 0 else val


def PowerNu(nu: float, n: int) -> RadialProfile:
    return RadialProfile.power(nu, n)


def SchwartzM(m: float, n: int) -> RadialProfile:
    return RadialProfile.schwartz(m, n)


def is_schwartz_power(n: int, nu: float) -> bool:
    """``r^nu`` belongs to the Harish-Chandra Schwartz space iff ``nu < (1-n)/4``."""
    return nu < (1 - n) / 4.0


def _log_r(t: np.ndarray) -> np.ndarray:
    return 4 * t + np.log1p(np.exp(-8 * t))


def _grid_sup(p: RadialProfile, m: float, t_max: float, grid: int) -> tuple[float, bool]:
    t = np.linspace(0.0, t_max, grid)
    L = _log_r(t)
    logw = (p.n - 1) / 4.0 * L + m * np.log1p(L) + p.log_value(L)
    i = int(np.argmax(logw))
    val = float(np.exp(logw[i])) if logw[i] < 700 else math.inf
    return val, i < grid - 1


def seminorm_mu1m(p: RadialProfile, m: float, t_max: float = 10.0, grid: int = 4001,
                  doublings: int = 8) -> float:
    """``sup_t r^{(n-1)/4} (1 + log r)^m |phi(r)|`` over a grid in ``t``.

    The log of the weighted profile is concave in ``log r``, so the supremum
    is attained once the grid maximum is interior.  ``t_max`` is doubled until
    that happens; if it never does the seminorm is reported as infinite.
    """
    if t_max <= 0 or grid < 2:
        raise ValueError("need t_max > 0 and at least two grid points")
    for j in range(doublings + 1):
        val, interior = _grid_sup(p, m, t_max * 2 ** j, (grid - 1) * 2 ** j + 1)
        if not math.isfinite(val):
            return math.inf
        if interior:
            return val
    return math.inf
