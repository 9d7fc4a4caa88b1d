"""Exact root and weight arithmetic for type A_{n-1}.

Functionals on the diagonal Cartan subalgebra of sl(n) are stored as rational
coefficient vectors modulo the all-ones vector.  Two coordinate systems are
supported:

* ``"E"``: the standard coordinates ``e_1, ..., e_n`` (restriction to the
  diagonal split torus ``a``).
* ``"F"``: the coordinates ``f_k = e_k o Ad(kappa)^{-1}`` on the conjugated
  torus ``b = Ad(kappa) a``.

Both use the same pairing ``<mu, nu> = sum_j mu_j nu_j`` evaluated on
sum-zero representatives, so every root has squared length 2.  Functionals
from different systems may not be paired or combined.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

BASES = ("E", "F")


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


@dataclass(frozen=True)
class Functional:
    """A linear functional ``sum_j c_j b_j`` in basis ``E`` or ``F``.

    Coefficients are canonicalised on construction by subtracting their mean,
    which picks the unique representative annihilating ``diag(1, ..., 1)``.
    """

    basis: str
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        c = tuple(_as_fraction(x) for x in self.coeffs)
        if len(c) == 0:
            raise ValueError("functional needs at least one coordinate")
        mean = sum(c, Fraction(0)) / len(c)
        object.__setattr__(self, "coeffs", tuple(x - mean for x in c))

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @classmethod
    def zero(cls, basis: str, n: int) -> "Functional":
        return cls(basis, (Fraction(0),) * n)

    def _check(self, other: "Functional"):
        if not isinstance(other, Functional):
            raise TypeError("expected a Functional")
        if other.basis != self.basis:
            raise ValueError(f"mixed bases {self.basis} and {other.basis}")
        if other.n != self.n:
            raise ValueError("functionals of different rank")

    def __add__(self, other: "Functional") -> "Functional":
        self._check(other)
        return Functional(self.basis, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Functional") -> "Functional":
        return self + (-other)

    def __neg__(self) -> "Functional":
        return Functional(self.basis, tuple(-a for a in self.coeffs))

    def __mul__(self, scalar) -> "Functional":
        s = _as_fraction(scalar)
        return Functional(self.basis, tuple(s * a for a in self.coeffs))

    __rmul__ = __mul__

    def pair(self, other: "Functional") -> Fraction:
        self._check(other)
        return sum((a * b for a, b in zip(self.coeffs, other.coeffs)), Fraction(0))

    def evaluate(self, diagonal: Sequence) -> Fraction:
        """Value on the diagonal matrix with the given (trace-zero) entries."""
        if len(diagonal) != self.n:
            raise ValueError("dimension mismatch")
        d = [_as_fraction(x) for x in diagonal]
        if sum(d, Fraction(0)) != 0:
            raise ValueError("diagonal element must have trace zero")
        return sum((a * b for a, b in zip(self.coeffs, d)), Fraction(0))


def pair(a: Functional, b: Functional) -> Fraction:
    return a.pair(b)


@dataclass(frozen=True, order=True)
class Root:
    """The root ``b_i - b_j`` (1-based indices, ``i != j``)."""

    n: int
    i: int
    j: int
    basis: str = "E"

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        if not (1 <= self.i <= self.n and 1 <= self.j <= self.n) or self.i == self.j:
            raise ValueError(f"invalid root indices ({self.i}, {self.j}) for n={self.n}")

    @property
    def functional(self) -> Functional:
        c = [0] * self.n
        c[self.i - 1] = 1
        c[self.j - 1] = -1
        return Functional(self.basis, tuple(c))

    def __neg__(self) -> "Root":
        return Root(self.n, self.j, self.i, self.basis)

    def pair(self, other) -> Fraction:
        f = other.functional if isinstance(other, Root) else other
        return self.functional.pair(f)

    def __str__(self) -> str:
        b = self.basis.lower()
        return f"{b}{self.i}-{b}{self.j}"


def all_roots(n: int, basis: str = "E") -> list[Root]:
    return [Root(n, i, j, basis) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]


def half_sum(roots: Iterable[Root], n: int, basis: str) -> Functional:
    total = Functional.zero(basis, n)
    for r in roots:
        if r.basis != basis or r.n != n:
            raise ValueError("root does not belong to the requested system")
        total = total + r.functional
    return total * Fraction(1, 2)


def _require_n(n: int):
    if not isinstance(n, int) or n < 3:
        raise ValueError(f"rank parameter n must be an integer >= 3, got {n!r}")


def h_positive_roots(n: int) -> list[Root]:
    """``e_i - e_j`` with ``2 <= i < j <= n-1``."""
    _require_n(n)
    return [Root(n, i, j, "E") for i in range(2, n) for j in range(i + 1, n)]


def h_positive_roots_bar(n: int) -> list[Root]:
    """``f_i - f_j`` with ``1 <= i < j <= n-1``."""
    _require_n(n)
    return [Root(n, i, j, "F") for i in range(1, n) for j in range(i + 1, n)]


def rho_h(n: int) -> Functional:
    _require_n(n)
    return half_sum(h_positive_roots(n), n, "E")


def rho_h_bar(n: int) -> Functional:
    _require_n(n)
    return half_sum(h_positive_roots_bar(n), n, "F")


def rho_pairing_table(alpha: Root, n: int) -> Fraction:
    """Closed-form value of ``<alpha, rho_h>`` (E) or ``<alpha, rho_h_bar>`` (F)."""
    _require_n(n)
    if alpha.n != n:
        raise ValueError("root rank does not match n")
    if alpha.i > alpha.j:
        return -rho_pairing_table(-alpha, n)
    i, j = alpha.i, alpha.j
    if alpha.basis == "E":
        if i >= 2 and j <= n - 1:
            return Fraction(j - i)
        if i == 1 and j <= n - 1:
            return Fraction(j) - Fraction(n + 1, 2)
        if i >= 2 and j == n:
            return Fraction(n + 1, 2) - i
        return Fraction(0)
    if j <= n - 1:
        return Fraction(j - i)
    return Fraction(n, 2) - i


def _swap_ends(n: int, idx: int) -> int:
    return n if idx == 1 else 1 if idx == n else idx


def sigma_root(alpha: Root) -> Root:
    """Action of the involution ``sigma`` on roots.

    On ``a`` it swaps ``e_1`` and ``e_n``; ``b`` is pointwise fixed so F-roots
    are unchanged.
    """
    if alpha.basis == "F":
        return alpha
    n = alpha.n
    return Root(n, _swap_ends(n, alpha.i), _swap_ends(n, alpha.j), "E")


def sigma_theta_root(alpha: Root) -> Root:
    """``sigma o theta`` on E-roots: ``e_1 -> -e_n``, ``e_i -> -e_i``, ``e_n -> -e_1``."""
    if alpha.basis != "E":
        raise ValueError("sigma-theta action defined here on E-roots only")
    n = alpha.n
    return Root(n, _swap_ends(n, alpha.j), _swap_ends(n, alpha.i), "E")


def longest_h_weyl(alpha: Root) -> Root:
    """Longest element of the Weyl group of ``Sigma_h``: reverses ``e_2, ..., e_{n-1}``."""
    if alpha.basis != "E":
        raise ValueError("defined on E-roots only")
    n = alpha.n

    def w(i):
        return i if i in (1, n) else n + 1 - i

    return Root(n, w(alpha.i), w(alpha.j), "E")
