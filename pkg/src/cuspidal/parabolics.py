"""Catalogue of minimal sigma-parabolic classes containing A = exp(a) or B = exp(b).

Rank-one classes are labelled by ``2 <= k <= l <= n``; rank-zero classes by
``1 <= k <= n``.  Each label determines a permutation ``tau`` of ``1..n``
whose induced ordering decides positivity: ``b_i - b_j`` is positive iff
``tau(i) < tau(j)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .roots import (
    Root,
    h_positive_roots,
    h_positive_roots_bar,
    half_sum,
    longest_h_weyl,
    rho_h,
    rho_h_bar,
    rho_pairing_table,
    sigma_root,
    sigma_theta_root,
)


class Rank(str, enum.Enum):
    SIGMA_RANK1 = "SigmaRank1"
    SIGMA_RANK0 = "SigmaRank0"


def _rank(rank) -> Rank:
    if isinstance(rank, Rank):
        return rank
    if rank in (1, "1", "SigmaRank1"):
        return Rank.SIGMA_RANK1
    if rank in (0, "0", "SigmaRank0"):
        return Rank.SIGMA_RANK0
    raise ValueError(f"unknown rank {rank!r}")


@dataclass(frozen=True)
class ParabolicClass:
    n: int
    rank: Rank
    k: int
    l: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "rank", _rank(self.rank))
        if not isinstance(self.n, int) or self.n < 3:
            raise ValueError(f"n must be an integer >= 3, got {self.n!r}")
        if self.rank is Rank.SIGMA_RANK1:
            if self.l is None or not (2 <= self.k <= self.l <= self.n):
                raise ValueError(f"rank-one label needs 2 <= k <= l <= n, got k={self.k}, l={self.l}")
        else:
            if self.l is not None:
                raise ValueError("rank-zero classes carry no l label")
            if not (1 <= self.k <= self.n):
                raise ValueError(f"rank-zero label needs 1 <= k <= n, got k={self.k}")

    @property
    def basis(self) -> str:
        return "E" if self.rank is Rank.SIGMA_RANK1 else "F"

    def label(self) -> str:
        if self.rank is Rank.SIGMA_RANK1:
            return f"P({self.k},{self.l})"
        return f"Q({self.k})"


@dataclass(frozen=True)
class PositiveSystem:
    roots: frozenset
    tau: tuple[int, ...]

    def __contains__(self, alpha: Root) -> bool:
        return alpha in self.roots

    def __len__(self) -> int:
        return len(self.roots)


def enumerate_classes(n: int, rank) -> list[ParabolicClass]:
    rank = _rank(rank)
    if not isinstance(n, int) or n < 3:
        raise ValueError(f"n must be an integer >= 3, got {n!r}")
    if rank is Rank.SIGMA_RANK1:
        return [ParabolicClass(n, rank, k, l) for k in range(2, n + 1) for l in range(k, n + 1)]
    return [ParabolicClass(n, rank, k) for k in range(1, n + 1)]


def _explicit_roots(c: ParabolicClass) -> set[Root]:
    n, k = c.n, c.k
    if c.rank is Rank.SIGMA_RANK1:
        l = c.l
        roots = set(h_positive_roots(n))
        roots.add(Root(n, 1, n))
        roots.update(Root(n, j, 1) for j in range(2, k))
        roots.update(Root(n, 1, j) for j in range(k, n))
        roots.update(Root(n, j, n) for j in range(2, l))
        roots.update(Root(n, n, j) for j in range(l, n))
        return roots
    roots = set(h_positive_roots_bar(n))
    roots.update(Root(n, i, n, "F") for i in range(1, k))
    roots.update(Root(n, n, i, "F") for i in range(k, n))
    return roots


def _tau_from_roots(roots: set[Root], n: int) -> tuple[int, ...]:
    below = [0] * n
    for r in roots:
        below[r.j - 1] += 1
    tau = tuple(b + 1 for b in below)
    if sorted(tau) != list(range(1, n + 1)):
        raise AssertionError("root set does not come from a linear ordering")
    return tau


def _tau_from_label(c: ParabolicClass) -> tuple[int, ...]:
    n = c.n
    if c.rank is Rank.SIGMA_RANK1:
        order: list[int] = []
        for idx in range(2, n):
            if idx == c.k:
                order.append(1)
            if idx == c.l:
                order.append(n)
            order.append(idx)
        if c.k == n:
            order.append(1)
        if c.l == n:
            order.append(n)
    else:
        order = list(range(1, c.k)) + [n] + list(range(c.k, n))
    tau = [0] * n
    for pos, idx in enumerate(order, start=1):
        tau[idx - 1] = pos
    return tuple(tau)


def _labels_from_tau(tau: tuple[int, ...], rank: Rank) -> tuple[int, Optional[int]]:
    n = len(tau)
    t = lambda i: tau[i - 1]  # noqa: E731
    if rank is Rank.SIGMA_RANK0:
        return t(n), None
    ks = [k for k in range(2, n + 1) if t(k - 1) <= t(1) < t(k)]
    ls = [l for l in range(2, n + 1) if t(l - 1) < t(n) <= t(l)]
    if len(ks) != 1 or len(ls) != 1:
        raise AssertionError(f"ordering {tau} is not in standard form")
    return ks[0], ls[0]


def positive_system(c: ParabolicClass) -> PositiveSystem:
    """Positive roots of the class, with the ordering permutation ``tau``.

    The root set is built from the explicit union description; ``tau`` is
    recovered from it, compared with the permutation read off the label, and
    inverted back to the label as a round-trip check.
    """
    roots = _explicit_roots(c)
    n = c.n
    if len(roots) != n * (n - 1) // 2:
        raise AssertionError("positive system has the wrong size")
    tau = _tau_from_roots(roots, n)
    basis = c.basis
    implied = {Root(n, i, j, basis) for i in range(1, n + 1) for j in range(1, n + 1)
               if i != j and tau[i - 1] < tau[j - 1]}
    if implied != roots or tau != _tau_from_label(c):
        raise AssertionError("root set and ordering disagree")
    if _labels_from_tau(tau, c.rank) != (c.k, c.l):
        raise AssertionError("label round-trip failed")
    return PositiveSystem(frozenset(roots), tau)


def _rho_reference(c: ParabolicClass):
    return rho_h(c.n) if c.rank is Rank.SIGMA_RANK1 else rho_h_bar(c.n)


def _compatible_by_sweep(c: ParabolicClass) -> bool:
    rho = _rho_reference(c)
    vals = [r.functional.pair(rho) for r in positive_system(c).roots]
    if c.rank is Rank.SIGMA_RANK1:
        return all(v >= 0 for v in vals)
    return all(v > 0 for v in vals)


def _compatible_closed_form(c: ParabolicClass) -> bool:
    n = c.n
    if c.rank is Rank.SIGMA_RANK1:
        return Fraction(n + 1, 2) <= c.k <= c.l <= Fraction(n + 3, 2)
    return n % 2 == 1 and c.k == (n + 1) // 2


def is_h_compatible(c: ParabolicClass) -> bool:
    sweep = _compatible_by_sweep(c)
    closed = _compatible_closed_form(c)
    if sweep != closed:
        raise AssertionError(f"compatibility routes disagree for {c}")
    return sweep


def is_p_star(c: ParabolicClass) -> bool:
    """Whether the class lies in the family whose Levi is contained in ``Z_G(A)``."""
    if c.rank is not Rank.SIGMA_RANK1:
        raise ValueError("P_* membership is defined for rank-one classes only")
    return c.k == c.l


def dims(c: ParabolicClass) -> tuple[int, int]:
    """``(dim n ∩ h, dim u)`` for rank one, ``(dim n ∩ h, dim n ∩ q)`` for rank zero.

    Counted from the positive system: each sigma-fixed root of h-type
    contributes one h-direction, and each pair ``{alpha, sigma alpha}`` of
    distinct positive roots contributes one more.
    """
    ps = positive_system(c)
    if c.rank is Rank.SIGMA_RANK0:
        hroots = set(h_positive_roots_bar(c.n))
        nh = sum(1 for r in ps.roots if r in hroots)
        return nh, len(ps) - nh
    fixed = sum(1 for r in ps.roots if sigma_root(r) == r)
    paired = sum(1 for r in ps.roots if sigma_root(r) != r and sigma_root(r) in ps.roots)
    nh = fixed + paired // 2
    return nh, len(ps) - nh


def dims_closed_form(c: ParabolicClass) -> tuple[int, int]:
    n, k = c.n, c.k
    if c.rank is Rank.SIGMA_RANK0:
        return (n - 1) * (n - 2) // 2, n - 1
    l = c.l
    return (n - 2) * (n - 3) // 2 + (k - 2) + (n - l), 1 + (l - 2) + (n - k)


def sigma_theta_dual(c: ParabolicClass) -> ParabolicClass:
    """Class of ``sigma theta (w . P)`` with ``w`` the longest element for ``Sigma_h``.

    The image is computed on root sets and identified against the catalogue;
    it agrees with ``(n+2-l, n+2-k)``.
    """
    if c.rank is not Rank.SIGMA_RANK1:
        raise ValueError("duality is defined here for rank-one classes")
    n = c.n
    image = frozenset(sigma_theta_root(longest_h_weyl(r)) for r in positive_system(c).roots)
    target = ParabolicClass(n, Rank.SIGMA_RANK1, n + 2 - c.l, n + 2 - c.k)
    if positive_system(target).roots != image:
        raise AssertionError(f"dual root set of {c.label()} is not {target.label()}")
    return target


def delta_p_exponent(c: ParabolicClass) -> Fraction:
    """Exponent ``c`` with ``delta_P(a_t) = e^{c t}`` for ``k = l``."""
    if c.rank is not Rank.SIGMA_RANK1 or c.k != c.l:
        raise ValueError("modular exponent is only defined for rank-one classes with k = l")
    n = c.n
    hq = [1] + [0] * (n - 2) + [-1]
    roots = positive_system(c).roots
    rho_p = half_sum(roots, n, "E")
    via_rho = (rho_p - rho_h(n)).evaluate(hq)
    hset = set(h_positive_roots(n))
    via_pairs = half_sum([r for r in roots if r not in hset], n, "E").evaluate(hq)
    if via_rho != via_pairs:
        raise AssertionError("modular exponent routes disagree")
    return via_rho


def pairing_profile(c: ParabolicClass) -> dict[str, Fraction]:
    """Map each positive root to its pairing with the reference rho (table route)."""
    return {str(r): rho_pairing_table(r, c.n) for r in sorted(positive_system(c).roots)}
