"""Matrices, involutions and the radial coordinate on X_n = SL(n,R)/H.

``H`` is the fixed-point group of ``sigma(g) = S g S^{-1}``.  Every point of
``X_n`` lies in ``K a_t H`` for a unique ``t >= 0``; the function
``radial`` returns ``2 cosh(4t)``, read off from the Hilbert-Schmidt norm of
``g sigma(g)^{-1}``.

Closed-form polynomials for ``2 cosh(4t)`` along the unipotent families used
by the integration engine live here too, each paired with a matrix route.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import mpmath as mp
import numpy as np


def _check_n(n: int):
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise ValueError(f"n must be an integer >= 3, got {n!r}")


def S_matrix(n: int) -> np.ndarray:
    _check_n(n)
    S = np.eye(n)
    S[0, 0] = S[n - 1, n - 1] = 0.0
    S[0, n - 1] = S[n - 1, 0] = -1.0
    return S


def kappa(n: int) -> np.ndarray:
    _check_n(n)
    r = 1.0 / np.sqrt(2.0)
    K = np.eye(n)
    K[0, 0] = K[0, n - 1] = K[n - 1, n - 1] = r
    K[n - 1, 0] = -r
    return K


def k0(n: int) -> np.ndarray:
    """Element of ``K ∩ H`` conjugating ``a_t`` to ``a_{-t}``."""
    _check_n(n)
    M = np.eye(n)
    M[0, 0] = M[n - 1, n - 1] = 0.0
    M[0, n - 1] = M[n - 1, 0] = 1.0
    M[1, 1] = -1.0
    return M


def a_t(n: int, t: float) -> np.ndarray:
    _check_n(n)
    d = np.ones(n)
    d[0], d[-1] = np.exp(t), np.exp(-t)
    return np.diag(d)


def _vec(v, length: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (length,):
        raise ValueError(f"{name} must have shape ({length},), got {v.shape}")
    return v


def u_xyz(x, y, z: float) -> np.ndarray:
    """``[[1, x^T, z], [0, I, y], [0, 0, 1]]`` with ``x, y`` in R^{n-2}."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0] + 2
    _check_n(n)
    y = _vec(y, n - 2, "y")
    U = np.eye(n)
    U[0, 1:-1] = x
    U[1:-1, -1] = y
    U[0, -1] = z
    return U


def v_xy(x, y, tol: float = 1e-12) -> np.ndarray:
    """``kappa exp([[0, x], [y^T, 0]]) kappa^{-1}`` for orthogonal ``x, y`` in R^{n-1}."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0] + 1
    _check_n(n)
    y = _vec(y, n - 1, "y")
    if abs(x @ y) > tol * (1.0 + np.linalg.norm(x) * np.linalg.norm(y)):
        raise ValueError("v_xy requires <x, y> = 0")
    E = np.eye(n)
    E[:-1, :-1] += 0.5 * np.outer(x, y)
    E[:-1, -1] = x
    E[-1, :-1] = y
    K = kappa(n)
    return K @ E @ K.T


def w_xyz(x, y, z: float) -> np.ndarray:
    """``exp`` of the nilpotent matrix with ``z`` at (1,n), ``y`` in column n, ``x^T`` in row n."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0] + 2
    _check_n(n)
    y = _vec(y, n - 2, "y")
    if abs(x @ y) > 1e-12 * (1.0 + np.linalg.norm(x) * np.linalg.norm(y)):
        raise ValueError("w_xyz requires <x, y> = 0")
    W = np.eye(n)
    W[0, 1:-1] = 0.5 * z * x
    W[0, -1] = z
    W[1:-1, 1:-1] += 0.5 * np.outer(y, x)
    W[1:-1, -1] = y
    W[-1, 1:-1] = x
    return W


def sigma(g: np.ndarray) -> np.ndarray:
    S = S_matrix(g.shape[-1])
    return S @ g @ S


def theta(g: np.ndarray) -> np.ndarray:
    return np.swapaxes(np.linalg.inv(g), -1, -2)


def radial(g: np.ndarray, tol: float = 1e-8) -> np.ndarray | float:
    """``2 cosh(4t)`` for ``g`` in ``K a_t H``; accepts stacks of matrices."""
    g = np.asarray(g, dtype=float)
    n = g.shape[-1]
    S = S_matrix(n)
    q = g @ S @ np.linalg.inv(g) @ S
    val = np.sum(q * q, axis=(-2, -1)) - (n - 2)
    if np.any(val < 2.0 - tol * np.maximum(1.0, np.abs(val))):
        raise ValueError("radial value below 2: input is not a valid group element")
    return float(val) if np.ndim(val) == 0 else val


def in_H(g: np.ndarray, tol: float = 1e-9) -> bool:
    """Membership in ``H = kappa S(GL(n-1) x GL(1)) kappa^{-1}``."""
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    K = kappa(n)
    c = K.T @ g @ K
    scale = max(1.0, np.abs(c).max())
    off = max(np.abs(c[:-1, -1]).max(), np.abs(c[-1, :-1]).max())
    return bool(off <= tol * scale and abs(np.linalg.det(g) - 1.0) <= tol * scale ** n)


def random_H(n: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.normal(size=(n - 1, n - 1)) + 2.0 * np.eye(n - 1)
    M = np.zeros((n, n))
    M[:-1, :-1] = A
    M[-1, -1] = 1.0 / np.linalg.det(A)
    K = kappa(n)
    return K @ M @ K.T


def random_K(n: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


# ---------------------------------------------------------------- closed forms

def _dot(a, b):
    return np.sum(a * b, axis=-1)


def cosh_rank1(x, y, z):
    """Polynomial for ``2 cosh 4t`` at ``u_{x,y,z}``; vectorised over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    p = _dot(x, y)
    xx = _dot(x, x)
    yy = _dot(y, y)
    m = 1.0 - z + p
    return (m * m * (1 + z) ** 2 + m * m * yy + (p - z) ** 2 + (1 + z) ** 2 * xx
            + 2 * p + xx * yy + xx + z * z + yy + 1.0)


def _support_slices(n: int, k: int, l: int):
    if not (2 <= k <= l <= n):
        raise ValueError(f"need 2 <= k <= l <= n, got {(n, k, l)}")
    return slice(k - 2, n - 2), slice(0, l - 2), slice(k - 2, l - 2)


def _check_support(v: np.ndarray, keep: slice, name: str, tol: float = 0.0):
    mask = np.ones(v.shape[-1], dtype=bool)
    mask[keep] = False
    if np.any(np.abs(v[..., mask]) > tol):
        raise ValueError(f"{name} violates the support constraint of the class")


def reduced_coefficients(k: int, l: int, y, z):
    """``(A, b, c)`` with ``2 cosh 4t = <x, A x> + <b, x> + c`` for x in the class support."""
    y = np.asarray(y, dtype=float)
    n = y.shape[-1] + 2
    _, ysl, psl = _support_slices(n, k, l)
    _check_support(y, ysl, "y")
    yy = float(y @ y)
    beta = yy + (1 + z) ** 2 + 1.0
    py = np.zeros(n - 2)
    py[psl] = y[psl]
    A = beta * (np.eye(n - 2) + np.outer(py, py))
    b = 2.0 * (1 - z) * beta * py
    c = (1 - z) ** 2 * beta + (z * z + 2 * z + yy)
    return A, b, c


def cosh_rank1_reduced(k: int, l: int, x, y, z: float) -> float:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] + 2
    xsl, _, _ = _support_slices(n, k, l)
    _check_support(x, xsl, "x")
    A, b, c = reduced_coefficients(k, l, y, z)
    return float(x @ A @ x + b @ x + c)


def completed_square(n: int, k: int, l: int, yy, pp, z):
    """``(c', J)`` from ``|y|^2``, ``|pi(y)|^2`` and ``z``; vectorised.

    After the affine substitution ``x -> x'`` on the x-support,
    ``2 cosh 4t = |x'|^2 + c'`` and ``dx = J dx'``.
    """
    yy = np.asarray(yy, dtype=float)
    pp = np.asarray(pp, dtype=float)
    z = np.asarray(z, dtype=float)
    beta = yy + (1 + z) ** 2 + 1.0
    cprime = (1 - z) ** 2 * beta / (1 + pp) + z * z + 2 * z + yy
    jac = beta ** ((k - n) / 2.0) / np.sqrt(1 + pp)
    return cprime, jac


def shifted_x(k: int, l: int, x, y, z: float) -> np.ndarray:
    """The completed-square coordinate ``x'`` on the x-support."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] + 2
    xsl, _, _ = _support_slices(n, k, l)
    A, b, _ = reduced_coefficients(k, l, y, z)
    As = A[xsl, xsl]
    x0 = -0.5 * np.linalg.solve(As, b[xsl])
    L = np.linalg.cholesky(As)
    return L.T @ (x[xsl] - x0)


def cprime_lower_bound(vv, ww, z):
    """The product-form lower estimate for ``c'`` with ``y = (v, w, 0)``."""
    return (0.25 / (ww + 1) * ((1 - z) ** 2 + 1) * (vv + (1 + z) ** 2 + 1) + ww + 1)


def cosh_rank0(x, y, tol: float = 1e-10):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    p = _dot(x, y)
    xx = _dot(x, x)
    yy = _dot(y, y)
    if np.any(np.abs(p) > tol * (1 + np.sqrt(xx * yy))):
        raise ValueError("cosh_rank0 requires orthogonal x and y")
    return 2 + 4 * xx + 4 * yy + 4 * xx * yy


def f_triple(s, z):
    """``(f1, f2, f3)`` of the parabolic-translate polynomial."""
    s = np.asarray(s, dtype=float)
    z = np.asarray(z, dtype=float)
    e2 = np.exp(2 * s)
    f1 = e2 * e2 * ((1 - z) * (1 + z)) ** 2 + 1.0 / (e2 * e2) + 2 * z * z
    f2 = e2 * (1 + z) ** 2 + 1.0 / e2
    f3 = e2 * (1 - z) ** 2 + 1.0 / e2
    return f1, f2, f3


def f_triple_exact(q: Fraction, z: Fraction) -> tuple[Fraction, Fraction, Fraction]:
    """Same polynomials with ``q = e^{2s}`` rational, in exact arithmetic."""
    q, z = Fraction(q), Fraction(z)
    f1 = q * q * ((1 - z) * (1 + z)) ** 2 + 1 / (q * q) + 2 * z * z
    f2 = q * (1 + z) ** 2 + 1 / q
    f3 = q * (1 - z) ** 2 + 1 / q
    return f1, f2, f3


def cosh_hc(s, x, y, z):
    """``2 cosh 4t`` at ``a_s u`` with ``x`` in R^{n-k}, ``y`` in R^{k-2}."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    f1, f2, f3 = f_triple(s, z)
    xx = _dot(x, x)
    yy = _dot(y, y)
    return f1 + f2 * xx + f3 * yy + xx * yy


def embed_hc(n: int, k: int, x, y, z: float) -> np.ndarray:
    """``u_{x~, y~, z}`` with ``x~ = (0^{k-2}, x)`` and ``y~ = (y, 0^{n-k})``."""
    xt = np.zeros(n - 2)
    yt = np.zeros(n - 2)
    xt[k - 2:] = x
    yt[:k - 2] = y
    return u_xyz(xt, yt, z)


# ------------------------------------------------------------ orbit limits

def _mp_S(n):
    M = mp.eye(n)
    M[0, 0] = M[n - 1, n - 1] = 0
    M[0, n - 1] = M[n - 1, 0] = -1
    return M


def _mp_kappa(n):
    r = 1 / mp.sqrt(2)
    M = mp.eye(n)
    M[0, 0] = M[0, n - 1] = M[n - 1, n - 1] = r
    M[n - 1, 0] = -r
    return M


def _mp_q(g, S):
    return g * S * mp.inverse(g) * S


def orbit_limit_check(n: int, xi: Sequence[float], eta: Sequence[float], omega: float,
                      s_grid: Sequence[float], limit_scale: float = 0.5,
                      dps: int = 50) -> list[float]:
    """Hilbert-Schmidt distances between ``A_s sigma(A_s)^{-1}`` and ``B sigma(B)^{-1}``.

    ``A_s = a_s u(e^s xi, e^{-s} eta, e^{-2s} omega - 1)`` and
    ``B = kappa^{-1} v_{X, Y}`` with ``X = (omega, eta_head)`` and
    ``Y = limit_scale * xi_tail``.  Evaluated in multiprecision because the
    matrices involved carry entries of size ``e^{2s}``.
    """
    _check_n(n)
    if n % 2 == 0:
        raise ValueError("orbit limit is defined for odd n")
    h = (n - 3) // 2
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if xi.shape != (n - 2,) or eta.shape != (n - 2,):
        raise ValueError("xi and eta must lie in R^{n-2}")
    if np.any(xi[:h] != 0) or np.any(eta[h:] != 0):
        raise ValueError("xi or eta violates the support constraint")
    with mp.workdps(dps):
        S = _mp_S(n)
        K = _mp_kappa(n)
        X = [mp.mpf(omega)] + [mp.mpf(t) for t in eta[:h]] + [mp.mpf(0)] * (n - 1 - (h + 1))
        Y = [mp.mpf(0)] * (h + 1) + [mp.mpf(limit_scale) * mp.mpf(t) for t in xi[h:]]
        E = mp.eye(n)
        for i in range(n - 1):
            for j in range(n - 1):
                E[i, j] += X[i] * Y[j] / 2
            E[i, n - 1] = X[i]
            E[n - 1, i] = Y[i]
        B = E * K.T
        target = _mp_q(B, S)
        out = []
        for s in s_grid:
            es = mp.e ** mp.mpf(s)
            U = mp.eye(n)
            for i in range(n - 2):
                U[0, i + 1] = es * mp.mpf(xi[i])
                U[i + 1, n - 1] = mp.mpf(eta[i]) / es
            U[0, n - 1] = mp.mpf(omega) / es ** 2 - 1
            A = mp.eye(n)
            A[0, 0] = es
            A[n - 1, n - 1] = 1 / es
            D = _mp_q(A * U, S) - target
            out.append(float(mp.mnorm(D, "f")))
    return out


def sl2_core_limit(s_grid: Sequence[float]) -> list[float]:
    """Distances from ``a_s n_{-1} sigma(a_s n_{-1})^{-1}`` to the rotation by pi/2 in SL(2)."""
    target = np.array([[0.0, -1.0], [1.0, 0.0]])
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = []
    for s in s_grid:
        g = np.array([[np.exp(s), -np.exp(s)], [0.0, np.exp(-s)]])
        sg = swap @ g @ swap
        sg_inv = np.array([[sg[1, 1], -sg[0, 1]], [-sg[1, 0], sg[0, 0]]])
        out.append(float(np.linalg.norm(g @ sg_inv - target)))
    return out
