"""Closed-form symmetric equilibrium of the N-player elimination game.

The equilibrium density is

    f(x) = C / ((1 - x)**(3 - b) * (N - x)**b),    0 <= x <= a
    f(x) = 0,                                       a < x <= 1

with b = (N-2)/(N-1), C = N**(-2/(N-1)) and a = N/(N+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

QUAD_TOL = 1e-10
TABLE_SIZE = 1024
QUANTILE_TABLE_SIZE = 4096


class DomainError(ValueError):
    """Argument outside the domain on which a quantity is defined."""


@dataclass(frozen=True)
class NashEquilibrium:
    """Constants of the symmetric equilibrium for `n_players` players."""

    n_players: int
    b: float
    big_b: float
    c_norm: float
    support_edge: float
    v_star: float

    @property
    def exponent(self) -> float:
        """1/(N-1), the power that recurs in U and V."""
        return 1.0 / (self.n_players - 1)


@dataclass(frozen=True)
class ScalingProfile:
    xi: np.ndarray
    density: np.ndarray


def make_equilibrium(n_players: int) -> NashEquilibrium:
    if isinstance(n_players, bool) or int(n_players) != n_players:
        raise ValueError(f"n_players must be an integer, got {n_players!r}")
    n = int(n_players)
    if n < 2:
        raise ValueError(f"need at least two players, got {n}")
    return NashEquilibrium(
        n_players=n,
        b=(n - 2) / (n - 1),
        big_b=float(n - 1),
        c_norm=float(n) ** (-2.0 / (n - 1)),
        support_edge=n / (n + 1),
        v_star=float(n) ** (-1.0 / (n - 1)),
    )


def _check_unit(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise DomainError(f"{name} must lie in [0, 1]")
    return arr


def _unwrap(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def density(eq: NashEquilibrium, x):
    """Equilibrium density; the support is the closed interval [0, a]."""
    if isinstance(x, float):
        # scalar fast path for quadrature callbacks
        if not 0.0 <= x <= 1.0:
            raise DomainError("x must lie in [0, 1]")
        if x > eq.support_edge:
            return 0.0
        return eq.c_norm / ((1.0 - x) ** (3.0 - eq.b) * (eq.n_players - x) ** eq.b)
    arr = _check_unit(x)
    n, b = eq.n_players, eq.b
    inside = arr <= eq.support_edge
    xs = np.where(inside, arr, 0.0)
    out = eq.c_norm / ((1.0 - xs) ** (3.0 - b) * (n - xs) ** b)
    return _unwrap(np.where(inside, out, 0.0), x)


def u_star(eq: NashEquilibrium, x):
    """Closed-form U(x) for the equilibrium strategy (equals 1 above a)."""
    arr = _check_unit(x)
    n, a = eq.n_players, eq.support_edge
    xs = np.minimum(arr, a)
    ratio = ((1.0 - a) * (n - xs)) / ((1.0 - xs) * (n - a))
    out = np.where(arr <= a, ratio ** eq.exponent, 1.0)
    return _unwrap(out, x)


def _cdf_scalar(eq: NashEquilibrium, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= eq.support_edge:
        return 1.0
    val, _ = integrate.quad(
        lambda s: density(eq, s), 0.0, x, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200
    )
    return val


def cdf(eq: NashEquilibrium, x):
    """CDF by adaptive Gauss-Kronrod quadrature of the density."""
    arr = _check_unit(x)
    if arr.ndim == 0:
        return _cdf_scalar(eq, float(arr))
    return np.array([_cdf_scalar(eq, float(v)) for v in arr.ravel()]).reshape(arr.shape)


def _cdf_raw(eq: NashEquilibrium, x):
    # exact CDF for x in [0, a], no argument checks
    n, b = eq.n_players, eq.b
    r = (1.0 - x) / (n - x)

    def prim(r):
        return r ** (b - 2.0) / (b - 2.0) - r ** (b - 1.0) / (b - 1.0)

    return eq.c_norm / (n - 1) ** 2 * (prim(1.0 / n) - prim(r))


def _density_raw(eq: NashEquilibrium, x):
    return eq.c_norm / ((1.0 - x) ** (3.0 - eq.b) * (eq.n_players - x) ** eq.b)


def cdf_closed_form(eq: NashEquilibrium, x):
    """Exact CDF via the substitution r = (1-x)/(N-x).

    Under that change of variables f(x) dx = -C/(N-1)**2 (1-r) r**(b-3) dr,
    which integrates in elementary terms. Independent of the quadrature path
    in :func:`cdf`.
    """
    arr = _check_unit(x)
    xs = np.minimum(arr, eq.support_edge)
    out = np.where(arr >= eq.support_edge, 1.0, np.clip(_cdf_raw(eq, xs), 0.0, 1.0))
    return _unwrap(out, x)


def _bracketed_newton(eq, u, lo, hi, q, xtol, max_iter=100):
    """Newton on cdf(q) = u, falling back to bisection outside [lo, hi]."""
    for _ in range(max_iter):
        err = _cdf_raw(eq, q) - u
        lo = np.where(err < 0, q, lo)
        hi = np.where(err > 0, q, hi)
        nxt = q - err / np.maximum(_density_raw(eq, q), 1e-300)
        out = (nxt < lo) | (nxt > hi)
        nxt = np.where(out, 0.5 * (lo + hi), nxt)
        done = np.max(np.abs(nxt - q), initial=0.0) <= xtol
        q = nxt
        if done:
            break
    return q


@lru_cache(maxsize=64)
def _quantile_table(n_players: int):
    # quantile on a uniform u grid; bracketed first by a grid in x
    eq = make_equilibrium(n_players)
    xs = np.linspace(0.0, eq.support_edge, TABLE_SIZE + 1)
    fs = _cdf_raw(eq, xs)
    fs[0], fs[-1] = 0.0, 1.0
    us = np.linspace(0.0, 1.0, QUANTILE_TABLE_SIZE + 1)
    k = np.clip(np.searchsorted(fs, us, side="right") - 1, 0, TABLE_SIZE - 1)
    lo, hi = xs[k], xs[k + 1]
    q = _bracketed_newton(eq, us, lo, hi, 0.5 * (lo + hi), 1e-15)
    q[0], q[-1] = 0.0, eq.support_edge
    return q


def quantile(eq: NashEquilibrium, u, xtol: float = 1e-12):
    """Inverse CDF on [0, a].

    A cached table of the quantile on a uniform u grid gives both a bracket
    and a linear starting guess; safeguarded Newton polishes to `xtol`.
    """
    arr = _check_unit(u, "u")
    uu = np.atleast_1d(arr).astype(float).ravel()
    qt = _quantile_table(eq.n_players)
    m = QUANTILE_TABLE_SIZE
    pos = uu * m
    k = np.minimum(pos.astype(np.int64), m - 1)
    lo, hi = qt[k], qt[k + 1]
    q = lo + (pos - k) * (hi - lo)
    q = _bracketed_newton(eq, uu, lo, hi, q, xtol)
    q = np.where(uu <= 0.0, 0.0, np.where(uu >= 1.0, eq.support_edge, q))
    return _unwrap(q.reshape(np.shape(arr)), u)


def sample(eq: NashEquilibrium, rng: np.random.Generator, size=None):
    """Inverse-transform draws from the equilibrium strategy."""
    return quantile(eq, rng.random(size))


def scaling_density(xi):
    """Large-N limit profile 1/(1 - xi)**2 of the rescaled density."""
    arr = np.asarray(xi, dtype=float)
    if np.any(~(arr <= 0.0)):
        raise DomainError("xi must be <= 0")
    return _unwrap(1.0 / (1.0 - arr) ** 2, xi)


def rescaled_density(eq: NashEquilibrium, xi):
    """N**-1 f(a + xi/N); NaN where a + xi/N falls below 0."""
    arr = np.asarray(xi, dtype=float)
    if np.any(~(arr <= 0.0)):
        raise DomainError("xi must be <= 0")
    n = eq.n_players
    x = eq.support_edge + arr / n
    ok = x >= 0.0
    out = np.full(arr.shape, np.nan)
    out[ok] = np.asarray(density(eq, x[ok])) / n
    return _unwrap(out, xi)


def scaling_profile(xi) -> ScalingProfile:
    arr = np.asarray(xi, dtype=float)
    return ScalingProfile(xi=arr, density=np.asarray(scaling_density(arr)))


def mean_elimination_fraction(eq: NashEquilibrium) -> float:
    """Average elimination probability <x>, which equals V* at equilibrium."""
    return eq.v_star


def first_moment_quadrature(eq: NashEquilibrium) -> float:
    val, _ = integrate.quad(
        lambda s: s * density(eq, s), 0.0, eq.support_edge,
        epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200,
    )
    return val


def _derivatives(fn, x, h):
    f2m, f1m, f0, f1p, f2p = (fn(x + k * h) for k in (-2, -1, 0, 1, 2))
    d1 = (f2m - 8.0 * f1m + 8.0 * f1p - f2p) / (12.0 * h)
    d2 = (-f2m + 16.0 * f1m - 30.0 * f0 + 16.0 * f1p - f2p) / (12.0 * h * h)
    return f0, d1, d2


def _check_stencil(eq, x, h):
    arr = np.asarray(x, dtype=float)
    if h <= 0 or np.any(arr - 2 * h <= 0.0) or np.any(arr + 2 * h >= eq.support_edge):
        raise DomainError("finite-difference stencil must stay inside (0, a)")
    return arr


def ode_residual(eq: NashEquilibrium, x, h: float = 1e-4, density_fn=None):
    """Residual of the second-order ODE obeyed by the equilibrium density.

    Checks (1-x) f = (N-2) d/dx [(1-x)**2 f**2 / (3f - (1-x) f')] using
    five-point central differences. For N = 2 the right-hand side vanishes
    identically and the linear first-order form (1-x) f' - 3f = 0 is used.
    `density_fn` overrides the density (for perturbation studies).
    """
    arr = _check_stencil(eq, x, h)
    fn = density_fn if density_fn is not None else (lambda s: np.asarray(density(eq, s)))
    f, fp, fpp = _derivatives(fn, arr, h)
    w = 1.0 - arr
    if eq.n_players == 2:
        return _unwrap(np.abs(w * fp - 3.0 * f), x)
    den = 3.0 * f - w * fp
    dden = 4.0 * fp - w * fpp
    num = w * w * f * f
    dnum = -2.0 * w * f * f + 2.0 * w * w * f * fp
    rhs = (eq.n_players - 2) * (dnum * den - num * dden) / den**2
    return _unwrap(np.abs(w * f - rhs), x)


def first_derivative_residual(eq: NashEquilibrium, x):
    """|d/dx of the indifference condition|, written with U* and f*."""
    arr = _check_unit(x)
    n = eq.n_players
    u = np.asarray(u_star(eq, arr))
    f = np.asarray(density(eq, arr))
    out = -(u ** (n - 1)) + (n - 1) * (1 - arr) ** 2 * f * u ** (n - 2) + eq.v_star ** (n - 1) / n
    return _unwrap(np.abs(out), x)


def second_derivative_residual(eq: NashEquilibrium, x, h: float = 1e-4):
    """|[-3f + (1-x) f'] U* + (N-2)(1-x)**2 f**2| with a finite-difference f'."""
    arr = _check_stencil(eq, x, h)
    f, fp, _ = _derivatives(lambda s: np.asarray(density(eq, s)), arr, h)
    u = np.asarray(u_star(eq, arr))
    out = (-3.0 * f + (1 - arr) * fp) * u + (eq.n_players - 2) * (1 - arr) ** 2 * f**2
    return _unwrap(np.abs(out), x)
