"""Expected gain of a single deviator against a common opponent strategy.

Against N-1 opponents who all draw from f, a player choosing x wins with
probability

    P(x) = (1 - x) U(x)**(N-1) + x V**(N-1) / N,

where V = int s f(s) ds is the opponents' elimination probability and
U(x) = V + int_0^x (1 - s) f(s) ds is the probability that a single opponent
does not beat x. When f has an atom at x the first term is replaced by the
exact tie-splitting share (see `engine.tie_share`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import analytic
from .engine import GameConfig, tie_share

QUAD_TOL = 1e-10
MASS_TOL = 1e-9


class MixedStrategy:
    """A distribution on [0, 1] that the response functionals can integrate."""

    upper: float = 1.0

    def mass(self) -> float:
        raise NotImplementedError

    def first_moment(self) -> float:
        raise NotImplementedError

    def survive_below(self, x) -> np.ndarray:
        """int over [0, x) of (1 - s) f(s) ds, vectorized over x."""
        raise NotImplementedError

    def survive_at(self, x) -> np.ndarray:
        """(1 - x) times the point mass at exactly x."""
        return np.zeros(np.shape(x))

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError


class DensityStrategy(MixedStrategy):
    """Strategy given by a density callable supported on [0, upper]."""

    def __init__(self, pdf, upper: float = 1.0):
        self.pdf = pdf
        self.upper = float(upper)
        self._moments = None

    def _quad(self, fn, lo, hi):
        if hi <= lo:
            return 0.0
        val, _ = integrate.quad(fn, lo, hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
        return val

    def _compute_moments(self):
        if self._moments is None:
            m0 = self._quad(lambda s: self.pdf(s), 0.0, self.upper)
            m1 = self._quad(lambda s: s * self.pdf(s), 0.0, self.upper)
            self._moments = (m0, m1)
        return self._moments

    def mass(self):
        return self._compute_moments()[0]

    def first_moment(self):
        return self._compute_moments()[1]

    def survive_below(self, x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        clipped = np.minimum(xs, self.upper)
        # cumulative table over the sorted evaluation points: O(len(x)) quad calls
        order = np.argsort(clipped)
        pts = clipped[order]
        pieces = np.empty(len(pts))
        prev = 0.0
        for k, p in enumerate(pts):
            pieces[k] = self._quad(lambda s: (1.0 - s) * self.pdf(s), prev, p)
            prev = max(prev, p)
        out = np.empty(len(pts))
        out[order] = np.cumsum(pieces)
        return out.reshape(np.shape(x)) if np.ndim(x) else out[0]

    def sample(self, rng, size=None, table_size=4096):
        grid = np.linspace(0.0, self.upper, table_size + 1)
        pdf = np.asarray([self.pdf(g) for g in grid])
        cdf = integrate.cumulative_trapezoid(pdf, grid, initial=0.0)
        cdf /= cdf[-1]
        return np.interp(rng.random(size), cdf, grid)


class NashStrategy(DensityStrategy):
    """The closed-form equilibrium density, integrated numerically."""

    def __init__(self, eq: analytic.NashEquilibrium, scale: float = 1.0):
        self.eq = eq
        self.scale = float(scale)
        super().__init__(lambda s: self.scale * analytic.density(eq, s), eq.support_edge)

    def sample(self, rng, size=None):
        return analytic.sample(self.eq, rng, size)


class PureStrategy(MixedStrategy):
    """Point mass at `value`."""

    def __init__(self, value: float):
        if not 0.0 <= value <= 1.0:
            raise ValueError("pure strategy must lie in [0, 1]")
        self.value = float(value)
        self.upper = self.value

    def mass(self):
        return 1.0

    def first_moment(self):
        return self.value

    def survive_below(self, x):
        return np.where(np.asarray(x) > self.value, 1.0 - self.value, 0.0)

    def survive_at(self, x):
        return np.where(np.asarray(x) == self.value, 1.0 - self.value, 0.0)

    def sample(self, rng, size=None):
        return np.full(size if size is not None else (), self.value)


class GridStrategy(MixedStrategy):
    """Piecewise-linear density through (grid[i], values[i])."""

    def __init__(self, grid, values):
        g = np.asarray(grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or len(g) < 2:
            raise ValueError("grid and values must be equal-length 1-d arrays")
        if np.any(np.diff(g) <= 0) or g[0] < 0 or g[-1] > 1:
            raise ValueError("grid must be strictly increasing inside [0, 1]")
        if np.any(v < 0):
            raise ValueError("density values must be nonnegative")
        mass = np.trapezoid(v, g)
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"density integrates to {mass}, not 1")
        self.grid, self.values = g, v
        self.upper = float(g[-1])
        # cumulative int (1-s) f(s) ds at the nodes; integrand is quadratic per cell
        dx = np.diff(g)
        fa, fb = v[:-1], v[1:]
        ga, gb = 1 - g[:-1], 1 - g[1:]
        cell = dx / 6.0 * (2 * fa * ga + fa * gb + fb * ga + 2 * fb * gb)
        self._cum = np.concatenate([[0.0], np.cumsum(cell)])
        cell1 = dx / 6.0 * (2 * fa * g[:-1] + fa * g[1:] + fb * g[:-1] + 2 * fb * g[1:])
        self._moment = float(cell1.sum())

    @classmethod
    def uniform(cls, points: int = 2):
        return cls(np.linspace(0.0, 1.0, points), np.ones(points))

    def mass(self):
        return float(np.trapezoid(self.values, self.grid))

    def first_moment(self):
        return self._moment

    def _cell_integral(self, k, t):
        # int from grid[k] to grid[k]+t of (1-s)(fa + slope (s - grid[k])) ds
        a0, fa = self.grid[k], self.values[k]
        slope = (self.values[k + 1] - fa) / (self.grid[k + 1] - a0)
        return (1 - a0) * (fa * t + slope * t**2 / 2) - (fa * t**2 / 2 + slope * t**3 / 3)

    def survive_below(self, x):
        xs = np.clip(np.asarray(x, dtype=float), self.grid[0], self.grid[-1])
        k = np.clip(np.searchsorted(self.grid, xs, side="right") - 1, 0, len(self.grid) - 2)
        return self._cum[k] + self._cell_integral(k, xs - self.grid[k])

    def sample(self, rng, size=None):
        u = rng.random(size)
        g, v = self.grid, self.values
        cum = np.concatenate([[0.0], np.cumsum(np.diff(g) * (v[:-1] + v[1:]) / 2)])
        k = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(g) - 2)
        fa = v[k]
        slope = (v[k + 1] - fa) / (g[k + 1] - g[k])
        need = u - cum[k]
        # solve fa t + slope t^2 / 2 = need for t in the cell
        disc = np.sqrt(np.maximum(fa**2 + 2 * slope * need, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(np.abs(slope) > 1e-14, 2 * need / (fa + disc), need / fa)
        t = np.nan_to_num(t, nan=0.0)
        return np.clip(g[k] + t, g[k], g[k + 1])


@dataclass
class ResponseCurve:
    n_players: int
    x_values: np.ndarray
    win_prob: np.ndarray
    gain: np.ndarray = field(init=False)
    std_error: np.ndarray | None = None

    def __post_init__(self):
        self.x_values = np.asarray(self.x_values, dtype=float)
        self.win_prob = np.asarray(self.win_prob, dtype=float)
        self.gain = self.n_players * self.win_prob - 1.0


@dataclass
class EquilibriumReport:
    n_players: int
    max_indifference_violation: float
    max_out_of_support_gain: float
    nash_value: float
    total_mass: float
    passed: bool

    def to_dict(self):
        return {
            "n_players": self.n_players,
            "max_indifference_violation": self.max_indifference_violation,
            "max_out_of_support_gain": self.max_out_of_support_gain,
            "nash_value": self.nash_value,
            "total_mass": self.total_mass,
            "passed": self.passed,
        }


def v_functional(f: MixedStrategy) -> float:
    return float(f.first_moment())


def u_functional(f: MixedStrategy, x):
    xs = np.asarray(x, dtype=float)
    if np.any(~((xs >= 0) & (xs <= 1))):
        raise analytic.DomainError("x must lie in [0, 1]")
    out = v_functional(f) + np.asarray(f.survive_below(xs))
    return float(out) if np.ndim(x) == 0 else out


def expected_win_prob(cfg: GameConfig, f: MixedStrategy, x):
    xs = np.asarray(x, dtype=float)
    n = cfg.n_players
    v = v_functional(f)
    below = np.asarray(u_functional(f, xs))
    tied = np.asarray(f.survive_at(xs))
    out = (1.0 - xs) * tie_share(below, tied, n) + xs * v ** (n - 1) / n
    return float(out) if np.ndim(x) == 0 else out


def expected_gain(cfg: GameConfig, f: MixedStrategy, x):
    return cfg.n_players * expected_win_prob(cfg, f, x) - 1.0


def best_response_scan(cfg: GameConfig, f: MixedStrategy, grid_size: int):
    """Gain curve on a uniform grid of [0, 1] and its maximizer (smallest on ties)."""
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    xs = np.linspace(0.0, 1.0, grid_size)
    curve = ResponseCurve(cfg.n_players, xs, expected_win_prob(cfg, f, xs))
    return curve, float(xs[int(np.argmax(curve.gain))])


def verify_equilibrium(cfg: GameConfig, f: MixedStrategy, support_edge: float,
                       grid_size: int = 512, edge_margin: float = 1e-9,
                       indifference_tol: float = 1e-5) -> EquilibriumReport:
    """Check indifference on [0, edge) and a strict deficit on (edge, 1]."""
    if grid_size < 16:
        raise ValueError("grid_size must be >= 16")
    inside = np.linspace(0.0, support_edge - edge_margin, grid_size)
    g_in = np.asarray(expected_gain(cfg, f, inside))
    outside = np.linspace(support_edge, 1.0, grid_size + 1)[1:]
    if len(outside) and outside[-1] > support_edge:
        g_out = np.asarray(expected_gain(cfg, f, outside[outside > support_edge]))
        worst_out = float(g_out.max())
    else:
        worst_out = -np.inf
    mass = float(f.mass())
    violation = float(np.abs(g_in).max())
    passed = (violation <= indifference_tol and worst_out < 0.0
              and abs(mass - 1.0) <= MASS_TOL)
    return EquilibriumReport(
        n_players=cfg.n_players,
        max_indifference_violation=violation,
        max_out_of_support_gain=worst_out,
        nash_value=float(g_in.mean()),
        total_mass=mass,
        passed=bool(passed),
    )
