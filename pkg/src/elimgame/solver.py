"""Numerical equilibrium of the binned game, with no use of the closed form.

The strategy space is cut into K equal bins represented by their midpoints;
players choosing the same bin are genuinely tied and the tie is broken
uniformly. Two stages:

1. Damped fictitious play from the uniform strategy, f <- (1-eta) f + eta BR(f)
   with eta_t = 1/(t+2), the best response spread over all eps-optimal bins.
2. Indifference refinement. Fictitious play only reaches a coarse histogram,
   so its mean elimination rate E seeds a shooting method: for given E, the
   weights that make every bin from x = 0 upward exactly indifferent
   (win probability 1/N) are found bin by bin until the mass is used up, and
   E is tuned so the density has no atom at the origin.

The closed-form solution is consulted only by `compare_with_analytic`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import analytic
from .engine import tie_share

log = logging.getLogger(__name__)

MIN_BINS = 64


@dataclass
class DiscreteStrategy:
    grid: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.grid.shape != self.weights.shape:
            raise ValueError("grid and weights must have equal shapes")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")

    @classmethod
    def uniform(cls, bins: int):
        return cls(midpoints(bins), np.full(bins, 1.0 / bins))

    @property
    def bins(self) -> int:
        return len(self.grid)

    def first_moment(self) -> float:
        return float(self.weights @ self.grid)

    def density(self) -> np.ndarray:
        return self.weights * self.bins


@dataclass
class SolverReport:
    n_players: int
    bins: int
    iterations: int
    residual: float
    fp_residual: float
    converged: bool
    refined: bool
    first_moment: float
    support_edge_estimate: float
    l1_distance_to_analytic: float | None = None
    analytic_support_edge: float | None = None
    analytic_first_moment: float | None = None
    checkpoints: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def midpoints(bins: int) -> np.ndarray:
    return (np.arange(bins) + 0.5) / bins


def discrete_win_probs(n_players: int, f: DiscreteStrategy) -> np.ndarray:
    """Win probability of a deviator at every bin, O(K) via prefix sums."""
    return _win_probs(n_players, f.grid, f.weights)


def _win_probs(n_players, x, w):
    elim = float(w @ x)
    surv = w * (1.0 - x)
    below = np.cumsum(surv) - surv  # strictly lower bins only
    share = tie_share(elim + below, surv, n_players)
    return (1.0 - x) * share + x * elim ** (n_players - 1) / n_players


def discrete_win_prob(n_players: int, f: DiscreteStrategy, i: int) -> float:
    return float(discrete_win_probs(n_players, f)[i])


def discrete_gains(n_players: int, f: DiscreteStrategy) -> np.ndarray:
    return n_players * discrete_win_probs(n_players, f) - 1.0


def best_response_step(n_players: int, f: DiscreteStrategy, eps: float = 0.0):
    """Uniform distribution over the eps-optimal bins, and max gain."""
    g = discrete_gains(n_players, f)
    top = float(g.max())
    best = (g >= top - eps).astype(float)
    return DiscreteStrategy(f.grid, best / best.sum()), top


def fictitious_play(n_players: int, bins: int, max_iter: int, tol: float,
                    eps: float | None = None):
    """Averaged best-response iteration from the uniform strategy.

    Returns (strategy, residual, iterations, history) where history holds the
    residual at every iteration.
    """
    eps = tol / 10 if eps is None else eps
    x = midpoints(bins)
    w = np.full(bins, 1.0 / bins)
    history = []
    t = 0
    residual = np.inf
    for t in range(max_iter):
        g = n_players * _win_probs(n_players, x, w) - 1.0
        residual = float(g.max())
        history.append(residual)
        if residual <= tol:
            break
        br = (g >= residual - eps).astype(float)
        br /= br.sum()
        eta = 1.0 / (t + 2)
        w = (1.0 - eta) * w + eta * br
        w /= w.sum()
    return DiscreteStrategy(x, w), residual, t + 1, np.asarray(history)


def _indifferent_tie_mass(S, R, n):
    """Smallest T >= 0 with tie_share(S, T) = R (0 if already reached).

    Equivalent to the positive root of h(T) = (S+T)**n - S**n - n R T, which
    is convex with h(0) = 0, so Newton from T0 = (n R)**(1/(n-1)) (where
    h >= 0) descends monotonically onto it.
    """
    if S ** (n - 1) >= R:
        return 0.0
    T = (n * R) ** (1.0 / (n - 1))
    if S == 0.0:
        return T
    for _ in range(200):
        h = S**n * math.expm1(n * math.log1p(T / S)) - n * R * T
        dh = n * (S + T) ** (n - 1) - n * R
        step = h / dh
        if step <= 1e-16 * T:
            break
        T -= step
    return T


def indifference_march(n_players: int, grid: np.ndarray, elim: float) -> np.ndarray:
    """Weights making each bin from the left indifferent, given E = `elim`.

    The last bin receives whatever mass is left.
    """
    n = n_players
    w = np.zeros(len(grid))
    below = 0.0
    used = 0.0
    for i, xi in enumerate(grid):
        need = (1.0 / n - xi * elim ** (n - 1) / n) / (1.0 - xi)
        wi = _indifferent_tie_mass(elim + below, need, n) / (1.0 - xi)
        if used + wi >= 1.0:
            w[i] = 1.0 - used
            return w
        w[i] = wi
        used += wi
        below += wi * (1.0 - xi)
    w[-1] += 1.0 - w.sum()
    return w


def _origin_defect(n_players, grid, elim):
    # zero when bin 0 continues the density of bins 1..3 smoothly;
    # positive for an atom at the origin, negative when leading bins empty out
    w = indifference_march(n_players, grid, elim)
    if w[0] == 0.0:
        return -1.0 - float(np.argmax(w > 0))
    return float(w[0] - (3 * w[1] - 3 * w[2] + w[3])) * len(grid)


def refine(n_players: int, f: DiscreteStrategy, window: float = 0.02):
    """Shooting refinement of a fictitious-play iterate.

    Returns the refined strategy, or None if no bracket is found.
    """
    grid = f.grid
    center = f.first_moment()
    lo = max(center - window, 1e-9)
    hi = min(center + window, 1.0 - 1e-9)
    d_lo = _origin_defect(n_players, grid, lo)
    d_hi = _origin_defect(n_players, grid, hi)
    if not (d_lo > 0 > d_hi):
        log.warning("refinement bracket [%g, %g] has no sign change", lo, hi)
        return None
    elim = brentq(lambda e: _origin_defect(n_players, grid, e), lo, hi, xtol=1e-15)
    w = indifference_march(n_players, grid, elim)
    return DiscreteStrategy(grid, w / w.sum())


def support_edge_estimate(f: DiscreteStrategy) -> float:
    """Largest grid point carrying more than 1/(100 K) weight."""
    mask = f.weights > 1.0 / (100 * f.bins)
    return float(f.grid[mask].max()) if mask.any() else 0.0


def _dyadic_medians(history):
    # median residual over iteration windows [2^k, 2^(k+1))
    out = []
    k = 1
    while k < len(history):
        out.append([k, float(np.median(history[k:2 * k]))])
        k *= 2
    return out


def binned_analytic_weights(n_players: int, bins: int) -> np.ndarray:
    eq = analytic.make_equilibrium(n_players)
    edges = np.linspace(0.0, 1.0, bins + 1)
    return np.diff(analytic.cdf_closed_form(eq, edges))


def compare_with_analytic(report: SolverReport, f: DiscreteStrategy) -> SolverReport:
    eq = analytic.make_equilibrium(report.n_players)
    target = binned_analytic_weights(report.n_players, f.bins)
    report.l1_distance_to_analytic = float(np.abs(f.weights - target).sum())
    report.analytic_support_edge = eq.support_edge
    report.analytic_first_moment = eq.v_star
    return report


def find_equilibrium(n_players: int, bins: int, max_iter: int = 200_000,
                     tol: float = 5e-3, do_refine: bool = True):
    """Both solver stages, with no reference to the closed form."""
    if bins < MIN_BINS:
        raise ValueError(f"need at least {MIN_BINS} bins")
    if tol <= 0:
        raise ValueError("tol must be positive")
    f, fp_res, iters, history = fictitious_play(n_players, bins, max_iter, tol)
    checkpoints = _dyadic_medians(history)
    residual, refined = fp_res, False
    if do_refine and fp_res <= tol:
        g = refine(n_players, f)
        if g is not None:
            g_res = float(discrete_gains(n_players, g).max())
            if g_res <= fp_res:
                f, residual, refined = g, g_res, True
                checkpoints.append([iters, g_res])
    report = SolverReport(
        n_players=n_players,
        bins=bins,
        iterations=iters,
        residual=residual,
        fp_residual=fp_res,
        converged=residual <= tol,
        refined=refined,
        first_moment=f.first_moment(),
        support_edge_estimate=support_edge_estimate(f),
        checkpoints=checkpoints,
    )
    return f, report


def solve(n_players: int, bins: int = 2048, max_iter: int = 200_000, tol: float = 5e-3,
          do_refine: bool = True):
    f, report = find_equilibrium(n_players, bins, max_iter, tol, do_refine)
    if not report.converged:
        log.warning("no convergence after %d iterations (residual %.3g)",
                    report.iterations, report.residual)
    return f, compare_with_analytic(report, f)
