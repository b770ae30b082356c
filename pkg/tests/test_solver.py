import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elimgame import engine, solver
from elimgame.engine import tie_share
from elimgame.solver import DiscreteStrategy


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 40), st.floats(1e-6, 1.0))
def test_tie_share_limit_continuity(n, S):
    assert tie_share(S, 1e-12, n) == pytest.approx(tie_share(S, 0.0, n), abs=1e-8)
    assert tie_share(S, 0.0, n) == pytest.approx(S ** (n - 1), rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 12), st.floats(0, 1), st.floats(1e-9, 1))
def test_tie_share_binomial_identity(n, S, T):
    from math import comb
    binom = sum(comb(n - 1, t) * T**t * S ** (n - 1 - t) / (t + 1) for t in range(n))
    assert tie_share(S, T, n) == pytest.approx(binom, rel=1e-10, abs=1e-300)


def test_tie_share_vectorized():
    S = np.array([0.0, 0.3, 0.5])
    T = np.array([0.2, 0.0, 1e-3])
    out = tie_share(S, T, 4)
    assert out.shape == (3,)
    assert out[0] == pytest.approx(0.2**3 / 4)


def test_discrete_win_prob_examples():
    atom = DiscreteStrategy([0.5, 0.6], [1.0, 0.0])
    assert solver.discrete_win_prob(2, atom, 0) == pytest.approx(0.5, abs=1e-15)
    assert solver.discrete_win_prob(2, atom, 1) == pytest.approx(0.55, abs=1e-15)
    above = DiscreteStrategy([0.0, 0.5, 0.9], [0.0, 0.4, 0.6])
    elim = 0.4 * 0.5 + 0.6 * 0.9
    for n in (2, 3, 6):
        assert solver.discrete_win_prob(n, above, 0) == pytest.approx(elim ** (n - 1), rel=1e-14)


def _exhaustive(n, f, i):
    # expectation of the brute-force oracle over every opponent bin assignment
    K = f.bins
    assignments = np.array(list(itertools.product(range(K), repeat=n - 1)))
    probs = np.prod(f.weights[assignments], axis=1)
    profiles = np.column_stack([np.full(len(assignments), f.grid[i]), f.grid[assignments]])
    return float(probs @ engine.win_probability_oracle_batch(n, profiles))


@pytest.mark.parametrize("n, K", [(2, 16), (3, 16), (4, 12), (5, 8), (6, 6)])
def test_discrete_matches_exhaustive_oracle(n, K):
    rng = np.random.default_rng(n * 100 + K)
    w = rng.random(K) ** 2
    w[rng.random(K) < 0.3] = 0.0
    w /= w.sum()
    f = DiscreteStrategy(solver.midpoints(K), w)
    fast = solver.discrete_win_probs(n, f)
    for i in range(K):
        assert fast[i] == pytest.approx(_exhaustive(n, f, i), abs=1e-10)


def test_discrete_strategy_validation():
    with pytest.raises(ValueError):
        DiscreteStrategy([0.25, 0.75], [0.5, 0.6])
    with pytest.raises(ValueError):
        DiscreteStrategy([0.25, 0.75], [1.5, -0.5])
    with pytest.raises(ValueError):
        DiscreteStrategy([0.25, 0.75], [1.0])


def test_best_response_binned_nash():
    f = DiscreteStrategy(solver.midpoints(4096), solver.binned_analytic_weights(3, 4096))
    _, residual = solver.best_response_step(3, f)
    assert residual <= 5e-3


def test_best_response_atom_moves_up():
    grid = solver.midpoints(64)
    w = np.zeros(64)
    w[np.searchsorted(grid, 0.5)] = 1.0
    f = DiscreteStrategy(grid, w)
    br, residual = solver.best_response_step(2, f)
    assert residual > 0
    assert br.weights[grid <= f.grid[w > 0][0]].sum() == 0.0


def test_best_response_uniform_not_equilibrium():
    _, residual = solver.best_response_step(4, DiscreteStrategy.uniform(128))
    assert residual > 0


@pytest.mark.parametrize("max_iter", [1, 2, 7, 50, 333])
def test_iterates_conserve_mass(max_iter):
    f, _, iters, history = solver.fictitious_play(3, 128, max_iter, 1e-9)
    assert iters == max_iter == len(history)
    assert abs(f.weights.sum() - 1.0) <= 1e-12
    assert np.all(f.weights >= 0)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_residual_trend_after_burn_in(n):
    _, report = solver.find_equilibrium(n, 256)
    late = [r for t, r in report.checkpoints if t >= 1024]
    assert len(late) >= 2
    assert all(b <= a for a, b in zip(late, late[1:]))
    assert report.residual >= 0


class _Forbidden:
    def __getattr__(self, name):
        raise AssertionError(f"solver touched analytic.{name}")


def test_solver_never_reads_closed_form(monkeypatch):
    monkeypatch.setattr(solver, "analytic", _Forbidden())
    f, report = solver.find_equilibrium(3, 128)
    assert report.converged
    assert report.l1_distance_to_analytic is None
    with pytest.raises(AssertionError):
        solver.compare_with_analytic(report, f)


@pytest.mark.parametrize("n, edge", [(2, 2 / 3), (3, 0.75), (5, 5 / 6)])
def test_small_grid_recovers_closed_form(n, edge):
    K = 256
    f, report = solver.solve(n, K)
    assert report.converged and report.refined
    assert report.residual <= 5e-3
    assert report.l1_distance_to_analytic <= 0.01
    assert abs(report.support_edge_estimate - edge) <= 2.0 / K
    assert abs(report.first_moment - n ** (-1 / (n - 1))) <= 1e-3


def test_fp_only_path():
    f, report = solver.solve(3, 128, do_refine=False)
    assert report.converged and not report.refined
    assert report.residual == report.fp_residual <= 5e-3


def test_nonconvergence_flagged():
    f, report = solver.solve(3, 128, max_iter=5)
    assert not report.converged
    assert report.iterations == 5
    assert abs(f.weights.sum() - 1) <= 1e-12


@pytest.mark.parametrize("bad", [dict(bins=32), dict(tol=0.0)])
def test_solve_preconditions(bad):
    args = dict(bins=128, tol=5e-3) | bad
    with pytest.raises(ValueError):
        solver.solve(3, args["bins"], tol=args["tol"])


def test_indifference_march_conserves_mass():
    grid = solver.midpoints(256)
    for elim in (0.3, 0.58, 0.9):
        w = solver.indifference_march(3, grid, elim)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(w >= 0)
