"""Acceptance criteria, each at its stated tolerance and runtime budget.

Run directly (``python tests/test_acceptance.py``) for a PASS/FAIL table, or
through pytest, where the same lines appear in the terminal summary.
"""

from __future__ import annotations

import json
import math
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from elimgame import analytic, cli, engine, montecarlo, response
from elimgame.engine import GameConfig

RESULTS: list[str] = []


@dataclass
class Outcome:
    ok: bool
    detail: str


def _players(lo, hi):
    return range(lo, hi + 1)


def indifference():
    worst = 0.0
    for n in _players(2, 10):
        eq = analytic.make_equilibrium(n)
        xs = np.linspace(0.0, eq.support_edge - 1e-9, 512)
        g = response.expected_gain(GameConfig(n), response.NashStrategy(eq), xs)
        worst = max(worst, float(np.abs(g).max()))
    return Outcome(worst <= 1e-5, f"max |gain| on support = {worst:.2e}")


def out_of_support():
    worst_gain, worst_err = -np.inf, 0.0
    for n in _players(2, 10):
        eq = analytic.make_equilibrium(n)
        xs = np.linspace(eq.support_edge, 1.0, 129)[1:]
        g = response.expected_gain(GameConfig(n), response.NashStrategy(eq), xs)
        worst_gain = max(worst_gain, float(g.max()))
        worst_err = max(worst_err, float(np.abs(g - (n * (1 - (1 - n**-2.0) * xs) - 1)).max()))
    return Outcome(worst_gain < 0 and worst_err <= 1e-9,
                   f"max gain = {worst_gain:.3f}, formula error = {worst_err:.1e}")


def oracle_equivalence():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for n in _players(2, 10):
        xs = rng.random((10_000, n))
        cfg = GameConfig(n)
        exact = np.array([engine.win_probability_exact(cfg, row) for row in xs])
        worst = max(worst, float(np.abs(exact - engine.win_probability_oracle_batch(n, xs)).max()))
    return Outcome(worst <= 1e-12, f"max |exact - oracle| = {worst:.1e}")


def two_player_regression():
    rng = np.random.default_rng(7)
    pairs = rng.random((1000, 2))
    cfg = GameConfig(2)
    err_pay = max(abs(engine.payoff_exact(cfg, p) - engine.payoff_n2_closed_form(*p)) for p in pairs)
    xs = np.linspace(0.0, 2 / 3, 10_001)
    err_f = float(np.abs(analytic.density(analytic.make_equilibrium(2), xs) - 1 / (4 * (1 - xs) ** 3)).max())
    return Outcome(err_pay <= 1e-15 and err_f <= 1e-15,
                   f"payoff error = {err_pay:.1e}, density error = {err_f:.1e}")


def constants():
    worst_cdf, worst_mean, worst_const = 0.0, 0.0, 0.0
    for n in _players(2, 64):
        eq = analytic.make_equilibrium(n)
        expect = (n / (n + 1), n ** (-2 / (n - 1)), n ** (-1 / (n - 1)))
        got = (eq.support_edge, eq.c_norm, eq.v_star)
        worst_const = max(worst_const, max(abs(a - b) for a, b in zip(got, expect)))
        # quadrature up to the last float below a, so the clamp is not what is tested
        worst_cdf = max(worst_cdf, abs(analytic.cdf(eq, np.nextafter(eq.support_edge, 0.0)) - 1.0))
        worst_mean = max(worst_mean, abs(analytic.first_moment_quadrature(eq) - eq.v_star))
    ok = worst_cdf <= 1e-8 and worst_mean <= 1e-7 and worst_const <= 1e-15
    return Outcome(ok, f"|cdf(a)-1| = {worst_cdf:.1e}, |<x>-V*| = {worst_mean:.1e}")


def ode_residual():
    worst = 0.0
    for n in _players(3, 10):
        eq = analytic.make_equilibrium(n)
        xs = np.linspace(0.05 * eq.support_edge, 0.95 * eq.support_edge, 100)
        worst = max(worst, float(np.max(analytic.ode_residual(eq, xs, 1e-4))))
    return Outcome(worst <= 1e-5, f"max residual = {worst:.1e}")


def _cli_solve(n, workdir):
    out = Path(workdir) / f"solve{n}.csv"
    status = cli.main(["solve", "--n", str(n), "--bins", "2048", "--out", str(out)])
    report = json.loads(Path(str(out) + ".report.json").read_text())
    weights = np.loadtxt(out, delimiter=",", skiprows=1)[:, 1]
    return status, report, weights


def solver_independence():
    bins = 2048
    parts, ok = [], True
    with tempfile.TemporaryDirectory() as tmp:
        for n, edge in ((3, 0.75), (2, 2 / 3)):
            status, rep, w = _cli_solve(n, tmp)
            good = (status == 0 and rep["residual"] <= 5e-3
                    and rep["l1_distance_to_analytic"] <= 0.05
                    and abs(rep["support_edge_estimate"] - edge) <= 2 / bins)
            if n == 2:
                # density in the bin nearest 0 against f*(0) = 1/4
                good &= abs(w[0] * bins - 0.25) <= 0.025
            ok &= good
            parts.append(f"N={n}: res {rep['residual']:.1e} L1 {rep['l1_distance_to_analytic']:.1e} "
                         f"edge {rep['support_edge_estimate']:.5f}")
        status, rep, w = _cli_solve(5, tmp)
        err = abs(rep["first_moment"] - 5 ** -0.25)
        ok &= status == 0 and rep["residual"] <= 5e-3 and err <= 1e-2
        parts.append(f"N=5: <x> error {err:.1e}")
    return Outcome(bool(ok), "; ".join(parts))


def monte_carlo():
    rounds, ok, worst = 10**6, True, 0.0
    for n in (2, 3, 5):
        eq = analytic.make_equilibrium(n)
        s = response.NashStrategy(eq)
        est = montecarlo.run_tournament(
            montecarlo.TournamentConfig(GameConfig(n, seed=0), rounds, [s] * n))
        z_gain = np.abs(est.mean_gain) / est.std_error
        z_elim = np.abs(est.elimination_rate - eq.v_star) / math.sqrt(eq.v_star * (1 - eq.v_star) / rounds)
        worst = max(worst, float(z_gain.max()), float(z_elim.max()))
        ok &= bool(np.all(z_gain <= 3) and np.all(z_elim <= 3))
    eq = analytic.make_equilibrium(3)
    strategies = [response.PureStrategy(0.9)] + [response.NashStrategy(eq)] * 2
    est = montecarlo.run_tournament(
        montecarlo.TournamentConfig(GameConfig(3, seed=0), rounds, strategies), stream=1)
    z_dev = abs(est.mean_gain[0] + 0.4) / est.std_error[0]
    ok &= z_dev <= 3
    return Outcome(bool(ok), f"max |z| at Nash = {worst:.2f}, deviation gain {est.mean_gain[0]:.4f} (z = {z_dev:.2f})")


def scaling_limit():
    eq = analytic.make_equilibrium(100)
    xi = np.linspace(-10.0, 0.0, 2001)
    sup = float(np.abs(analytic.rescaled_density(eq, xi) - analytic.scaling_density(xi)).max())
    at_zero = [analytic.rescaled_density(analytic.make_equilibrium(n), 0.0) for n in (2, 5, 10, 20)]
    ordered = all(a > b > 1.0 for a, b in zip(at_zero, at_zero[1:]))
    return Outcome(sup <= 0.02 and ordered,
                   f"sup gap at N=100 = {sup:.4f} (exact (101/100)^3 - 1 = {1.01**3 - 1:.4f}); "
                   f"ordering at xi=0 {'ok' if ordered else 'broken'}")


def large_n_expansion():
    worst = 0.0
    for n in (10**2, 10**3, 10**4):
        v = analytic.mean_elimination_fraction(analytic.make_equilibrium(n))
        worst = max(worst, abs(v - (1 - math.log(n) / n)) / (2 * math.log(n) ** 2 / n**2))
    return Outcome(worst <= 1.0, f"error / bound = {worst:.3f}")


# (id, title, budget in seconds or None, check)
CRITERIA = [
    (1, "indifference on the support", 5.0, indifference),
    (2, "out-of-support deficit", 1.0, out_of_support),
    (3, "oracle equivalence", 30.0, oracle_equivalence),
    (4, "two-player regression", None, two_player_regression),
    (5, "equilibrium constants", 10.0, constants),
    (6, "ODE residual", 1.0, ode_residual),
    (7, "solver independence", 120.0, solver_independence),
    (8, "Monte Carlo Nash check", 10.0, monte_carlo),
    (9, "scaling limit", 1.0, scaling_limit),
    (10, "large-N expansion", 1.0, large_n_expansion),
]

# criteria that cannot be met by the exact solution itself; see README
KNOWN_FAILURES = {9: "the gap at xi=0 is (1+1/N)^3 - 1 = 0.0303 > 0.02 for N = 100"}


def evaluate(cid, title, budget, check):
    start = time.perf_counter()
    outcome = check()
    elapsed = time.perf_counter() - start
    in_time = budget is None or elapsed < budget
    passed = outcome.ok and in_time
    limit = "" if budget is None else f" / {budget:g} s"
    line = (f"[{'PASS' if passed else 'FAIL'}] {cid:2d}. {title}: {outcome.detail} "
            f"({elapsed:.2f} s{limit})")
    return passed, line


def _param(c):
    marks = []
    if c[0] in KNOWN_FAILURES:
        marks.append(pytest.mark.xfail(reason=KNOWN_FAILURES[c[0]], strict=True))
    return pytest.param(*c, id=f"criterion{c[0]}", marks=marks)


@pytest.mark.parametrize("cid, title, budget, check", [_param(c) for c in CRITERIA])
def test_acceptance(cid, title, budget, check):
    passed, line = evaluate(cid, title, budget, check)
    RESULTS.append(line)
    print(line)
    assert passed, line


def main() -> int:
    failures = 0
    for c in CRITERIA:
        passed, line = evaluate(*c)
        print(line, flush=True)
        failures += not passed
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
