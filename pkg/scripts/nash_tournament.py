"""Monte Carlo check of the equilibrium: all-Nash gains and a deviation sweep.

For each N, plays `rounds` rounds with everyone on the equilibrium strategy,
then pins player 1 at each x of a grid and compares the empirical gain with
the exact expected gain.
"""

import argparse

import numpy as np

from elimgame import analytic, montecarlo, response
from elimgame.engine import GameConfig


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-list", default="2,3,5")
    p.add_argument("--rounds", type=int, default=1_000_000)
    p.add_argument("--sweep-points", type=int, default=11)
    p.add_argument("--sweep-rounds", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    args = p.parse_args(argv)

    for n in (int(t) for t in args.n_list.split(",")):
        eq = analytic.make_equilibrium(n)
        nash = response.NashStrategy(eq)
        cfg = GameConfig(n, seed=args.seed)
        est = montecarlo.run_tournament(
            montecarlo.TournamentConfig(cfg, args.rounds, [nash] * n), workers=args.threads)
        z = est.mean_gain / est.std_error
        print(f"N={n}: max |z| of gains {np.abs(z).max():.2f}, elimination rate "
              f"{est.elimination_rate.mean():.5f} vs V* {eq.v_star:.5f}")

        xs = np.linspace(0.0, 1.0, args.sweep_points)
        curve = montecarlo.deviation_sweep(cfg, nash, xs, args.sweep_rounds, workers=args.threads)
        exact = response.expected_gain(GameConfig(n), nash, xs)
        for x, g, se, e in zip(xs, curve.gain, curve.std_error, exact):
            print(f"   x={x:.2f}  gain {g:+.4f} +- {se:.4f}  exact {e:+.4f}")


if __name__ == "__main__":
    main()
