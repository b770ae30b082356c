"""Rescaled densities N^-1 f(a + xi/N) against the large-N limit 1/(1-xi)^2.

Prints the gap at xi = 0 and the sup gap over [xi_min, 0] for each N; the gap
shrinks like 3/N.
"""

import argparse

import numpy as np

from elimgame import analytic


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-list", default="2,5,10,20,100,1000,10000")
    p.add_argument("--xi-min", type=float, default=-10.0)
    p.add_argument("--points", type=int, default=2001)
    args = p.parse_args(argv)

    xi = np.linspace(args.xi_min, 0.0, args.points)
    limit = analytic.scaling_density(xi)
    print(f"{'N':>6} {'f/N at 0':>10} {'sup gap':>10} {'N * gap':>8}")
    for n in (int(t) for t in args.n_list.split(",")):
        r = analytic.rescaled_density(analytic.make_equilibrium(n), xi)
        gap = np.nanmax(np.abs(r - limit))
        print(f"{n:>6} {r[-1]:>10.5f} {gap:>10.5f} {n * gap:>8.3f}")


if __name__ == "__main__":
    main()
