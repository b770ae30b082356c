"""Equilibrium densities for several player counts on a common grid (CSV)."""

import argparse
import sys

import numpy as np

from elimgame import analytic


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-list", default="2,5,10,20")
    p.add_argument("--points", type=int, default=401)
    p.add_argument("--out", default="-")
    args = p.parse_args(argv)

    ns = [int(t) for t in args.n_list.split(",")]
    xs = np.linspace(0.0, 1.0, args.points)
    cols = [analytic.density(analytic.make_equilibrium(n), xs) for n in ns]
    header = "x," + ",".join(f"N={n}" for n in ns)
    data = np.column_stack([xs, *cols])
    fh = sys.stdout if args.out == "-" else open(args.out, "w")
    np.savetxt(fh, data, delimiter=",", header=header, comments="", fmt="%.10g")
    for n in ns:
        eq = analytic.make_equilibrium(n)
        print(f"N={n}: support [0, {eq.support_edge:.4f}], f(0)={analytic.density(eq, 0.0):.4f}, "
              f"<x>={eq.v_star:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
