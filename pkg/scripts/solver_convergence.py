"""Numerical equilibrium for several N, compared with the closed form.

Reports fictitious-play iterations and residual, the refined residual, L1
distance to the binned closed-form density, support edge and first moment.
"""

import argparse
import json
import time

from elimgame import solver


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-list", default="2,3,5,10")
    p.add_argument("--bins", type=int, default=2048)
    p.add_argument("--tol", type=float, default=5e-3)
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--json", default=None, help="write all reports here")
    args = p.parse_args(argv)

    reports = []
    print(f"{'N':>3} {'iters':>7} {'fp res':>9} {'res':>9} {'L1':>9} "
          f"{'edge':>8} {'a':>8} {'<x>':>8} {'V*':>8} {'time':>6}")
    for n in (int(t) for t in args.n_list.split(",")):
        start = time.perf_counter()
        _, rep = solver.solve(n, args.bins, tol=args.tol, do_refine=not args.no_refine)
        dt = time.perf_counter() - start
        print(f"{n:>3} {rep.iterations:>7} {rep.fp_residual:>9.2e} {rep.residual:>9.2e} "
              f"{rep.l1_distance_to_analytic:>9.2e} {rep.support_edge_estimate:>8.5f} "
              f"{rep.analytic_support_edge:>8.5f} {rep.first_moment:>8.5f} "
              f"{rep.analytic_first_moment:>8.5f} {dt:>6.1f}")
        reports.append(rep.to_dict() | {"seconds": dt})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(reports, fh, indent=2)


if __name__ == "__main__":
    main()
