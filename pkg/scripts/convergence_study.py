#!/usr/bin/env python3
"""Grid-refinement study of the isospectrality checks.

Halves the spacing repeatedly and prints the worst level shift, partner
deviation and residual with the observed order between successive grids.
"""
import argparse
import math

from isodarboux.catalog import lookup, resolve_potential
from isodarboux.grid import build_grid
from isodarboux.verify import isospectrality_report


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--potential", default="oscillator")
    p.add_argument("--lambdas", type=float, nargs="+", default=[0.5, 1, 5, -2])
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--start", type=int, default=251, help="node count of the coarsest grid")
    p.add_argument("--steps", type=int, default=5)
    args = p.parse_args(argv)

    spec, base = lookup(args.potential)
    grid = build_grid(base.x_min, base.x_max, args.start)
    prev = None
    print(f"{'n':>7} {'max dE':>11} {'partner':>11} {'residual':>11} {'order(dE)':>10}")
    for _ in range(args.steps):
        V, u0 = resolve_potential(spec, grid)
        r = isospectrality_report(V, args.lambdas, args.levels, u0=u0, potential_id=spec.name)
        row = (r.max_spectrum_delta(), max(r.partner_deviation.values()), max(r.gs_residual.values()))
        order = ""
        if prev and row[0] > 0 and prev[0] > 0:
            order = f"{math.log2(prev[0] / row[0]):.2f}"
        print(f"{grid.n:>7} {row[0]:>11.3e} {row[1]:>11.3e} {row[2]:>11.3e} {order:>10}")
        prev, grid = row, grid.refined()


if __name__ == "__main__":
    main()
