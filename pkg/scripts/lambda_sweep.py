#!/usr/bin/env python3
"""Sweep the deformation parameter over a catalog potential.

Prints one row per lambda: worst level shift, partner deviation, ground
state residual and distance to the singular band. Values inside the
excluded band are reported and skipped.
"""
import argparse

import numpy as np

from isodarboux.catalog import lookup, resolve_potential
from isodarboux.errors import SingularBandError
from isodarboux.schrodinger import compute_spectrum, discretize
from isodarboux.susy import deformed_potential
from isodarboux.verify import prepare_zero_mode


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--potential", default="oscillator")
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--lambdas", type=float, nargs="+",
                   default=[-10, -3, -1.5, -1.01, -0.5, 0.01, 0.1, 0.5, 1, 5, 50, 1e4])
    args = p.parse_args(argv)

    spec, grid = lookup(args.potential)
    V, u0 = resolve_potential(spec, grid)
    V_minus, zero = prepare_zero_mode(V, u0)
    parent = compute_spectrum(discretize(V_minus), args.levels).energies
    print(f"{'lambda':>10} {'max dE':>11} {'partner':>11} {'residual':>11} {'margin':>11}")
    for lam in args.lambdas:
        try:
            m = deformed_potential(V_minus, zero, lam)
        except SingularBandError:
            print(f"{lam:>10.4g} {'excluded band':>47}")
            continue
        dE = np.max(np.abs(compute_spectrum(discretize(m.potential), args.levels).energies - parent))
        d = m.diagnostics
        print(f"{lam:>10.4g} {dE:>11.3e} {d['partner_deviation']:>11.3e} "
              f"{d['gs_residual']:>11.3e} {d['singularity_margin']:>11.3e}")


if __name__ == "__main__":
    main()
