#!/usr/bin/env python3
"""Scattering lengths of the corpus with their certified brackets and convergence history."""

import argparse
import sys

from scatlen import corpus
from scatlen.potential import finiteness_check
from scatlen.scatter import scattering_length


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--history", action="store_true", help="print (R, a_lo, a_hi) per iteration")
    args = p.parse_args(argv)
    print(f"{'potential':<16} {'a':>16} {'a_lo':>16} {'a_hi':>16} {'R_used':>10} {'a_upper(fin)':>14}")
    for name, (V, d) in corpus.corpus().items():
        lim = scattering_length(V, d, tol=args.tol)
        fin = finiteness_check(V, d)
        up = fin.a_upper_3d if d == 3 else fin.a_upper_2d
        lo, hi = lim.bracket
        print(f"{name:<16} {lim.a:>16.12f} {lo:>16.12f} {hi:>16.12f} {lim.R_used:>10.3g} {up:>14.6g}")
        if args.history:
            for R, a_lo, a_hi in lim.history:
                print(f"    R={R:<12.4g} [{a_lo:.12f}, {a_hi:.12f}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
