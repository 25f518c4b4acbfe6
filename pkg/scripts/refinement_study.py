#!/usr/bin/env python3
"""Track hunted constants as an interval discretization is refined.

For u(x) = x on n equispaced points of [0, 1], the three ball-inequality
constants (plain, dimension-sharp, and fractional with sequence gradients)
are hunted on a fixed radius grid as n doubles.  Stable columns indicate
the constants reflect the underlying continuum inequality rather than the
discretization.
"""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import fracmax as fm


def constants_at(n: int, s: float, radii: np.ndarray) -> tuple[float, float, float]:
    space = fm.interval_space(n)
    u = space.dist[0].copy()
    g = fm.canonical_gradient(space, u, s)
    plain = fm.check_poincare(space, u, g, s, 1.0, radii=radii)
    sharp = fm.check_sobolev_poincare(space, u, g, s, 1.0, Q=1.0, radii=radii)
    seq = fm.canonical_fractional_gradient(space, u, s)
    frac = fm.check_fractional_poincare(
        space, u, seq, s, 1.0, eps=0.2, eps_prime=0.3, ball_levels=range(-1, 5)
    )
    return plain.best_constant, sharp.best_constant, frac.best_constant


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--s", type=float, default=0.5, help="smoothness exponent")
    ap.add_argument("--min-n", type=int, default=16)
    ap.add_argument("--max-n", type=int, default=256)
    args = ap.parse_args()

    radii = np.array([0.5, 0.25, 0.125, 0.0625])
    print(f"u(x) = x on [0,1], s = {args.s}, radii {radii.tolist()}")
    print(f"{'n':>6s} {'plain':>12s} {'sharp':>12s} {'fractional':>12s}")
    prev = None
    n = args.min_n
    while n <= args.max_n:
        row = constants_at(n, args.s, radii)
        drift = ""
        if prev is not None:
            worst = max(
                abs(b - a) / a if a > 0 else 0.0 for a, b in zip(prev, row)
            )
            drift = f"   (max drift {100 * worst:.2f}%)"
        print(f"{n:6d} {row[0]:12.6f} {row[1]:12.6f} {row[2]:12.6f}{drift}")
        prev = row
        n *= 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
