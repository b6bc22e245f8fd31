"""Periodized windows of growing length for a non-periodic system.

For a sampled or aperiodic A(t) the cyclic operator closes a finite window
into a circle. This reports how the unit-circle gap and the exponent gap
min |log|lambda|| / h move as the window grows; a stable trend is evidence,
not a verdict.

    python scripts/window_convergence.py [--h 0.1]
"""

import argparse
import math

import numpy as np

from evodich.propagator import SystemSpec, build_family
from evodich.semigroup import assemble_line, semigroup_spectrum


def example_spec(span: float) -> SystemSpec:
    # saddle with drifting rates: diag(-1 + 0.5 tanh(t - 3), 1 + 0.5 cos(sqrt 2 t))
    ts = np.linspace(-span, span, 1601)
    mats = [np.diag([-1 + 0.5 * math.tanh(t - 3), 1 + 0.5 * math.cos(math.sqrt(2) * t)]) for t in ts]
    return SystemSpec(2, "sampled", times=ts, matrices=mats, name="drifting_saddle")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.1)
    args = ap.parse_args()

    spec = example_spec(40.0)
    print(f"{'window':>16s} {'N':>5s} {'circle gap':>11s} {'exponent gap':>13s}")
    for half in (2.5, 5.0, 10.0, 20.0, 40.0):
        N = round(2 * half / args.h)
        fam = build_family(spec, -half, 2 * half / N, N)
        rep = semigroup_spectrum(assemble_line(fam, periodize=True))
        print(f"[{-half:6.1f}, {half:5.1f}] {N:5d} {rep.unit_circle_gap:11.4g} {rep.axis_gap:13.4g}")


if __name__ == "__main__":
    main()
