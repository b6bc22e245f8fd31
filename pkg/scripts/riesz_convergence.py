"""Error of the trapezoid contour projection against the eigenprojection as Q doubles.

    python scripts/riesz_convergence.py [--system vinograd_1.5] [-N 32]
"""

import argparse
import math

import numpy as np

from evodich.dichotomy import eigenprojection, extract_pointwise_projections, riesz_projection
from evodich.gallery import default_gallery
from evodich.propagator import build_family
from evodich.semigroup import assemble_line, semigroup_spectrum


def main():
    names = [g.name for g in default_gallery()]
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--system", default="vinograd_1.5", choices=names)
    ap.add_argument("-N", type=int, default=32)
    ap.add_argument("--qmax", type=int, default=1024)
    args = ap.parse_args()

    g = next(s for s in default_gallery() if s.name == args.system)
    period = 2 * math.pi if g.spec.kind == "constant" else g.spec.period
    T = assemble_line(build_family(g.spec, 0.0, period / args.N, args.N))
    gap = semigroup_spectrum(T).unit_circle_gap
    print(f"{g.name}: N = {T.N}, d = {T.d}, unit-circle gap = {gap:.4g}")
    if gap < 1e-6:
        print("spectrum touches the unit circle; no contour projection")
        return
    ref = eigenprojection(T)
    print(f"{'Q':>6s} {'||P_Q - P_eig||':>16s} {'||P^2 - P||':>12s} {'off-block':>10s}")
    Q = 8
    while Q <= args.qmax:
        P = riesz_projection(T, Q)
        err = np.linalg.norm(P - ref, 2)
        idem = np.linalg.norm(P @ P - P, 2)
        mass = extract_pointwise_projections(P, T.N, T.d).off_block_mass
        print(f"{Q:6d} {err:16.3e} {idem:12.3e} {mass:10.3e}")
        Q *= 2


if __name__ == "__main__":
    main()
