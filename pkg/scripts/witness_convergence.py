"""Glued-orbit witness: ||f||_p and ||Bf||_p against their bounds as the grid is refined.

For A with e^{2 pi A} y close to y the residual ||Bf|| stays below
(2 pi / 3) c eps plus a discretization term that vanishes with N.

    python scripts/witness_convergence.py [--omega 1.0] [--sigma 0.005] [-p 2]
"""

import argparse

import numpy as np

from evodich.semigroup import approximate_eigenfunction, witness_bounds


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--omega", type=float, default=1.0, help="rotation frequency")
    ap.add_argument("--sigma", type=float, default=0.005, help="real part of the eigenvalues")
    ap.add_argument("-p", type=float, default=2.0)
    args = ap.parse_args()

    A = np.array([[args.sigma, args.omega], [-args.omega, args.sigma]])
    y = np.array([1.0, 0.0])
    b = witness_bounds(A, y, args.p)
    print(f"eps = {b['eps']:.4g}, c = {b['c']:.4g}")
    print(f"lower bound for ||f||_p^p: {b['lower_norm_p']:.6f}; upper bound for ||Bf||_p: {b['upper_residual']:.6f}")
    print(f"{'N':>7s} {'||f||_p^p':>12s} {'||Bf||_p':>12s} {'ratio':>10s}")
    for N in (32, 64, 128, 256, 512, 1024, 2048, 4096):
        _, norm, resid = approximate_eigenfunction(A, y, N, args.p)
        print(f"{N:7d} {norm ** args.p:12.6f} {resid:12.6f} {resid / norm:10.3e}")


if __name__ == "__main__":
    main()
