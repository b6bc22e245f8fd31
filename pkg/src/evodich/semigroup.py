"""Discretized evolution semigroups as block weighted shifts.

On a grid of N cells with step h the operator (e^{hD} f)(x) = U(x, x-h) f(x-h)
becomes (T f)_j = W_j f_{j-1} with W_j = U(x_j, x_{j-1}). The cyclic boundary
identifies cell 0 with cell N (periodic functions); the zero boundary pads
with zeros (truncated window) and is nilpotent, so it is never used for
spectral verdicts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .propagator import EvolutionFamily, SpecError, expm
from .spectrum import SpectrumReport, eigenvalues, pairing_distance, unit_circle_gap

MAX_DENSE_SIZE = 4000


class SizeError(ValueError):
    pass


@dataclass
class BlockShiftOperator:
    """(T f)_j = W_j f_{j - shift}; ``weights[j]`` is W_{j+1} in 1-based terms."""

    weights: np.ndarray  # (N, d, d)
    boundary: str = "cyclic"
    h: float = 1.0
    shift: int = 1
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights)
        if self.weights.ndim != 3 or self.weights.shape[1] != self.weights.shape[2]:
            raise ValueError("weights must have shape (N, d, d)")
        if self.N < 2:
            raise ValueError("a block shift needs N >= 2 cells")
        if self.boundary not in ("cyclic", "zero"):
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @property
    def N(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.weights.shape[1]

    @property
    def size(self) -> int:
        return self.N * self.d

    def to_matrix(self) -> np.ndarray:
        N, d = self.N, self.d
        T = np.zeros((N * d, N * d), dtype=self.weights.dtype)
        for j in range(N):
            src = j - self.shift
            if self.boundary == "zero" and src < 0:
                continue
            src %= N
            T[j * d : (j + 1) * d, src * d : (src + 1) * d] = self.weights[j]
        return T

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Apply to block values of shape (N, d)."""
        f = np.asarray(f)
        src = np.roll(f, self.shift, axis=0)
        if self.boundary == "zero":
            src[: self.shift] = 0
        return np.einsum("jab,jb->ja", self.weights, src)

    def monodromy(self) -> np.ndarray:
        """W_N ... W_1."""
        out = np.eye(self.d, dtype=self.weights.dtype)
        for W in self.weights:
            out = W @ out
        return out

    def cycle_products(self) -> np.ndarray:
        """Diagonal blocks of T^N for the unit cyclic shift: W_j ... W_1 W_N ... W_{j+1}."""
        N = self.N
        out = []
        for j in range(N):
            acc = np.eye(self.d, dtype=self.weights.dtype)
            for k in range(j + 1, j + 1 + N):
                acc = self.weights[k % N] @ acc
            out.append(acc)
        return np.array(out)

    def composed(self, k: int) -> "BlockShiftOperator":
        """Operator with weights composed k at a time; equals T^k for the unit shift."""
        if self.shift != 1:
            raise ValueError("composition is defined from the unit shift")
        if k < 1:
            raise ValueError("k >= 1 required")
        N = self.N
        new = []
        for j in range(N):
            acc = np.eye(self.d, dtype=self.weights.dtype)
            for i in range(j - k + 1, j + 1):
                if self.boundary == "zero" and i < 0:
                    acc = np.zeros_like(acc)
                    continue
                acc = self.weights[i % N] @ acc
            new.append(acc)
        return BlockShiftOperator(np.array(new), self.boundary, self.h * k, shift=k)

    def to_csv(self) -> str:
        """Dense matrix, row-major, complex entries as ``re+imj``."""
        M = self.to_matrix()
        lines = []
        for row in M:
            if np.iscomplexobj(M):
                lines.append(",".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row))
            else:
                lines.append(",".join(f"{x:.17g}" for x in row))
        return "\n".join(lines) + "\n"


@dataclass
class GridFunction:
    values: np.ndarray  # (N, d)
    h: float
    p: float = 2.0

    def norm(self, p: float | None = None) -> float:
        p = self.p if p is None else p
        pointwise = np.linalg.norm(self.values, axis=1)
        return float((self.h * np.sum(pointwise**p)) ** (1 / p))


def assemble_periodic(A, N: int) -> BlockShiftOperator:
    """e^{hB} on 2pi-periodic functions, h = 2pi / N."""
    if N < 2:
        raise ValueError("N >= 2 required")
    h = 2 * math.pi / N
    W = expm(np.asarray(A), h)
    return BlockShiftOperator(np.array([W] * N), "cyclic", h)


def assemble_line(
    fam: EvolutionFamily, boundary: str = "cyclic", periodize: bool = False
) -> BlockShiftOperator:
    """e^{hD} with weights W_j = U(x_j, x_{j-1}) from an evolution family.

    A cyclic boundary needs a spec that is periodic with period N h. With
    ``periodize=True`` any window is closed up into a circle; this is an
    approximation of the line and is recorded in ``meta``.
    """
    meta = {"window": [float(fam.x0), float(fam.x0 + fam.N * fam.h)]}
    if boundary == "cyclic":
        period = fam.N * fam.h
        periodic = fam.spec is not None and fam.spec.is_periodic_with(period)
        if not periodic and not periodize:
            raise SpecError(
                f"cyclic boundary needs a spec periodic with period N*h = {period:.17g}"
            )
        meta["periodized"] = not periodic
    return BlockShiftOperator(np.array(fam.slices), boundary, fam.h, meta=meta)


def semigroup_spectrum(T: BlockShiftOperator) -> SpectrumReport:
    if T.boundary != "cyclic":
        raise ValueError("spectral verdicts use the cyclic boundary only (zero boundary is nilpotent)")
    if T.size > MAX_DENSE_SIZE:
        raise SizeError(f"N*d = {T.size} exceeds the dense limit {MAX_DENSE_SIZE}")
    eigs = eigenvalues(T.to_matrix())
    rot = pairing_distance(eigs, eigs * np.exp(2j * math.pi / T.N))
    meta = {"N": T.N, "d": T.d, "h": float(T.h), "rotation_invariance": rot}
    meta.update(T.meta)
    return SpectrumReport(
        eigenvalues=eigs,
        unit_circle_gap=unit_circle_gap(eigs),
        axis_gap=float(np.min(np.abs(np.log(np.abs(eigs) + 1e-300)))) / T.h,
        meta=meta,
    )


def cutoff(x: np.ndarray) -> np.ndarray:
    """Piecewise-linear ramp: 0 on [0, 2pi/3), 3x/(2pi) - 1 on [2pi/3, 4pi/3), 1 after."""
    x = np.asarray(x, dtype=float)
    lo, hi = 2 * math.pi / 3, 4 * math.pi / 3
    return np.where(x < lo, 0.0, np.where(x < hi, 3 * x / (2 * math.pi) - 1, 1.0))


def approximate_eigenfunction(A, y, N: int, p: float = 2.0):
    """Glued orbit f(x) = (1 - rho) e^{(2pi + x)A} y + rho e^{xA} y on [0, 2pi).

    Returns ``(f, ||f||_p, ||Bf||_p)`` with B = -d/dx + A discretized by
    periodic central differences.
    """
    A = np.asarray(A)
    y = np.asarray(y, dtype=np.result_type(A, np.asarray(y), float))
    y = y / np.linalg.norm(y)
    h = 2 * math.pi / N
    x = h * np.arange(N)
    rho = cutoff(x)
    E2pi = expm(A, 2 * math.pi)
    step = expm(A, h)
    vals = np.empty((N, A.shape[0]), dtype=np.result_type(A, y))
    orbit = y
    for j in range(N):
        # orbit = e^{x_j A} y
        vals[j] = (1 - rho[j]) * (E2pi @ orbit) + rho[j] * orbit
        orbit = step @ orbit
    f = GridFunction(vals, h, p)
    deriv = (np.roll(vals, -1, axis=0) - np.roll(vals, 1, axis=0)) / (2 * h)
    Bf = GridFunction(-deriv + vals @ A.T, h, p)
    return f, f.norm(), Bf.norm()


def witness_bounds(A, y, p: float = 2.0, samples: int = 4096) -> dict:
    """Constants of the gluing argument: eps, c and the two bounds on f.

    eps = ||e^{2pi A} y - y|| (y normalized), c = max_{[0,2pi)} ||e^{xA}|| on a
    sample grid; lower = (2pi/3) c^{-p} 2^{-p} bounds ||f||_p^p from below and
    upper = (2pi/3) c eps bounds ||Bf||_p from above (valid for eps < 1/2).
    """
    A = np.asarray(A)
    y = np.asarray(y) / np.linalg.norm(y)
    eps = float(np.linalg.norm(expm(A, 2 * math.pi) @ y - y))
    step = expm(A, 2 * math.pi / samples)
    P = np.eye(A.shape[0], dtype=step.dtype)
    c = 0.0
    for _ in range(samples):
        c = max(c, np.linalg.norm(P, 2))
        P = step @ P
    return {
        "eps": eps,
        "c": float(c),
        "lower_norm_p": (2 * math.pi / 3) * c ** (-p) * 2.0 ** (-p),
        "upper_residual": (2 * math.pi / 3) * c * eps,
    }


def change_of_variables_check(fam: EvolutionFamily, h_sample, t_steps: int = 1) -> float:
    """max | (J e^{tB} h - (I x e^{tD}) J h)(s_i, x_j) | on a doubly periodic grid.

    ``h_sample[i, j]`` holds h(s_i, x_j); both variables share the family's
    step, t = t_steps * h, and (J h)(s, x) = h(s + x, x).
    """
    h_sample = np.asarray(h_sample)
    N = fam.N
    if h_sample.ndim != 3 or h_sample.shape[:2] != (N, N) or h_sample.shape[2] != fam.d:
        raise ValueError(f"sample must have shape ({N}, {N}, {fam.d}), got {h_sample.shape}")
    m = int(t_steps)
    if m < 0:
        raise ValueError("t_steps must be >= 0")
    # U(x_j, x_j - t); slices[k] = U(x_{k+1}, x_k), indices mod N
    U = []
    for j in range(N):
        acc = np.eye(fam.d, dtype=fam.slices.dtype)
        for k in range(j - m, j):
            acc = fam.slices[k % N] @ acc
        U.append(acc)
    U = np.array(U)
    idx = np.arange(N)

    def J(g):
        return g[(idx[:, None] + idx[None, :]) % N, idx[None, :]]

    def semigroup_B(g):
        shifted = g[(idx - m) % N][:, (idx - m) % N]
        return np.einsum("jab,ijb->ija", U, shifted)

    def lifted_D(g):
        shifted = g[:, (idx - m) % N]
        return np.einsum("jab,ijb->ija", U, shifted)

    lhs = J(semigroup_B(h_sample))
    rhs = lifted_D(J(h_sample))
    return float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0
