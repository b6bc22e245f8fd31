"""Spectra of a generator A and of e^{tA}.

Covers the finite-dimensional spectral mapping sigma(e^{tA}) = exp(t sigma(A)),
resolvent norms along the imaginary axis, the Fourier-multiplier inequality
for the periodic evolution semigroup, and the eigenvalue-level hyperbolicity
verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .propagator import expm

ON_AXIS_TOL = 1e-10


class EigenError(np.linalg.LinAlgError):
    pass


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    unit_circle_gap: float
    axis_gap: float
    pairing_distance: float = 0.0
    matched_pairs: list[tuple[complex, complex]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "unit_circle_gap": float(self.unit_circle_gap),
            "axis_gap": float(self.axis_gap),
            "pairing_distance": float(self.pairing_distance),
        }
        if self.meta:
            doc["meta"] = dict(self.meta)
        return doc


def eigenvalues(M) -> np.ndarray:
    """All eigenvalues of a dense square matrix (LAPACK Hessenberg + shifted QR)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"square matrix required, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("non-finite matrix entries")
    try:
        return np.linalg.eigvals(M).astype(np.complex128)
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigensolver did not converge: {exc}") from None


def unit_circle_gap(eigs) -> float:
    eigs = np.asarray(eigs)
    if eigs.size == 0:
        return math.inf
    return float(np.min(np.abs(1.0 - np.abs(eigs))))


def axis_gap(eigs) -> float:
    eigs = np.asarray(eigs)
    if eigs.size == 0:
        return math.inf
    return float(np.min(np.abs(eigs.real)))


def match_spectra(a, b) -> tuple[float, list[tuple[complex, complex]]]:
    """Optimal bipartite pairing of two equally sized multisets.

    Returns the largest pairing distance and the matched pairs.
    """
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.shape != b.shape:
        raise ValueError(f"multisets differ in size: {a.size} vs {b.size}")
    if a.size == 0:
        return 0.0, []
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    pairs = [(complex(a[r]), complex(b[c])) for r, c in zip(rows, cols)]
    return float(cost[rows, cols].max()), pairs


def pairing_distance(a, b) -> float:
    return match_spectra(a, b)[0]


def spectral_mapping_check(A, t: float) -> SpectrumReport:
    """Compare sigma(e^{tA}) with exp(t sigma(A)) as multisets."""
    if t == 0:
        raise ValueError("spectral_mapping_check needs t != 0")
    A = np.asarray(A)
    sig_A = eigenvalues(A)
    sig_exp = eigenvalues(expm(A, t))
    mapped = np.exp(t * sig_A)
    dist, pairs = match_spectra(sig_exp, mapped)
    return SpectrumReport(
        eigenvalues=sig_exp,
        unit_circle_gap=unit_circle_gap(sig_exp),
        axis_gap=axis_gap(sig_A),
        pairing_distance=dist,
        matched_pairs=pairs,
        meta={"t": float(t)},
    )


def smallest_singular_value(M) -> float:
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def resolvent_norm_on_axis(A, xi_values) -> list[float]:
    """||(A - i xi I)^{-1}|| for each xi; ``math.inf`` marks i xi in sigma(A)."""
    A = np.asarray(A)
    d = A.shape[0]
    scale = max(1.0, np.linalg.norm(A, 2))
    out = []
    for xi in xi_values:
        smin = smallest_singular_value(A - 1j * xi * np.eye(d))
        out.append(math.inf if smin <= ON_AXIS_TOL * scale else 1.0 / smin)
    return out


def trig_poly_lp_norm(coeffs: dict[int, np.ndarray], p: float, grid: int = 4096) -> float:
    """L_p([0, 2pi); E) norm of x -> sum_k y_k e^{-ikx}, trapezoid rule."""
    x = 2 * math.pi * np.arange(grid) / grid
    vals = 0
    for k, y in coeffs.items():
        vals = vals + np.exp(-1j * k * x)[:, None] * np.asarray(y)[None, :]
    pointwise = np.linalg.norm(vals, axis=1)
    return float((2 * math.pi / grid * np.sum(pointwise**p)) ** (1 / p))


def greiner_inequality_check(
    A, trials: int = 100, K: int = 4, p: float = 2.0, grid: int = 4096, seed: int = 0x5EED
) -> float:
    """Monte-Carlo lower estimate of the best constant C with

    || sum_k (A - ik)^{-1} y_k e^{-ikx} ||_p <= C || sum_k y_k e^{-ikx} ||_p

    over random finite sequences supported on |k| <= K. Single-mode
    sequences attaining ||(A - ik)^{-1}|| are always included, so the
    estimate never falls below max_k ||(A - ik)^{-1}||.
    """
    A = np.asarray(A)
    d = A.shape[0]
    ks = range(-K, K + 1)
    res = resolvent_norm_on_axis(A, list(ks))
    bad = [k for k, r in zip(ks, res) if math.isinf(r)]
    if bad:
        raise ValueError(f"ik lies in sigma(A) for k = {bad[0]}")
    resolvents = {k: np.linalg.inv(A - 1j * k * np.eye(d)) for k in ks}
    # single-mode probes along the top singular direction of each resolvent
    best = 0.0
    for k, R in resolvents.items():
        y = np.linalg.svd(R)[2][0].conj()
        ratio = trig_poly_lp_norm({k: R @ y}, p, grid) / trig_poly_lp_norm({k: y}, p, grid)
        best = max(best, ratio)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        support = rng.random(len(ks)) < 0.5
        if not support.any():
            support[rng.integers(len(ks))] = True
        ys = {
            k: rng.standard_normal(d) + 1j * rng.standard_normal(d)
            for k, keep in zip(ks, support)
            if keep
        }
        num = trig_poly_lp_norm({k: resolvents[k] @ y for k, y in ys.items()}, p, grid)
        den = trig_poly_lp_norm(ys, p, grid)
        best = max(best, num / den)
    return best


@dataclass
class Verdict:
    kind: str  # "stable" | "hyperbolic" | "on-axis"
    axis_gap: float


def hyperbolicity_verdict(A) -> Verdict:
    A = np.asarray(A)
    eigs = eigenvalues(A)
    gap = axis_gap(eigs)
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    if gap <= ON_AXIS_TOL * scale:
        return Verdict("on-axis", gap)
    if eigs.real.max() < 0:
        return Verdict("stable", gap)
    return Verdict("hyperbolic", gap)
