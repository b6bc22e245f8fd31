"""End-to-end equivalence checks and the gallery run.

Each check evaluates several conditions that must be simultaneously true or
simultaneously false, and returns an :class:`EquivalenceTable`. Margins below
``DEGENERATE_TOL`` but above ``FALSE_TOL`` are flagged degenerate rather than
counted either way.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dichotomy import (
    RankError,
    monodromy,
    projections_for_family,
    verify_dichotomy,
)
from .gallery import GallerySystem, default_gallery
from .propagator import SpecError, SystemSpec, build_family, expm
from .semigroup import (
    assemble_line,
    assemble_periodic,
    change_of_variables_check,
    semigroup_spectrum,
)
from .spectrum import eigenvalues, smallest_singular_value, unit_circle_gap

FALSE_TOL = 1e-9
DEGENERATE_TOL = 1e-6
DEFAULT_SEED = 0x5EED


@dataclass
class Condition:
    label: str
    margin: float

    @property
    def status(self) -> str:
        if self.margin <= FALSE_TOL:
            return "false"
        if self.margin < DEGENERATE_TOL:
            return "degenerate"
        return "true"

    @property
    def holds(self) -> bool | None:
        return {"true": True, "false": False}.get(self.status)


@dataclass
class EquivalenceTable:
    check: str
    system: str
    conditions: list[Condition]
    diagnostics: dict = field(default_factory=dict)
    diagnostics_ok: bool = True

    @property
    def degenerate(self) -> bool:
        return any(c.status == "degenerate" for c in self.conditions)

    @property
    def consistent(self) -> bool:
        return len({c.holds for c in self.conditions}) == 1

    @property
    def holds(self) -> bool | None:
        """Common verdict of all conditions, None when degenerate or mixed."""
        if self.degenerate or not self.consistent:
            return None
        return self.conditions[0].holds

    @property
    def status(self) -> str:
        if self.degenerate:
            return "degenerate"
        return "pass" if self.consistent and self.diagnostics_ok else "fail"

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "system": self.system,
            "status": self.status,
            "holds": self.holds,
            "conditions": [
                {"label": c.label, "verdict": c.status, "margin": c.margin} for c in self.conditions
            ],
            "diagnostics": dict(self.diagnostics),
        }

    def csv_rows(self) -> list[list]:
        return [[self.system, self.check, c.label, c.status, c.margin] for c in self.conditions]


def _frequency_cutoff(A) -> int:
    return math.ceil(np.linalg.norm(A, 2)) + 1


def check_periodic_semigroup(A, N: int = 16, name: str = "") -> EquivalenceTable:
    """1 in rho(e^{2pi A})  <=>  0 in rho(B)  <=>  1 in rho(e^{2pi B}) on 2pi-periodic functions.

    0 in rho(B) is decided by Fourier blocks: B = -d/dx + A maps e^{-ikx} y to
    e^{-ikx} (A + ik) y, and k ranges over all integers, so the margin is
    min_{|k| <= K} s_min(A - ik) with K = ceil(||A||) + 1; larger |k| are
    covered by ||(A - ik)^{-1}|| <= 1 / (|k| - ||A||).
    """
    if N < 8:
        raise ValueError("N >= 8 required")
    A = np.asarray(A)
    d = A.shape[0]
    mono = eigenvalues(expm(A, 2 * math.pi))
    c1 = float(np.min(np.abs(mono - 1)))
    K = _frequency_cutoff(A)
    c2 = min(smallest_singular_value(A - 1j * k * np.eye(d)) for k in range(-K, K + 1))
    lam = eigenvalues(assemble_periodic(A, N).to_matrix())
    c3 = float(np.min(np.abs(lam**N - 1)))
    return EquivalenceTable(
        "periodic_semigroup",
        name,
        [
            Condition("1 in resolvent set of exp(2 pi A)", c1),
            Condition("0 in resolvent set of B (periodic)", c2),
            Condition("1 in resolvent set of exp(2 pi B)", c3),
        ],
        {"K": K, "N": N},
    )


def check_line_semigroup(
    A, t: float = 1.0, N: int = 16, xi_window: float | None = None, samples: int = 2001, name: str = ""
) -> EquivalenceTable:
    """sigma(e^{tA}) misses the circle <=> 0 in rho(B) on the line <=> sigma(e^{tB}) misses it."""
    if not t > 0:
        raise ValueError("t > 0 required")
    A = np.asarray(A)
    d = A.shape[0]
    normA = float(np.linalg.norm(A, 2))
    if xi_window is None:
        xi_window = normA + 1
    if xi_window < normA + 1:
        raise ValueError(f"xi_window must be >= ||A|| + 1 = {normA + 1:.6g}")
    c1 = unit_circle_gap(eigenvalues(expm(A, t)))
    eigA = eigenvalues(A)
    xis = np.concatenate([np.linspace(-xi_window, xi_window, samples), eigA.imag])
    xis = xis[np.abs(xis) <= xi_window]
    sampled = min(smallest_singular_value(A - 1j * xi * np.eye(d)) for xi in xis)
    # |xi| > xi_window: s_min(A - i xi) >= |xi| - ||A|| >= 1
    c2 = min(sampled, xi_window - normA)
    T = assemble_periodic(A, N)
    T.weights[:] = expm(A, t)
    T.h = t
    c3 = unit_circle_gap(eigenvalues(T.to_matrix()))
    return EquivalenceTable(
        "line_semigroup",
        name,
        [
            Condition("spectrum of exp(tA) misses the unit circle", c1),
            Condition("0 in resolvent set of B (line)", c2),
            Condition("spectrum of exp(tB) misses the unit circle", c3),
        ],
        {"t": float(t), "N": N, "xi_window": float(xi_window)},
    )


def _periodic_family(spec: SystemSpec, N: int, tol: float):
    if spec.kind == "constant":
        period = 2 * math.pi
    elif spec.kind == "periodic":
        period = spec.period
    else:
        raise SpecError("a periodic (or constant) spec is required")
    return build_family(spec, 0.0, period / N, N, tol)


def check_nonautonomous_semigroup(
    spec: SystemSpec, N: int = 32, seed: int = DEFAULT_SEED, tol: float = 1e-10, fam=None
) -> EquivalenceTable:
    """0 in rho(D) <=> sigma(e^{hD}) misses the circle, for a periodic family.

    0 in rho(D) is decided through the Floquet multipliers (lambda in sigma(T)
    iff lambda^N is a multiplier). Also reports rotation invariance of
    sigma(e^{hD}) and the change-of-variables identity as diagnostics.
    """
    fam = fam or _periodic_family(spec, N, tol)
    _, mult = monodromy(fam)
    T = assemble_line(fam, "cyclic")
    rep = semigroup_spectrum(T)
    rng = np.random.default_rng(seed)
    sample = rng.standard_normal((fam.N, fam.N, fam.d))
    cov = change_of_variables_check(fam, sample, 1)
    rot = rep.meta["rotation_invariance"]
    return EquivalenceTable(
        "nonautonomous_semigroup",
        spec.name,
        [
            Condition("no Floquet multiplier on the unit circle (0 in resolvent set of D)", unit_circle_gap(mult)),
            Condition("spectrum of exp(hD) misses the unit circle", rep.unit_circle_gap),
        ],
        {"rotation_invariance": rot, "change_of_variables": cov, "N": fam.N},
        diagnostics_ok=rot <= 1e-8 and cov <= 1e-10,
    )


def check_spectral_hyperbolicity(
    spec: SystemSpec, N: int = 32, tol: float = 1e-10, fam=None
) -> tuple[EquivalenceTable, object]:
    """Spectrally hyperbolic family <=> sigma(e^{hD}) misses the circle.

    Returns the table and the dichotomy report (None if no projection exists).
    """
    fam = fam or _periodic_family(spec, N, tol)
    T = assemble_line(fam, "cyclic")
    gap = semigroup_spectrum(T).unit_circle_gap
    report = None
    left = 0.0
    diagnostics: dict = {"N": fam.N, "invertible_slices": bool(
        all(smallest_singular_value(S) > 1e-12 for S in fam.slices)
    )}
    try:
        P, riesz = projections_for_family(fam, T)
    except RankError as exc:
        diagnostics["projection"] = f"unavailable: {exc}"
    else:
        try:
            report = verify_dichotomy(fam, P, provenance="riesz")
        except RankError as exc:
            diagnostics["projection"] = f"rejected: {exc}"
        else:
            diagnostics.update(
                verdict=report.verdict,
                rank=report.rank,
                off_block_mass=P.off_block_mass,
                nodes=riesz.nodes,
            )
            if report.spectrally_hyperbolic:
                left = min(report.lam, report.residuals["kernel_invertibility"] or math.inf)
    table = EquivalenceTable(
        "spectral_hyperbolicity",
        spec.name,
        [
            Condition("family is spectrally hyperbolic", left),
            Condition("spectrum of exp(hD) misses the unit circle", gap),
        ],
        diagnostics,
    )
    return table, report


def pointwise_max_real_part(spec: SystemSpec, samples: int = 2048) -> float:
    """max over t of Re sigma(A(t)), sampled over one period."""
    if spec.kind == "constant":
        return float(np.max(eigenvalues(spec.matrix).real))
    period = spec.period if spec.kind == "periodic" else spec.span[1] - spec.span[0]
    start = 0.0 if spec.kind == "periodic" else spec.span[0]
    ts = start + period * np.arange(samples) / samples
    return float(max(np.max(eigenvalues(spec(t)).real) for t in ts))


@dataclass
class GalleryEntry:
    system: GallerySystem
    tables: list[EquivalenceTable]
    dichotomy: object | None
    verdict: str
    pointwise_max_real: float
    error: str | None = None

    @property
    def matches_expected(self) -> bool:
        return self.error is None and self.verdict == self.system.expected

    def to_dict(self) -> dict:
        return {
            "system": self.system.name,
            "expected": self.system.expected,
            "verdict": self.verdict,
            "pointwise_max_real_part": self.pointwise_max_real,
            "tables": [t.to_dict() for t in self.tables],
            "dichotomy": None if self.dichotomy is None else self.dichotomy.to_dict(),
            "error": self.error,
        }


def _classify(table: EquivalenceTable, report) -> str:
    if table.holds is False:
        return "on-axis"
    if table.holds is None:
        return "degenerate" if table.degenerate else "inconsistent"
    if report is None:
        return "inconsistent"
    return report.verdict


def run_system(system: GallerySystem, N: int = 32, seed: int = DEFAULT_SEED) -> GalleryEntry:
    spec = system.spec
    tables = []
    try:
        if spec.kind == "constant":
            A = spec.matrix
            tables.append(check_periodic_semigroup(A, max(N, 8), name=system.name))
            tables.append(check_line_semigroup(A, 1.0, max(N, 8), name=system.name))
        fam = _periodic_family(spec, N, 1e-10)
        tables.append(check_nonautonomous_semigroup(spec, N, seed, fam=fam))
        table5, report = check_spectral_hyperbolicity(spec, N, fam=fam)
        tables.append(table5)
        verdict = _classify(table5, report)
        err = None
    except Exception as exc:  # recorded, the run continues
        report, verdict, err = None, "error", f"{type(exc).__name__}: {exc}"
    return GalleryEntry(system, tables, report, verdict, pointwise_max_real_part(spec), err)


def _threads() -> int | None:
    raw = os.environ.get("EVODICH_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        return None
    return n if n > 0 else None


def run_gallery(
    systems: list[GallerySystem] | None = None, N: int = 32, seed: int = DEFAULT_SEED
) -> list[GalleryEntry]:
    """Run every applicable check on every gallery system, in gallery order."""
    systems = default_gallery() if systems is None else systems
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(lambda s: run_system(s, N, seed), systems))


def headline(entries: list[GalleryEntry], name: str = "vinograd_1.5") -> dict:
    """Pointwise spectra in the open left half-plane, yet not uniformly stable."""
    entry = next(e for e in entries if e.system.name == name)
    return {
        "system": name,
        "pointwise_max_real_part": entry.pointwise_max_real,
        "verdict": entry.verdict,
        "growth_rate": None if entry.dichotomy is None else entry.dichotomy.growth_rate,
        "holds": entry.pointwise_max_real < 0 and entry.verdict not in ("uniformly_stable", "error"),
    }
