"""Curated test systems with closed-form facts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .propagator import FourierTerm, SystemSpec, expm


@dataclass
class GallerySystem:
    name: str
    spec: SystemSpec
    expected: str  # "hyperbolic" | "uniformly_stable" | "on-axis"
    facts: dict = field(default_factory=dict)

    @property
    def constant_matrix(self) -> np.ndarray | None:
        return self.spec.matrix if self.spec.kind == "constant" else None


def vinograd(a: float = 1.5) -> SystemSpec:
    """A(t) = [[-1 + a cos^2 t, 1 - a sin t cos t], [-1 - a sin t cos t, -1 + a sin^2 t]].

    Pointwise eigenvalues are constant with real part (a - 2) / 2, yet
    y(t) = e^{(a-1)t} (cos t, -sin t) solves the system.
    """
    c0 = np.array([[-1 + a / 2, 1.0], [-1.0, -1 + a / 2]])
    c2 = np.array([[a / 2, 0.0], [0.0, -a / 2]])
    s2 = np.array([[0.0, -a / 2], [-a / 2, 0.0]])
    return SystemSpec(
        2,
        "periodic",
        period=2 * math.pi,
        fourier=(FourierTerm(0, c0, np.zeros((2, 2))), FourierTerm(2, c2, s2)),
        name=f"vinograd(a={a:g})",
    )


def vinograd_matrix(a: float, t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[-1 + a * c * c, 1 - a * s * c], [-1 - a * s * c, -1 + a * s * s]])


def vinograd_solutions(a: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form solutions e^{(a-1)t}(cos t, -sin t) and e^{-t}(sin t, cos t)."""
    c, s = math.cos(t), math.sin(t)
    return math.exp((a - 1) * t) * np.array([c, -s]), math.exp(-t) * np.array([s, c])


def constant(name: str, A) -> SystemSpec:
    A = np.asarray(A, dtype=float)
    return SystemSpec(A.shape[0], "constant", matrix=A, name=name)


def periodic_diagonal() -> SystemSpec:
    """diag(-1 + sin t, 1 + cos t): Floquet exponents -1 and 1."""
    zero = np.zeros((2, 2))
    return SystemSpec(
        2,
        "periodic",
        period=2 * math.pi,
        fourier=(
            FourierTerm(0, np.diag([-1.0, 1.0]), zero),
            FourierTerm(1, np.diag([0.0, 1.0]), np.diag([1.0, 0.0])),
        ),
        name="periodic_diagonal",
    )


def periodic_rotation() -> SystemSpec:
    """Skew-symmetric (1 + cos t) J: orthogonal propagator, multipliers on the circle."""
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return SystemSpec(
        2,
        "periodic",
        period=2 * math.pi,
        fourier=(FourierTerm(0, J, np.zeros((2, 2))), FourierTerm(1, J, np.zeros((2, 2)))),
        name="periodic_rotation",
    )


def default_gallery() -> list[GallerySystem]:
    rot3 = np.zeros((3, 3))
    rot3[0, 0] = -1.0
    rot3[1:, 1:] = [[0.0, -1.0], [1.0, 0.0]]
    return [
        GallerySystem(
            "vinograd_1.5",
            vinograd(1.5),
            "hyperbolic",
            {
                "floquet_multipliers": [math.exp(math.pi), math.exp(-2 * math.pi)],
                "growth_exponent": 0.5,
                "decay_exponent": 1.0,
                "pointwise_max_real_part": -0.25,
                "oracle": "closed-form solutions; Liouville trace integral",
            },
        ),
        GallerySystem(
            "vinograd_0.5",
            vinograd(0.5),
            "uniformly_stable",
            {
                "floquet_multipliers": [math.exp(-math.pi), math.exp(-2 * math.pi)],
                "oracle": "closed-form solutions; Liouville trace integral",
            },
        ),
        GallerySystem(
            "saddle",
            constant("saddle", np.diag([-1.0, 2.0])),
            "hyperbolic",
            {"eigenvalues": [-1.0, 2.0], "oracle": "diagonal"},
        ),
        GallerySystem(
            "sink",
            constant("sink", np.diag([-3.0, -1.0])),
            "uniformly_stable",
            {"eigenvalues": [-3.0, -1.0], "oracle": "diagonal"},
        ),
        GallerySystem(
            "harmonic_oscillator",
            constant("harmonic_oscillator", [[0.0, 1.0], [-1.0, 0.0]]),
            "on-axis",
            {"eigenvalues": ["i", "-i"], "oracle": "rotation group"},
        ),
        GallerySystem(
            "damped_plus_rotation",
            constant("damped_plus_rotation", rot3),
            "on-axis",
            {"eigenvalues": [-1.0, "i", "-i"], "oracle": "block diagonal"},
        ),
        GallerySystem(
            "periodic_diagonal",
            periodic_diagonal(),
            "hyperbolic",
            {
                "floquet_multipliers": [math.exp(-2 * math.pi), math.exp(2 * math.pi)],
                "oracle": "scalar quadrature of the diagonal",
            },
        ),
        GallerySystem(
            "periodic_rotation",
            periodic_rotation(),
            "on-axis",
            {"floquet_multipliers": [1.0, 1.0], "oracle": "skew-symmetric generator"},
        ),
    ]


def random_matrix(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.uniform(-2.0, 2.0, size=(d, d))


def separated_random_matrix(
    rng: np.random.Generator, d: int, margin: float = 1e-3, max_growth: float = 1e6, max_tries: int = 10_000
) -> np.ndarray:
    """Random matrix whose spectrum keeps ``margin`` away from iZ.

    Also rejects draws with ||e^{2 pi A}|| > max_growth: eigenvalues of the
    period map near 1 carry an absolute error of order eps * ||e^{2 pi A}||,
    which would otherwise swamp the margins being compared.
    """
    for _ in range(max_tries):
        A = random_matrix(rng, d)
        lam = np.linalg.eigvals(A)
        dist = np.min(np.hypot(lam.real, lam.imag - np.round(lam.imag)))
        if dist > margin and np.linalg.norm(expm(A, 2 * math.pi), 2) <= max_growth:
            return A
    raise RuntimeError(f"no separated {d}x{d} matrix after {max_tries} draws")
