"""Evolution families U(t, s) for linear systems y' = A(t) y.

A :class:`SystemSpec` describes t -> A(t) (constant, periodic or sampled);
:func:`evolve` integrates the matrix ODE U' = A(t) U and :func:`build_family`
materializes U on a uniform grid as a list of one-step slices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

DEFAULT_TOL = 1e-10


class SpecError(ValueError):
    """Malformed or inconsistent system description."""


class IntegrationError(RuntimeError):
    """Time stepping failed (step-size underflow, overflow, ...)."""


def _as_matrix(m, d: int | None = None) -> np.ndarray:
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise SpecError(f"expected a square matrix, got shape {arr.shape}")
    if d is not None and arr.shape[0] != d:
        raise SpecError(f"expected {d}x{d} matrix, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SpecError("matrix has non-finite entries")
    if np.iscomplexobj(arr) and not np.any(arr.imag):
        arr = arr.real
    return arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64)


@dataclass(frozen=True)
class FourierTerm:
    """One harmonic: cos_coef * cos(k w t) + sin_coef * sin(k w t), w = 2 pi / T."""

    k: int
    cos_coef: np.ndarray
    sin_coef: np.ndarray


@dataclass(frozen=True)
class SystemSpec:
    """Declarative description of t -> A(t).

    ``kind`` is ``"constant"`` (uses ``matrix``), ``"periodic"`` (uses
    ``period`` plus either ``fourier`` terms or a uniform sample table
    ``times``/``matrices`` covering [0, period)) or ``"sampled"`` (strictly
    increasing ``times`` with ``matrices``; linear interpolation, no
    extrapolation).
    """

    dimension: int
    kind: str
    matrix: np.ndarray | None = None
    period: float | None = None
    fourier: tuple[FourierTerm, ...] = ()
    times: np.ndarray | None = None
    matrices: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        d = self.dimension
        if not isinstance(d, (int, np.integer)) or d < 1:
            raise SpecError("dimension must be a positive integer")
        if self.kind == "constant":
            if self.matrix is None:
                raise SpecError("constant spec needs 'matrix'")
            object.__setattr__(self, "matrix", _as_matrix(self.matrix, d))
        elif self.kind == "periodic":
            if self.period is None or not (self.period > 0) or not math.isfinite(self.period):
                raise SpecError("periodic spec needs a finite period > 0")
            if self.fourier and self.matrices is not None:
                raise SpecError("periodic spec takes either fourier terms or samples, not both")
            if self.fourier:
                terms = tuple(
                    FourierTerm(int(t.k), _as_matrix(t.cos_coef, d), _as_matrix(t.sin_coef, d))
                    for t in self.fourier
                )
                if any(t.k < 0 for t in terms):
                    raise SpecError("fourier harmonics must be >= 0")
                object.__setattr__(self, "fourier", terms)
            else:
                self._check_samples()
                n = len(self.times)
                expected = np.arange(n) * (self.period / n)
                if not np.allclose(self.times, expected, rtol=0, atol=1e-12 * self.period):
                    raise SpecError("periodic samples must lie on the uniform grid k*T/n, k < n")
        elif self.kind == "sampled":
            self._check_samples()
            if len(self.times) < 2:
                raise SpecError("sampled spec needs at least two samples")
        else:
            raise SpecError(f"unknown kind {self.kind!r}")

    def _check_samples(self):
        if self.times is None or self.matrices is None:
            raise SpecError(f"{self.kind} spec needs samples")
        times = np.asarray(self.times, dtype=float)
        mats = [_as_matrix(m, self.dimension) for m in self.matrices]
        if len(times) != len(mats) or len(times) == 0:
            raise SpecError("sample times and matrices differ in length")
        if np.any(np.diff(times) <= 0):
            raise SpecError("sample times must be strictly increasing")
        cplx = any(np.iscomplexobj(m) for m in mats)
        object.__setattr__(self, "times", times)
        object.__setattr__(
            self, "matrices", np.array(mats, dtype=np.complex128 if cplx else np.float64)
        )

    @property
    def is_complex(self) -> bool:
        if self.kind == "constant":
            return np.iscomplexobj(self.matrix)
        if self.fourier:
            return any(np.iscomplexobj(t.cos_coef) or np.iscomplexobj(t.sin_coef) for t in self.fourier)
        return np.iscomplexobj(self.matrices)

    @property
    def span(self) -> tuple[float, float]:
        """Interval on which A(t) is defined."""
        if self.kind == "sampled":
            return float(self.times[0]), float(self.times[-1])
        return -math.inf, math.inf

    def is_periodic_with(self, period: float, rtol: float = 1e-9) -> bool:
        """True if A(t + period) = A(t) is guaranteed by construction."""
        if self.kind == "constant":
            return period > 0
        if self.kind == "periodic":
            ratio = period / self.period
            return ratio >= 1 - rtol and abs(ratio - round(ratio)) <= rtol * ratio
        return False

    def __call__(self, t: float) -> np.ndarray:
        if self.kind == "constant":
            return self.matrix
        if self.kind == "sampled":
            lo, hi = self.span
            if not (lo <= t <= hi):
                raise SpecError(f"t={t} outside sampled span [{lo}, {hi}]")
            j = int(np.searchsorted(self.times, t, side="right")) - 1
            j = min(max(j, 0), len(self.times) - 2)
            w = (t - self.times[j]) / (self.times[j + 1] - self.times[j])
            return (1 - w) * self.matrices[j] + w * self.matrices[j + 1]
        tau = math.fmod(t, self.period)
        if tau < 0:
            tau += self.period
        if self.fourier:
            omega = 2 * math.pi / self.period
            out = 0
            for term in self.fourier:
                out = out + term.cos_coef * math.cos(term.k * omega * tau) + term.sin_coef * math.sin(
                    term.k * omega * tau
                )
            return np.asarray(out)
        n = len(self.times)
        pos = tau / self.period * n
        j = min(int(pos), n - 1)
        w = pos - j
        return (1 - w) * self.matrices[j] + w * self.matrices[(j + 1) % n]

    # -- JSON ---------------------------------------------------------------

    @classmethod
    def from_dict(cls, doc: dict) -> "SystemSpec":
        if not isinstance(doc, dict):
            raise SpecError("spec document must be a JSON object")
        try:
            d = doc["dimension"]
            kind = doc["kind"]
        except KeyError as exc:
            raise SpecError(f"missing field {exc.args[0]!r}") from None
        if isinstance(d, bool) or not isinstance(d, int):
            raise SpecError("dimension must be an integer")
        name = str(doc.get("name", ""))
        if kind == "constant":
            return cls(d, kind, matrix=_decode_matrix(doc.get("matrix")), name=name)
        samples = doc.get("samples")
        times = mats = None
        if samples is not None:
            if not isinstance(samples, list):
                raise SpecError("'samples' must be a list")
            try:
                times = np.array([float(s["t"]) for s in samples])
                mats = [_decode_matrix(s["matrix"]) for s in samples]
            except (KeyError, TypeError) as exc:
                raise SpecError(f"bad sample entry: {exc}") from None
        fourier = ()
        if doc.get("fourier") is not None:
            try:
                fourier = tuple(
                    FourierTerm(int(f["k"]), _decode_matrix(f["cos"]), _decode_matrix(f["sin"]))
                    for f in doc["fourier"]
                )
            except (KeyError, TypeError) as exc:
                raise SpecError(f"bad fourier entry: {exc}") from None
        period = doc.get("period")
        if kind == "periodic" and period is None:
            raise SpecError("periodic spec needs 'period'")
        return cls(
            d,
            kind,
            period=None if period is None else float(period),
            fourier=fourier,
            times=times,
            matrices=mats,
            name=name,
        )

    def to_dict(self) -> dict:
        doc: dict = {"dimension": int(self.dimension), "kind": self.kind}
        if self.name:
            doc["name"] = self.name
        if self.kind == "constant":
            doc["matrix"] = _encode_matrix(self.matrix)
            return doc
        if self.period is not None:
            doc["period"] = float(self.period)
        if self.fourier:
            doc["fourier"] = [
                {"k": t.k, "cos": _encode_matrix(t.cos_coef), "sin": _encode_matrix(t.sin_coef)}
                for t in self.fourier
            ]
        else:
            doc["samples"] = [
                {"t": float(t), "matrix": _encode_matrix(m)} for t, m in zip(self.times, self.matrices)
            ]
        return doc


def _decode_entry(x):
    if isinstance(x, bool):
        raise SpecError("booleans are not numbers")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, list) and len(x) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in x
    ):
        return complex(x[0], x[1])
    raise SpecError(f"bad matrix entry {x!r}")


def _decode_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise SpecError("matrix must be a non-empty list of rows")
    vals = [[_decode_entry(x) for x in r] for r in rows]
    if len({len(r) for r in vals}) != 1:
        raise SpecError("ragged matrix rows")
    cplx = any(isinstance(x, complex) for r in vals for x in r)
    return np.array(vals, dtype=np.complex128 if cplx else np.float64)


def _encode_matrix(m: np.ndarray) -> list:
    if np.iscomplexobj(m):
        return [[[float(x.real), float(x.imag)] for x in row] for row in m]
    return [[float(x) for x in row] for row in m]


def load_spec(path) -> SystemSpec:
    """Read a :class:`SystemSpec` from a UTF-8 JSON file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return SystemSpec.from_dict(doc)


# -- propagators --------------------------------------------------------------


def expm(M, t: float = 1.0) -> np.ndarray:
    """e^{tM} by scaling and squaring with a diagonal Pade approximant."""
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise ValueError("expm: non-finite matrix entries")
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = scipy.linalg.expm(t * M)
        except FloatingPointError as exc:
            raise OverflowError(f"expm: ||tM|| too large ({exc})") from None
    if not np.all(np.isfinite(out)):
        raise OverflowError("expm: result overflowed")
    return out


def evolve(spec: SystemSpec, s: float, t: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Propagator U(t, s) of y' = A(tau) y, t >= s."""
    if t < s:
        raise SpecError(f"evolve needs t >= s (got s={s}, t={t})")
    lo, hi = spec.span
    if s < lo or t > hi:
        raise SpecError(f"[{s}, {t}] is outside the validity span [{lo}, {hi}]")
    d = spec.dimension
    if t == s:
        return np.eye(d, dtype=np.complex128 if spec.is_complex else np.float64)
    if spec.kind == "constant":
        return expm(spec.matrix, t - s)

    def rhs(tau, u):
        return (spec(tau) @ u.reshape(d, d)).ravel()

    u0 = np.eye(d, dtype=np.complex128 if spec.is_complex else np.float64).ravel()
    sol = solve_ivp(rhs, (s, t), u0, method="RK45", rtol=tol, atol=tol)
    if sol.status != 0 or not np.all(np.isfinite(sol.y[:, -1])):
        raise IntegrationError(f"integration of [{s}, {t}] failed: {sol.message}")
    return sol.y[:, -1].reshape(d, d)


@dataclass
class EvolutionFamily:
    """Propagator slices S_j = U(x_j, x_{j-1}) on a uniform grid x_0 + j h."""

    x0: float
    h: float
    slices: np.ndarray  # (N, d, d)
    C: float = 1.0
    beta: float = 0.0
    tol: float = DEFAULT_TOL
    spec: SystemSpec | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return len(self.slices)

    @property
    def d(self) -> int:
        return self.slices.shape[1]

    @property
    def grid(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.N + 1)

    def propagator(self, i: int, j: int) -> np.ndarray:
        """U(x_j, x_i) = S_j ... S_{i+1} for i <= j."""
        if not (0 <= i <= j <= self.N):
            raise IndexError(f"need 0 <= i <= j <= {self.N}, got ({i}, {j})")
        out = np.eye(self.d, dtype=self.slices.dtype)
        for k in range(i, j):
            out = self.slices[k] @ out
        return out

    def all_propagators(self) -> dict[tuple[int, int], np.ndarray]:
        """Every U(x_j, x_i), i <= j, built by running products."""
        out = {}
        eye = np.eye(self.d, dtype=self.slices.dtype)
        for i in range(self.N + 1):
            acc = eye
            out[i, i] = acc
            for j in range(i + 1, self.N + 1):
                acc = self.slices[j - 1] @ acc
                out[i, j] = acc
        return out


def fit_growth_bound(fam: EvolutionFamily) -> tuple[float, float]:
    """(C, beta) with ||U(x_j, x_i)|| <= C e^{beta (x_j - x_i)} on every grid pair.

    beta is the least-squares slope of log||U|| against elapsed time; C is then
    the smallest constant (at least 1) making the bound hold everywhere.
    """
    taus, logs = [], []
    for (i, j), U in fam.all_propagators().items():
        nrm = np.linalg.norm(U, 2)
        taus.append((j - i) * fam.h)
        logs.append(math.log(nrm) if nrm > 0 else -745.0)
    taus = np.array(taus)
    logs = np.array(logs)
    if np.ptp(taus) > 0:
        beta = float(np.polyfit(taus, logs, 1)[0])
    else:
        beta = 0.0
    logC = max(0.0, float(np.max(logs - beta * taus)))
    return math.exp(logC), beta


def build_family(
    spec: SystemSpec, x0: float, h: float, N: int, tol: float = DEFAULT_TOL
) -> EvolutionFamily:
    """Evolution family of ``spec`` on the grid x0, x0 + h, ..., x0 + N h."""
    if N < 1 or not (h > 0):
        raise SpecError("build_family needs N >= 1 and h > 0")
    grid = x0 + h * np.arange(N + 1)
    if spec.kind == "constant":
        S = expm(spec.matrix, h)
        slices = np.array([S] * N)
    else:
        slices = np.array([evolve(spec, grid[j], grid[j + 1], tol) for j in range(N)])
    fam = EvolutionFamily(x0=float(x0), h=float(h), slices=slices, tol=tol, spec=spec)
    fam.C, fam.beta = fit_growth_bound(fam)
    return fam


def family_from_slices(slices: Sequence[np.ndarray], h: float, x0: float = 0.0) -> EvolutionFamily:
    """Wrap precomputed slices (no spec attached) and fit the growth bound."""
    arr = np.array([np.asarray(s) for s in slices])
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise SpecError("slices must be a list of equal square matrices")
    fam = EvolutionFamily(x0=float(x0), h=float(h), slices=arr)
    fam.C, fam.beta = fit_growth_bound(fam)
    return fam
