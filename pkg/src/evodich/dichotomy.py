"""Dichotomy projections and the checks that certify them.

The projection onto the decaying part of a discretized evolution semigroup T
is computed as the contour integral (1 / 2 pi i) \\oint_{|z|=1} (zI - T)^+ dz,
with ^+ the Moore-Penrose left inverse, by the trapezoid rule on the unit
circle. Its diagonal blocks give the pointwise projections P(x_j), which are
then checked against the propagator directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .propagator import EvolutionFamily, SpecError
from .semigroup import BlockShiftOperator
from .spectrum import eigenvalues

RANK_TOL = 1e-8


class RankError(np.linalg.LinAlgError):
    pass


# -- Floquet ------------------------------------------------------------------


def monodromy(fam: EvolutionFamily, period_steps: int | None = None):
    """Monodromy matrix over one period and its Floquet multipliers."""
    steps = fam.N if period_steps is None else int(period_steps)
    if steps < 1 or steps > fam.N:
        raise ValueError(f"period_steps must be in [1, {fam.N}]")
    if fam.spec is None or not fam.spec.is_periodic_with(steps * fam.h):
        raise SpecError(f"spec is not periodic with period {steps * fam.h:.17g}")
    Pi = fam.propagator(0, steps)
    return Pi, eigenvalues(Pi)


# -- Moore-Penrose ------------------------------------------------------------


def moore_penrose_left_inverse(T, rtol: float = RANK_TOL) -> np.ndarray:
    """T^+ for a left-invertible T: T^+ T = I and T^+ vanishes on (Im T)^perp.

    Uses QR with column pivoting, T Pi = Q R; then T^+ = Pi R^{-1} Q^*.
    """
    T = np.atleast_2d(np.asarray(T))
    m, n = T.shape
    if n > m:
        raise RankError(f"{m}x{n} matrix cannot be left invertible")
    Q, R, piv = scipy.linalg.qr(T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if n and (diag[0] == 0 or diag[-1] <= rtol * diag[0]):
        raise RankError(
            f"matrix is not left invertible at tolerance {rtol:g} "
            f"(|R_nn| / |R_11| = {diag[-1] / diag[0] if diag[0] else 0.0:.3g})"
        )
    X = scipy.linalg.solve_triangular(R, Q.conj().T)
    out = np.empty_like(X)
    out[piv] = X
    return out


# -- contour projection -------------------------------------------------------


def _as_dense(T) -> np.ndarray:
    if isinstance(T, BlockShiftOperator):
        return T.to_matrix()
    return np.asarray(T)


def _node_sum(T: np.ndarray, nodes: np.ndarray, rtol: float) -> np.ndarray:
    n = T.shape[0]
    eye = np.eye(n)
    acc = np.zeros((n, n), dtype=np.complex128)
    for z in nodes:
        try:
            acc += z * moore_penrose_left_inverse(z * eye - T, rtol)
        except RankError as exc:
            raise RankError(f"zI - T is not left invertible at z = {z:.17g}: {exc}") from None
    return acc


@dataclass
class RieszResult:
    projection: np.ndarray
    nodes: int
    idempotency: float
    history: list[tuple[int, float]] = field(default_factory=list)


def riesz_projection(
    T,
    Q: int | None = None,
    *,
    Q0: int = 256,
    Q_max: int = 4096,
    target: float = 1e-8,
    rtol: float = RANK_TOL,
    full: bool = False,
):
    """Contour projection onto the part of sigma(T) inside the unit disk.

    With ``Q`` given, uses exactly Q equispaced nodes z_q = e^{2 pi i q / Q}.
    Otherwise starts at ``Q0`` and doubles (reusing previous nodes) until
    ||P^2 - P|| <= target or ``Q_max`` is reached. Since dz = i z dtheta,
    (1 / 2 pi i) \\oint (zI - T)^+ dz = (1 / Q) sum_q z_q (z_q I - T)^+.
    """
    T = _as_dense(T)
    real_input = not np.iscomplexobj(T)

    def finish(S, q):
        P = S / q
        if real_input:
            P = P.real
        return P

    if Q is not None:
        nodes = np.exp(2j * math.pi * np.arange(Q) / Q)
        P = finish(_node_sum(T, nodes, rtol), Q)
        idem = float(np.linalg.norm(P @ P - P, 2))
        res = RieszResult(P, Q, idem, [(Q, idem)])
        return res if full else P

    q = Q0
    S = _node_sum(T, np.exp(2j * math.pi * np.arange(q) / q), rtol)
    history = []
    while True:
        P = finish(S, q)
        idem = float(np.linalg.norm(P @ P - P, 2))
        history.append((q, idem))
        if idem <= target or q >= Q_max:
            break
        # odd nodes of the doubled grid
        S = S + _node_sum(T, np.exp(2j * math.pi * (2 * np.arange(q) + 1) / (2 * q)), rtol)
        q *= 2
    res = RieszResult(P, q, idem, history)
    return res if full else P


def eigenprojection(T, inside: bool = True) -> np.ndarray:
    """Spectral projection from a full eigendecomposition (|lambda| < 1 part)."""
    T = _as_dense(T)
    w, V = np.linalg.eig(T)
    mask = np.abs(w) < 1 if inside else np.abs(w) > 1
    P = V @ np.diag(mask.astype(float)) @ np.linalg.inv(V)
    return P.real if not np.iscomplexobj(T) else P


# -- pointwise projections ----------------------------------------------------


@dataclass
class ProjectionFamily:
    grid: np.ndarray
    matrices: np.ndarray  # (len(grid), d, d)
    idempotency: float
    bound: float
    ranks: list[int]
    off_block_mass: float = 0.0
    continuity: float = 0.0

    @classmethod
    def from_matrices(cls, grid, matrices, off_block_mass: float = 0.0) -> "ProjectionFamily":
        mats = np.asarray(matrices)
        idem = max(float(np.linalg.norm(P @ P - P, 2)) for P in mats)
        bound = max(float(np.linalg.norm(P, 2)) for P in mats)
        ranks = [_rank(P) for P in mats]
        cont = max((float(np.linalg.norm(b - a, 2)) for a, b in zip(mats, mats[1:])), default=0.0)
        return cls(np.asarray(grid, dtype=float), mats, idem, bound, ranks, off_block_mass, cont)

    def to_csv(self) -> str:
        lines = ["x,row,col,re,im"]
        for x, P in zip(self.grid, self.matrices):
            for r in range(P.shape[0]):
                for c in range(P.shape[1]):
                    z = complex(P[r, c])
                    lines.append(f"{x:.17g},{r},{c},{z.real:.17g},{z.imag:.17g}")
        return "\n".join(lines) + "\n"


def _rank(M, rtol: float = RANK_TOL) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * max(1.0, s[0])))


def extract_pointwise_projections(P, N: int, d: int, grid=None) -> ProjectionFamily:
    """Diagonal d x d blocks of an Nd x Nd projection, plus its off-block mass."""
    P = np.asarray(P)
    if P.shape != (N * d, N * d):
        raise ValueError(f"expected a {N * d}x{N * d} matrix, got {P.shape}")
    blocks = np.array([P[j * d : (j + 1) * d, j * d : (j + 1) * d] for j in range(N)])
    rest = P.copy()
    for j in range(N):
        rest[j * d : (j + 1) * d, j * d : (j + 1) * d] = 0
    mass = float(np.linalg.norm(rest, 2))
    if grid is None:
        grid = np.arange(N, dtype=float)
    return ProjectionFamily.from_matrices(grid, blocks, mass)


def projections_for_family(fam: EvolutionFamily, T: BlockShiftOperator | None = None, **riesz_kw):
    """Riesz projection of the cyclic operator built from ``fam``, as P(x_0..x_N).

    Cell j of the operator carries x_{j+1}; P(x_0) = P(x_N) by periodicity.
    """
    if T is None:
        from .semigroup import assemble_line

        T = assemble_line(fam, "cyclic")
    res = riesz_projection(T, full=True, **riesz_kw)
    inner = extract_pointwise_projections(res.projection, T.N, T.d)
    mats = np.concatenate([inner.matrices[-1:], inner.matrices])
    fam_P = ProjectionFamily.from_matrices(fam.grid, mats, inner.off_block_mass)
    return fam_P, res


# -- dichotomy estimates along the propagator --------------------------------


def _orth(M, rtol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the range of M."""
    if M.shape[1] == 0:
        return M[:, :0]
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    return U[:, : int(np.sum(s > rtol * max(1.0, s[0])))]


def _null(M, rtol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the kernel of M."""
    _, s, Vh = np.linalg.svd(M)
    r = 0 if s.size == 0 or s[0] == 0 else int(np.sum(s > rtol * max(1.0, s[0])))
    return Vh[r:].conj().T


@dataclass
class DichotomyReport:
    verdict: str  # uniformly_stable | hyperbolic | none
    M: float
    lam: float
    decay_rate: float
    growth_rate: float
    rank: int
    spectrally_hyperbolic: bool
    residuals: dict
    provenance: str = "user-supplied"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "spectrally_hyperbolic": self.spectrally_hyperbolic,
            "M": self.M,
            "lambda": self.lam,
            "decay_rate": self.decay_rate,
            "growth_rate": self.growth_rate,
            "residuals": dict(self.residuals),
            "rank": self.rank,
            "provenance": self.provenance,
        }


def _fit_rate(taus: np.ndarray, logs: np.ndarray) -> float:
    if taus.size == 0:
        return math.inf
    if taus.size == 1 or np.ptp(taus) == 0:
        return float(logs[0] / taus[0])
    return float(np.polyfit(taus, logs, 1)[0])


def verify_dichotomy(
    fam: EvolutionFamily, P: ProjectionFamily, tol: float = 1e-8, provenance: str = "user-supplied"
) -> DichotomyReport:
    """Check the dichotomy conditions for ``P`` along ``fam`` on every grid pair.

    Decay on Im P(s) uses the operator norm of U(x, s) restricted there; growth
    on Ker P(s) uses the smallest singular value of that restriction. Rates are
    least-squares slopes of the log data against elapsed time; the reported
    lambda is the smaller one and M the least constant (>= 1) making both
    exponential estimates hold at every grid pair.
    """
    if len(P.matrices) != fam.N + 1:
        raise ValueError(f"projection family has {len(P.matrices)} points, grid has {fam.N + 1}")
    if P.grid.shape == fam.grid.shape and not np.allclose(P.grid, fam.grid):
        raise ValueError("projection grid does not match the family grid")
    d = fam.d
    ranks = P.ranks
    if len(set(ranks)) != 1:
        raise RankError(f"rank of P jumps along the grid: {sorted(set(ranks))}")
    rank = ranks[0]
    im_bases = [_orth(Pj) for Pj in P.matrices]
    ker_bases = [_null(Pj) for Pj in P.matrices]

    comm = 0.0
    dec_t, dec_l, gro_t, gro_l, inv_margin = [], [], [], [], math.inf
    for (i, j), U in fam.all_propagators().items():
        scale = max(1.0, np.linalg.norm(U, 2)) * max(1.0, P.bound)
        comm = max(comm, float(np.linalg.norm(P.matrices[j] @ U - U @ P.matrices[i], 2)) / scale)
        if j == i:
            continue
        tau = (j - i) * fam.h
        if im_bases[i].shape[1]:
            dec_t.append(tau)
            dec_l.append(math.log(max(np.linalg.norm(U @ im_bases[i], 2), 1e-300)))
        if ker_bases[i].shape[1]:
            UK = U @ ker_bases[i]
            smin = np.linalg.svd(UK, compute_uv=False)[-1]
            gro_t.append(tau)
            gro_l.append(math.log(max(smin, 1e-300)))
            # restricted map Ker P(s) -> Ker P(x), expressed in orthonormal bases
            R = ker_bases[j].conj().T @ UK
            leak = np.linalg.norm(UK - ker_bases[j] @ R, 2)
            inv_margin = min(inv_margin, float(np.linalg.svd(R, compute_uv=False)[-1] / max(1.0, smin)))
            comm = max(comm, float(leak) / max(1.0, np.linalg.norm(UK, 2)))

    dec_t, dec_l = np.array(dec_t), np.array(dec_l)
    gro_t, gro_l = np.array(gro_t), np.array(gro_l)
    decay = -_fit_rate(dec_t, dec_l) if dec_t.size else math.inf
    growth = _fit_rate(gro_t, gro_l) if gro_t.size else math.inf
    lam = min(decay, growth)
    logM = 0.0
    if math.isfinite(lam):
        if dec_t.size:
            logM = max(logM, float(np.max(dec_l + lam * dec_t)))
        if gro_t.size:
            logM = max(logM, float(np.max(lam * gro_t - gro_l)))
    M = math.exp(logM)

    commutes = comm <= tol
    has_split = lam > 0
    if not (commutes and has_split and P.idempotency <= tol * max(1.0, P.bound)):
        verdict = "none"
    elif rank == d:
        verdict = "uniformly_stable"
    else:
        verdict = "hyperbolic"
    # finite rank kernel: the restricted map is onto iff it is injective
    invertible = rank == d or inv_margin > RANK_TOL
    residuals = {
        "commutation": comm,
        "idempotency": P.idempotency,
        "decay_margin": decay,
        "growth_margin": growth,
        "kernel_invertibility": inv_margin if math.isfinite(inv_margin) else None,
        "continuity": P.continuity,
    }
    return DichotomyReport(
        verdict=verdict,
        M=M,
        lam=lam,
        decay_rate=decay,
        growth_rate=growth,
        rank=rank,
        spectrally_hyperbolic=verdict != "none" and invertible,
        residuals=residuals,
        provenance=provenance,
    )


# -- projection conditions on the semigroup -----------------------------------


@dataclass
class ConditionReport:
    commutation: float
    stable_radius: float
    left_invertibility: float
    dagger_radius: float
    leakage: float
    kernel_dim: int
    stable_dim: int
    intersection_rank: int
    holds: dict

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _spectral_radius(M) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(eigenvalues(M))))


def check_projection_conditions(
    T, P, t_steps: int = 1, tol: float = 1e-8, n_max: int | None = None, block: int | None = None
) -> ConditionReport:
    """Residuals of the four projection conditions for T^t_steps and P.

    (1) ||T P - P T||; (2) spectral radius of T on Im P; (3) left-invertibility
    margin of T on Ker P and spectral radius of its Moore-Penrose left inverse;
    (4) leakage of Ker P minus the stable image intersection under the
    single-cell indicator multiplications (cells of size ``block``).
    """
    N_cells = None
    if isinstance(T, BlockShiftOperator):
        N_cells, block = T.N, T.d if block is None else block
    T = _as_dense(T)
    P = np.asarray(P)
    n = T.shape[0]
    if block is None:
        block = 1
    if N_cells is None:
        N_cells = n // block
    Tt = np.linalg.matrix_power(T, t_steps)
    scale = max(1.0, np.linalg.norm(P, 2))
    if np.linalg.norm(P @ P - P, 2) > 1e-6 * scale:
        raise ValueError("P is not a projection")
    comm = float(np.linalg.norm(Tt @ P - P @ Tt, 2)) / max(1.0, np.linalg.norm(Tt, 2)) / scale

    Im = _orth(P)
    Ker = _null(P)
    stable_r = _spectral_radius(Im.conj().T @ Tt @ Im) if Im.shape[1] else 0.0

    if Ker.shape[1]:
        TK = Tt @ Ker
        s = np.linalg.svd(TK, compute_uv=False)
        left = float(s[-1] / max(1.0, s[0]))
        R = Ker.conj().T @ TK  # T restricted to Ker P, in the basis Ker
        try:
            dagger_r = _spectral_radius(moore_penrose_left_inverse(R))
        except RankError:
            dagger_r = math.inf
        if n_max is None:
            n_max = 2 * N_cells
        V = Ker
        for _ in range(n_max):
            W = _orth(Tt @ V)
            if W.shape[1] == V.shape[1]:
                break
            V = W
        # complement of the stable intersection inside Ker P
        C = Ker - V @ (V.conj().T @ Ker) if V.shape[1] else Ker
        C = _orth(C)
        leak = 0.0
        if C.shape[1]:
            for j in range(N_cells):
                MC = np.zeros_like(C)
                MC[j * block : (j + 1) * block] = C[j * block : (j + 1) * block]
                leak = max(leak, float(np.linalg.norm(MC - C @ (C.conj().T @ MC), 2)))
        inter = V.shape[1]
    else:
        left, dagger_r, leak, inter = math.inf, 0.0, 0.0, 0

    holds = {
        "commutes": comm <= tol,
        "stable_part_contracts": stable_r < 1,
        "unstable_part_left_invertible": left > RANK_TOL and dagger_r < 1,
        "multiplication_invariant": leak <= tol,
    }
    return ConditionReport(
        commutation=comm,
        stable_radius=stable_r,
        left_invertibility=left,
        dagger_radius=dagger_r,
        leakage=leak,
        kernel_dim=Ker.shape[1],
        stable_dim=Im.shape[1],
        intersection_rank=inter,
        holds=holds,
    )
