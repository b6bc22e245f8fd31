import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evodich.dichotomy import (
    ProjectionFamily,
    RankError,
    check_projection_conditions,
    eigenprojection,
    extract_pointwise_projections,
    monodromy,
    moore_penrose_left_inverse,
    projections_for_family,
    riesz_projection,
    verify_dichotomy,
)
from evodich.gallery import vinograd
from evodich.propagator import SpecError, SystemSpec, build_family
from evodich.semigroup import BlockShiftOperator, assemble_line, assemble_periodic

from oracles import eigenprojection_inside, liouville_determinant, multiset_distance

SADDLE = np.diag([-1.0, 2.0])


def constant_family(A, N=16):
    A = np.asarray(A, dtype=float)
    return build_family(SystemSpec(A.shape[0], "constant", matrix=A), 0.0, 2 * math.pi / N, N)


# -- monodromy ------------------------------------------------------------------


def test_monodromy_of_constant():
    Pi, mult = monodromy(constant_family(SADDLE, 8))
    np.testing.assert_allclose(Pi, np.diag([math.exp(-2 * math.pi), math.exp(4 * math.pi)]), rtol=1e-12)
    assert multiset_distance(mult, [math.exp(-2 * math.pi), math.exp(4 * math.pi)]) <= 1e-6


def test_monodromy_needs_periodic_spec():
    spec = SystemSpec(1, "sampled", times=[0.0, 1.0], matrices=[[[0.0]], [[1.0]]])
    with pytest.raises(SpecError):
        monodromy(build_family(spec, 0.0, 0.25, 4))


def test_vinograd_multipliers_against_liouville():
    fam = build_family(vinograd(1.5), 0.0, 2 * math.pi / 32, 32)
    _, mult = monodromy(fam)
    big = max(mult, key=abs)
    assert abs(big - math.exp(math.pi)) <= 1e-6 * math.exp(math.pi)
    # product of multipliers is det of the period map
    det = liouville_determinant(lambda t: np.trace(fam.spec(t)), 0.0, 2 * math.pi)
    small = det / big
    assert min(mult, key=abs) == pytest.approx(small, rel=1e-6)
    assert small == pytest.approx(math.exp(-2 * math.pi), rel=1e-6)


# -- Moore-Penrose ------------------------------------------------------------------


def test_left_inverse_of_invertible_is_inverse():
    A = np.array([[2.0, 1.0], [0.0, 3.0]])
    np.testing.assert_allclose(moore_penrose_left_inverse(A), np.linalg.inv(A), atol=1e-14)


def test_left_inverse_of_column():
    v = np.array([[3.0], [4.0]])
    np.testing.assert_allclose(moore_penrose_left_inverse(v), [[0.12, 0.16]], atol=1e-15)


def test_left_inverse_random_tall_matches_pinv():
    T = np.random.default_rng(5).standard_normal((6, 3))
    X = moore_penrose_left_inverse(T)
    np.testing.assert_allclose(X @ T, np.eye(3), atol=1e-12)
    # vanishes on the orthogonal complement of the range
    Q, _ = np.linalg.qr(T, mode="complete")
    np.testing.assert_allclose(X @ Q[:, 3:], 0, atol=1e-12)
    np.testing.assert_allclose(X, np.linalg.pinv(T), atol=1e-12)


def test_left_inverse_rejects_rank_deficient():
    with pytest.raises(RankError):
        moore_penrose_left_inverse(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(RankError):
        moore_penrose_left_inverse(np.ones((2, 3)))


@settings(max_examples=40)
@given(st.integers(1, 5), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_left_inverse_property(n, extra, seed):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal((n + extra, n)) + 1j * rng.standard_normal((n + extra, n))
    X = moore_penrose_left_inverse(T)
    np.testing.assert_allclose(X @ T, np.eye(n), atol=1e-9 * np.linalg.cond(T))
    np.testing.assert_allclose(X, np.linalg.pinv(T), atol=1e-9 * np.linalg.cond(T) ** 2)


# -- contour projection -----------------------------------------------------------


def test_riesz_diagonal_geometric_convergence():
    T = np.diag([0.5, 2.0])
    errs = [np.linalg.norm(riesz_projection(T, Q) - np.diag([1.0, 0.0]), 2) for Q in (4, 8, 16, 32)]
    for a, b in zip(errs, errs[1:]):
        assert b <= a**1.5 or b <= 1e-14


def test_riesz_of_contraction_is_identity():
    T = np.array([[0.3, 0.2], [0.0, -0.4]])
    np.testing.assert_allclose(riesz_projection(T, 64), np.eye(2), atol=1e-14)


def test_riesz_cyclic_saddle_matches_eigenprojection():
    T = assemble_periodic(SADDLE, 8)
    res = riesz_projection(T, 256, full=True)
    ref = eigenprojection_inside(T.to_matrix())
    assert np.linalg.norm(res.projection - ref, 2) <= 1e-6
    assert res.idempotency <= 1e-8
    # library eigenprojection agrees with the oracle
    np.testing.assert_allclose(eigenprojection(T), ref, atol=1e-10)


def test_riesz_adaptive_doubling_stops_at_target():
    T = assemble_periodic(SADDLE, 8)
    res = riesz_projection(T, full=True)
    assert res.nodes == 256
    assert res.idempotency <= 1e-8
    assert res.history[-1] == (res.nodes, res.idempotency)


def test_riesz_names_the_bad_node():
    with pytest.raises(RankError, match="z = "):
        riesz_projection(np.diag([1.0, 3.0]), 4)


# -- pointwise projections ----------------------------------------------------------


def test_extract_from_block_diagonal():
    blocks = [np.diag([1.0, 0.0])] * 3
    P = np.kron(np.eye(3), np.diag([1.0, 0.0]))
    fam = extract_pointwise_projections(P, 3, 2)
    np.testing.assert_array_equal(fam.matrices, blocks)
    assert fam.off_block_mass == 0
    assert fam.ranks == [1, 1, 1]
    assert fam.idempotency == 0


def test_averaging_projection_has_off_block_mass():
    N = 4
    P = np.ones((N, N)) / N
    fam = extract_pointwise_projections(P, N, 1)
    assert fam.off_block_mass >= 0.5


def test_extract_shape_error():
    with pytest.raises(ValueError):
        extract_pointwise_projections(np.eye(5), 2, 2)


def test_projection_family_csv():
    fam = ProjectionFamily.from_matrices(np.array([0.0, 1.0]), np.array([np.eye(1), np.zeros((1, 1))]))
    lines = fam.to_csv().strip().split("\n")
    assert lines[0] == "x,row,col,re,im"
    assert len(lines) == 3


def test_saddle_family_projection_is_coordinate_projection():
    fam = constant_family(SADDLE, 16)
    P, res = projections_for_family(fam)
    assert P.off_block_mass <= 1e-8
    assert res.idempotency <= 1e-8
    for Pj in P.matrices:
        np.testing.assert_allclose(Pj, np.diag([1.0, 0.0]), atol=1e-8)


# -- dichotomy ---------------------------------------------------------------------


def test_saddle_dichotomy_exact():
    fam = constant_family(SADDLE, 16)
    P = ProjectionFamily.from_matrices(fam.grid, np.array([np.diag([1.0, 0.0])] * 17))
    rep = verify_dichotomy(fam, P)
    assert rep.verdict == "hyperbolic"
    assert rep.M == pytest.approx(1.0, abs=1e-10)
    assert rep.lam == pytest.approx(1.0, abs=1e-10)
    assert rep.rank == 1
    assert rep.spectrally_hyperbolic


def test_sink_is_uniformly_stable():
    fam = constant_family(np.diag([-3.0, -1.0]), 16)
    P = ProjectionFamily.from_matrices(fam.grid, np.array([np.eye(2)] * 17))
    rep = verify_dichotomy(fam, P)
    assert rep.verdict == "uniformly_stable"
    assert rep.lam == pytest.approx(1.0, abs=1e-10)
    assert rep.M == pytest.approx(1.0, abs=1e-10)


def test_wrong_projection_is_rejected():
    fam = constant_family(SADDLE, 16)
    P = ProjectionFamily.from_matrices(fam.grid, np.array([np.diag([0.0, 1.0])] * 17))
    assert verify_dichotomy(fam, P).verdict == "none"


def test_rank_jump_is_an_error():
    fam = constant_family(SADDLE, 4)
    mats = np.array([np.diag([1.0, 0.0])] * 4 + [np.eye(2)])
    with pytest.raises(RankError):
        verify_dichotomy(fam, ProjectionFamily.from_matrices(fam.grid, mats))


def test_vinograd_dichotomy_from_riesz():
    fam = build_family(vinograd(1.5), 0.0, 2 * math.pi / 32, 32)
    P, _ = projections_for_family(fam)
    rep = verify_dichotomy(fam, P, provenance="riesz")
    assert rep.verdict == "hyperbolic"
    assert rep.rank == 1
    assert rep.lam >= 0.4
    assert rep.growth_rate == pytest.approx(0.5, abs=1e-3)
    assert rep.decay_rate == pytest.approx(1.0, abs=1e-3)
    # Im P(0) is the decaying solution's direction (sin 0, cos 0) = e_2
    np.testing.assert_allclose(P.matrices[0] @ [0.0, 1.0], [0.0, 1.0], atol=1e-6)


@settings(max_examples=15)
@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_diagonal_saddle_rates_exact(a, b):
    fam = constant_family(np.diag([-a, b]), 8)
    P = ProjectionFamily.from_matrices(fam.grid, np.array([np.diag([1.0, 0.0])] * 9))
    rep = verify_dichotomy(fam, P)
    assert rep.decay_rate == pytest.approx(a, rel=1e-9)
    assert rep.growth_rate == pytest.approx(b, rel=1e-9)
    assert rep.lam == pytest.approx(min(a, b), rel=1e-9)
    assert rep.M == pytest.approx(1.0, abs=1e-9)


# -- projection conditions on the operator --------------------------------------------


def test_conditions_hold_for_saddle():
    T = assemble_periodic(SADDLE, 8)
    P = riesz_projection(T, 256)
    rep = check_projection_conditions(T, P)
    assert all(rep.holds.values()), rep.holds
    assert rep.stable_dim == 8 and rep.kernel_dim == 8
    assert rep.stable_radius == pytest.approx(math.exp(-math.pi / 4), rel=1e-8)


def test_conditions_fail_for_wrong_projection():
    T = assemble_periodic(SADDLE, 4)
    P = np.kron(np.eye(4), np.diag([0.0, 1.0]))
    rep = check_projection_conditions(T, P)
    assert rep.holds["commutes"]
    assert not rep.holds["stable_part_contracts"]
    assert not rep.holds["unstable_part_left_invertible"]


def test_singular_weight_has_zero_left_invertibility():
    W = np.array([np.diag([1.0, 0.0])] * 4)
    T = BlockShiftOperator(W, "cyclic")
    rep = check_projection_conditions(T, np.zeros((8, 8)))
    assert rep.left_invertibility == 0
    assert not rep.holds["unstable_part_left_invertible"]


def test_averaging_projection_not_multiplication_invariant():
    # the zero operator commutes with everything and annihilates Ker P, so the
    # whole mean-zero kernel lies outside the stable intersection
    N = 4
    T = BlockShiftOperator(np.zeros((N, 1, 1)), "cyclic")
    P = np.ones((N, N)) / N
    rep = check_projection_conditions(T, P)
    assert rep.holds["commutes"]
    assert rep.intersection_rank == 0
    # ||(11^T / N) e_j e_j^T (I - 11^T / N)|| = sqrt(N - 1) / N
    assert rep.leakage == pytest.approx(math.sqrt(N - 1) / N, rel=1e-12)
    assert not rep.holds["multiplication_invariant"]


def test_invertible_shift_has_full_intersection():
    N = 4
    T = BlockShiftOperator(np.ones((N, 1, 1)), "cyclic")
    rep = check_projection_conditions(T, np.ones((N, N)) / N)
    assert rep.intersection_rank == N - 1
    assert rep.leakage == 0
    assert rep.holds["multiplication_invariant"]


def test_non_projection_rejected():
    with pytest.raises(ValueError):
        check_projection_conditions(np.eye(2), 2 * np.eye(2), block=1)


def test_floquet_consistency_for_vinograd():
    fam = build_family(vinograd(1.5), 0.0, 2 * math.pi / 32, 32)
    T = assemble_line(fam)
    P = riesz_projection(T)
    rep = check_projection_conditions(T, P)
    assert all(rep.holds.values()), rep.holds
    # one stable Floquet direction per cell
    assert rep.stable_dim == 32
