import numpy as np
import pytest
from hypothesis import given, strategies as st

from ratmat import construct, left_divisor, right_divisor
from ratmat import refactorization as rf
from ratmat.errors import DegenerateCoordinates, LogOfZero, ShiftCollision, WrongPoleCount
from ratmat.sampling import random_quadratic, random_spectral, rng_for
from ratmat.spectral import from_spectral
from ratmat.verify import gradient_fd_residual

from conftest import regular_points


def _eta_inputs(L):
    C = rf.coordinates_of(L)
    params = rf.FlowParams.of(L)
    return (params.L0 * C.x2, C.x1row), (C.y2, C.y1row), params


def test_fixture_b_isomonodromic(LB):
    Lt = rf.isomonodromic_step(LB)
    np.testing.assert_allclose(Lt.poles, [-1, 1], atol=1e-12)
    np.testing.assert_allclose(Lt.zeros, [5, 3], atol=1e-12)
    assert abs(Lt(2)[1, 0] - 20 / 3) < 1e-12
    inv = LB.inverse
    B1r, B2l = right_divisor(LB, inv, 0), left_divisor(LB, inv, 1)
    for z in (2.5, 4j, -3):
        np.testing.assert_allclose(Lt(z), B1r(z + 1) @ B2l(z) @ np.diag(LB.L0), atol=1e-11)


def test_fixture_b_isospectral(LB):
    Lt = rf.isospectral_step(LB)
    np.testing.assert_allclose(Lt.poles, LB.poles)
    np.testing.assert_allclose(Lt.zeros, LB.zeros, atol=1e-12)
    assert max(rf.refactorization_residuals(LB, Lt).values()) < 1e-10
    for z in (2.5, -1j):
        assert abs(np.linalg.det(Lt(z)) - np.linalg.det(LB(z))) < 1e-10


def test_fixture_a_shift_collision(LA):
    with pytest.raises(ShiftCollision):
        rf.isomonodromic_step(LA)
    with pytest.raises(ShiftCollision) as info:
        rf.trajectory(LA, 3, "isomonodromic")
    assert info.value.step == 1


def test_fixture_a_coordinates_degenerate(LA):
    C = rf.coordinates_of(LA)
    params = rf.FlowParams.of(LA)
    with pytest.raises(LogOfZero):
        rf.lagrangian(C.X, C.Y, params)
    with pytest.raises(DegenerateCoordinates):
        rf.recover_vectors(C, params)
    Qp, Q, params = _eta_inputs(LA)
    for form in rf.ETA_FORMS:
        with pytest.raises(DegenerateCoordinates):
            rf.eta(Qp, Q, params, form)


def test_fixture_b_eta(LB):
    Qp, Q, params = _eta_inputs(LB)
    L = rf.eta(Qp, Q, params)
    np.testing.assert_allclose(L.poles, LB.poles)
    for z in regular_points(LB, 5):
        np.testing.assert_allclose(L(z), LB(z), atol=1e-10)


def test_wrong_pole_count():
    L = construct([2, 1], [0], [np.array([[1, 0], [1, 0]])])
    with pytest.raises(WrongPoleCount):
        rf.coordinates_of(L)
    with pytest.raises(WrongPoleCount):
        rf.isospectral_step(L)


def test_unknown_modes(LB):
    with pytest.raises(ValueError):
        rf.step(LB, "sideways")
    with pytest.raises(ValueError):
        rf.FlowParams.of(LB, mode="sideways")
    with pytest.raises(ValueError):
        rf.trajectory(LB, 0)


def test_projective_normalizer():
    n = rf.ProjectiveNormalizer(threshold=0.1)
    np.testing.assert_allclose(n([1, 2]), [0.5, 1])
    np.testing.assert_allclose(n([3, 2]), [1.5, 1])   # pivot kept
    np.testing.assert_allclose(n([4, 0.1]), [1, 0.025])  # pivot moved
    assert n.pivot == 0


quadratics = st.builds(lambda seed: random_quadratic(rng_for(seed)), st.integers(0, 10**6))


@given(quadratics)
def test_recovery_projectors(L):
    assert max(rf.recovery_residuals(L).values()) <= 1e-8


@given(quadratics)
def test_gradients_match_finite_differences(L):
    C = rf.coordinates_of(L)
    assert gradient_fd_residual(C.X, C.Y, rf.FlowParams.of(L)) <= 1e-5


@given(quadratics)
def test_eta_roundtrip(L):
    assert rf.eta_roundtrip(L, "lemma33") <= 1e-9
    Qp, Q, params = _eta_inputs(L)
    back = rf.eta(Qp, Q, params)
    for z in regular_points(L, 3):
        assert np.abs(back(z) - L(z)).max() <= 1e-9 * max(1, np.abs(L(z)).max())


@given(quadratics)
def test_eta_form_resolution(L):
    chosen, outcome = rf.resolve_eta_form(L)
    assert chosen == "lemma33"
    assert outcome["printed"] > 1e-6


@given(quadratics)
def test_isospectral_preserves_divisor(L):
    Lt = rf.isospectral_step(L)
    assert np.abs(Lt.zeros - L.zeros).max() <= 1e-9 * max(1, np.abs(L.zeros).max())
    assert max(rf.refactorization_residuals(L, Lt).values()) <= 1e-8


@given(quadratics)
def test_euler_lagrange_isospectral(L):
    Ls = rf.trajectory(L, 3, "isospectral")
    for rel, ang in rf.euler_lagrange_residuals(Ls, "isospectral"):
        assert ang <= 1e-6 and rel <= 1e-6


@given(st.integers(0, 10**6))
def test_euler_lagrange_isomonodromic(seed):
    L = from_spectral(*random_spectral(rng_for(seed), steps=3))
    Ls = rf.trajectory(L, 3, "isomonodromic")
    np.testing.assert_allclose(Ls[-1].poles, [L.poles[0] - 3, L.poles[1]])
    np.testing.assert_allclose(Ls[-1].zeros, [L.zeros[0] - 3, L.zeros[1]], atol=1e-8)
    for rel, ang in rf.euler_lagrange_residuals(Ls, "isomonodromic"):
        assert ang <= 1e-6 and rel <= 1e-6
