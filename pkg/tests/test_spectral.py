from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ratmat import construct, extract_spectral, from_spectral, gauge_act
from ratmat.errors import GaugeDegenerate, NonGeneric, WrongPoleCount
from ratmat.sampling import random_spectral, rng_for
from ratmat.spectral import (SpectralPoint, SpectralType, inverse_residues_direct,
                             inverse_residues_phi, inverse_residues_transfer,
                             inverse_spectral_data, phi, residues_direct, residues_phi)

from conftest import type_a


def test_fixture_a_residues(TA, P0):
    L1, L2 = residues_direct(TA, P0)
    np.testing.assert_allclose(L1, [[-4, 0], [5, 0]], atol=1e-12)
    np.testing.assert_allclose(L2, [[0, 0], [-4, -2]], atol=1e-12)
    for a, b in zip(residues_phi(TA, P0), (L1, L2)):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_fixture_a_phi(TA, P0):
    assert phi(TA, P0, TA.z1, TA.zeta2) == 4
    assert phi(TA, P0, TA.zeta1, TA.z2) == -6


def test_fixture_a_inverse_forms(TA, P0, LA):
    ref = [LA.inverse.residue(i) for i in range(2)]
    for forms in (inverse_residues_direct(TA, P0), inverse_residues_phi(TA, P0),
                  inverse_residues_transfer(TA, P0)):
        for a, b in zip(forms, ref):
            np.testing.assert_allclose(a, b, atol=1e-10)
    np.testing.assert_allclose(ref[0], [[-1, 0], [1.5, 0]], atol=1e-10)


def test_inverse_spectral_data(TA, P0):
    Tm, Pm = inverse_spectral_data(TA, P0)
    assert Tm.mu == -0.5
    assert Pm.pi == 0.625 and Pm.gamma == 5
    assert (Tm.z1, Tm.zeta1) == (TA.zeta1, TA.z1)
    T2, P2 = inverse_spectral_data(Tm, Pm)
    assert T2 == TA and abs(P2.pi - P0.pi) < 1e-15


def test_extract_fixture(LA, TA, P0):
    T, P = extract_spectral(LA)
    for name in ("rho1", "rho2", "z1", "z2", "zeta1", "zeta2", "k1", "k2", "mu"):
        assert abs(getattr(T, name) - getattr(TA, name)) < 1e-12, name
    assert abs(P.gamma - 5) < 1e-12 and abs(P.pi - 3) < 1e-12


def test_fixture_b_extract(LB):
    T, P = extract_spectral(LB)
    assert abs(T.k1 + 4) < 1e-12 and abs(P.pi - 3) < 1e-12


def test_type_validation():
    with pytest.raises(NonGeneric):
        replace(type_a(), k1=0)
    with pytest.raises(GaugeDegenerate):
        replace(type_a(), mu=0)
    with pytest.raises(NonGeneric):
        replace(type_a(), rho2=2)
    with pytest.raises(NonGeneric):
        replace(type_a(), zeta1=1, k1=-1, k2=-2)


def test_point_validation(TA):
    with pytest.raises(NonGeneric):
        from_spectral(TA, SpectralPoint(5, 0))
    with pytest.raises(NonGeneric):
        from_spectral(TA, SpectralPoint(2, 1))


def test_extract_rejects_shapes(LA):
    three = construct([1, 2, 3], [0, 1], [(np.ones(3), np.ones(3)), (np.arange(3.0) + 1, np.ones(3))])
    with pytest.raises(NonGeneric):
        extract_spectral(three)
    one = construct([2, 1], [0], [np.array([[1, 0], [1, 0]])])
    with pytest.raises(WrongPoleCount):
        extract_spectral(one)
    diag = construct([2, 1], [0, 1], [np.array([[1, 0], [0, 0]]), np.array([[0, 0], [0, 2]])])
    with pytest.raises(GaugeDegenerate):
        extract_spectral(diag)


def test_zero_on_pole_rejected():
    with pytest.raises(NonGeneric):
        construct([2, 1], [0, 1], [np.array([[1, 0], [0, 0]]), np.array([[0, 0], [0, 1]])])


def test_l21_zero_is_gamma(LA):
    assert abs(LA(5)[1, 0]) < 1e-14


spectral_data = st.builds(lambda seed: random_spectral(rng_for(seed)), st.integers(0, 10**6))


@given(spectral_data)
def test_roundtrip(data):
    T, P = data
    T2, P2 = extract_spectral(from_spectral(T, P))
    for name in ("rho1", "rho2", "z1", "z2", "zeta1", "zeta2", "k1", "k2", "mu"):
        a, b = getattr(T, name), getattr(T2, name)
        assert abs(a - b) <= 1e-10 * max(1, abs(a))
    assert abs(P.gamma - P2.gamma) <= 1e-10 * max(1, abs(P.gamma))
    assert abs(P.pi - P2.pi) <= 1e-10 * max(1, abs(P.pi))


@given(spectral_data)
def test_closed_forms_agree(data):
    T, P = data
    A, B = residues_direct(T, P), residues_phi(T, P)
    scale = max(1, max(np.abs(a).max() for a in A))
    for a, b in zip(A, B):
        assert np.abs(a - b).max() <= 1e-12 * scale
    M = from_spectral(T, P).inverse
    for a, b, c in zip(inverse_residues_direct(T, P), inverse_residues_transfer(T, P),
                       [M.residue(0), M.residue(1)]):
        sc = max(1, np.abs(c).max())
        assert np.abs(a - c).max() <= 1e-9 * sc and np.abs(b - c).max() <= 1e-9 * sc


@given(spectral_data)
def test_trace_identity_and_rank(data):
    T, P = data
    L = from_spectral(T, P)
    Linf = L.L_inf
    lhs = Linf[0, 0] / T.rho1 + Linf[1, 1] / T.rho2
    assert abs(lhs - (T.z1 - T.zeta1 + T.z2 - T.zeta2)) <= 1e-10 * max(1, abs(lhs))


@given(spectral_data, st.complex_numbers(min_magnitude=0.2, max_magnitude=5, allow_nan=False,
                                         allow_infinity=False))
def test_gauge_covariance(data, t):
    T, P = data
    L = from_spectral(T, P)
    Tg, Pg = extract_spectral(gauge_act(L, [1, t]))
    assert abs(Tg.mu - t * T.mu) <= 1e-10 * abs(t)
    assert abs(Pg.gamma - P.gamma) <= 1e-9 * max(1, abs(P.gamma))
    assert abs(Pg.pi - P.pi) <= 1e-9 * max(1, abs(P.pi))


def test_type_json(TA):
    data = TA.to_json()
    assert data["mu"] == [1.0, 0.0] and data["zeta"] == [[2.0, 0.0], [3.0, 0.0]]
    assert SpectralType(rho1=2, rho2=1, zeta1=2, zeta2=3, z1=0, z2=1, k1=-2, k2=-2, mu=1) == TA
