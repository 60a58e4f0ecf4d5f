import logging
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ratmat import dpv
from ratmat.errors import GenericityHalt, OracleMismatch, PiAtRho, ShiftCollision
from ratmat.sampling import random_state, rng_for
from ratmat.spectral import SpectralPoint, from_spectral


@pytest.fixture
def SB(TB, P0):
    return dpv.DpvState(TB, P0)


def test_fixture_b_recurrence(TB, P0):
    mu, gamma, pi_printed, pi_swapped = dpv.recurrence(TB, P0)
    assert (mu, gamma) == (4, -3)
    assert abs(pi_swapped - 4 / 9) < 1e-15
    assert abs(pi_printed - 4 / 9) > 0.5


def test_fixture_b_oracle(SB):
    oracle, raw = dpv.oracle_step(SB)
    assert abs(oracle.T.mu - 4) < 1e-10
    assert abs(oracle.P.gamma + 3) < 1e-10
    assert abs(oracle.P.pi - 4 / 9) < 1e-10
    assert (oracle.T.z1, oracle.T.zeta1) == (-1, 5)


def test_fixture_b_arbitrated(SB, caplog):
    with caplog.at_level(logging.INFO, logger="ratmat.dpv"):
        rep = dpv.dpv_step(SB)
    assert rep.form_used == "swapped"
    assert rep.max_discrepancy <= 1e-10
    assert abs(rep.discrepancies["printed"] - 0.556) < 1e-3
    assert "swapped" in caplog.text
    S = rep.recurrence_result
    assert S.step == 1 and (S.T.mu, S.P.gamma) == (4, -3)


def test_printed_form_reports_mismatch(SB):
    rep = dpv.dpv_step(SB, "printed")
    assert rep.form_used == "printed" and rep.max_discrepancy > 0.5


def test_fixture_b_halts_on_collision(SB):
    with pytest.raises(ShiftCollision) as info:
        dpv.trajectory(SB, 5)
    assert info.value.step == 3
    assert len(info.value.reports) == 2


def test_fixture_a_halts(TA, P0):
    with pytest.raises(ShiftCollision) as info:
        dpv.trajectory(dpv.DpvState(TA, P0), 1)
    assert info.value.step == 1 and info.value.reports == ()


def test_pi_at_rho(TB):
    with pytest.raises(PiAtRho):
        dpv.check_state(dpv.DpvState(TB, SpectralPoint(5, 2)))


def test_unknown_form(SB):
    with pytest.raises(ValueError):
        dpv.dpv_step(SB, "other")


def test_oracle_mismatch_is_a_halt():
    assert issubclass(OracleMismatch, GenericityHalt)


def test_mu_identity_fixture_b(LB):
    r = dpv.mu_identity_report(LB)
    assert abs(r["b1c1"] + 2) < 1e-12
    assert abs(r["identity_lhs"] + 8) < 1e-12
    assert abs(r["identity_rhs"] + 8) < 1e-12
    assert r["max"] <= 1e-10


def test_linf_split(LA, LB):
    assert dpv.linf_decomposition_residual(LA) < 1e-12
    assert dpv.linf_decomposition_residual(LB) < 1e-12


def test_state_json(SB):
    data = SB.to_json()
    assert data["step"] == 0 and data["pi"] == [3.0, 0.0]


def test_batch_matches_single():
    states = [random_state(rng_for(3, i)) for i in range(20)]
    batch = dpv.batch_recurrence(states)
    for i, S in enumerate(states):
        single = dpv.recurrence(S.T, S.P)
        for j in range(4):
            assert abs(batch[j][i] - single[j]) <= 1e-13 * max(1, abs(single[j]))


def test_relative_discrepancy():
    assert dpv.relative_discrepancy(1.5, 1.0) == 0.5
    assert dpv.relative_discrepancy(10.0, 8.0) == 0.25


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_random_trajectories_follow_oracle(seed):
    S = random_state(rng_for(seed), steps=5)
    reports = dpv.trajectory(S, 5)
    assert len(reports) == 5
    for rep in reports:
        assert rep.form_used == "swapped"
        assert rep.max_discrepancy <= 1e-8
        assert rep.discrepancies["rho_k_drift"] <= 1e-9
    last = reports[-1].recurrence_result
    assert abs(last.T.z1 - (S.T.z1 - 5)) < 1e-12
    L = from_spectral(S.T, S.P)
    assert dpv.mu_identity_check(L) <= 1e-8
