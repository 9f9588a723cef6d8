import numpy as np
import pytest
from dataclasses import replace
from hypothesis import given
from hypothesis import strategies as st

from epi_signal.epi_core import CompartmentState, EpiParams
from epi_signal.policy import (
    DistortionRecord,
    EstimatedModel,
    PolicyState,
    adaptive_update,
    distortion,
    distortion_gradient,
    no_interaction_policy,
    random_policy,
    recommend,
    weighted_distortion,
)

EPI = EpiParams.baseline()
STATE0 = CompartmentState(9700.0, 0.0, 60.0, 50.0, 150.0, 40.0)


def model(psi_hat=0.05, eta_hat=0.3, coverage=0.0):
    return EstimatedModel(EPI, STATE0, psi_hat, eta_hat, coverage)


def policy(**kw):
    base = dict(recommended_psi=0.05, recommended_eta=0.3)
    base.update(kw)
    return PolicyState(**base)


def test_policy_state_invariants():
    with pytest.raises(ValueError):
        PolicyState(0.3, 0.1, psi_max=0.2)
    with pytest.raises(ValueError):
        PolicyState(0.1, 0.95, eta_max=0.9)
    with pytest.raises(ValueError):
        PolicyState(0.1, 0.1, step_size=0.0)


def test_distortion_oracles():
    assert distortion(7.5, 7.5) == 0.0
    assert distortion(7.5, 5.0) == pytest.approx(6.25)
    rec = DistortionRecord(7.5, 5.0)
    assert rec.distortion == pytest.approx(6.25) and rec.exceeds
    with pytest.raises(ValueError):
        distortion(-1.0, 0.0)


def test_weighted_distortion_point_mass():
    pm = np.array([1.0, 0.0, 0.0, 0.0])
    belief = np.eye(4)
    theta = np.zeros((3, 4))
    theta[1, 0] = 1.0
    theta[0, 1:] = 1.0
    errors = np.zeros((3, 4))
    errors[1, 0] = distortion(7.5, 5.0)
    assert weighted_distortion(pm, belief, theta, errors) == pytest.approx(6.25)


def test_below_threshold_is_identity():
    s = policy()
    m = model()
    predicted = m.predict_H(s.corrections)
    rec = DistortionRecord(predicted + 0.5, predicted, threshold=1.0)
    assert adaptive_update(s, rec, m) is s


def test_under_prediction_raises_corrections():
    s = policy()
    m = model()
    predicted = m.predict_H(s.corrections)
    rec = DistortionRecord(predicted + 5.0, predicted)
    out = adaptive_update(s, rec, m)
    assert out.correction_psi > s.correction_psi
    assert out.correction_eta > s.correction_eta
    # finite-difference oracle: raising psi_tilde raises predicted H
    grad = distortion_gradient(m, s, rec.observed_H)
    assert grad[0] < 0.0


def test_over_prediction_keeps_corrections_nonnegative():
    s = policy(correction_psi=0.01, correction_eta=0.01)
    m = model()
    predicted = m.predict_H(s.corrections)
    out = adaptive_update(s, DistortionRecord(max(0.0, predicted - 5.0), predicted), m)
    assert out.correction_psi <= 0.01 and out.correction_eta <= 0.01
    assert out.correction_psi >= 0.0 and out.correction_eta >= 0.0


def test_corrections_clamped_at_cap():
    s = policy(correction_psi=0.2, correction_eta=0.9)
    m = model()
    predicted = m.predict_H(s.corrections)
    out = adaptive_update(s, DistortionRecord(predicted + 50.0, predicted), m)
    assert out.correction_psi == 0.2 and out.correction_eta == 0.9
    assert out.recommended_psi <= 0.2 and out.recommended_eta <= 0.9


@given(st.floats(0.0, 0.2), st.floats(0.0, 0.9), st.floats(0.0, 40.0))
def test_recommendations_within_caps(cpsi, ceta, observed):
    s = policy(correction_psi=cpsi, correction_eta=ceta, control_step=0.03)
    m = model()
    out = adaptive_update(s, DistortionRecord(observed, m.predict_H(s.corrections)), m)
    assert 0.0 <= out.recommended_psi <= out.psi_max
    assert 0.0 <= out.recommended_eta <= out.eta_max


def test_gradient_step_halving_sanity():
    s = policy(correction_psi=0.01, correction_eta=0.05)
    m = model()
    observed = m.predict_H(s.corrections) + 3.0
    g1 = distortion_gradient(m, s, observed, h=1e-4)
    g2 = distortion_gradient(m, s, observed, h=5e-5)
    np.testing.assert_allclose(g1, g2, rtol=1e-6)


def test_non_finite_gradient_skips_update():
    s = policy()
    m = model()
    with pytest.warns(RuntimeWarning):
        out = adaptive_update(s, DistortionRecord(float("inf"), 1.0), m)
    assert out is s


def test_recommend_adds_corrections():
    s = policy(correction_psi=0.02, correction_eta=0.1)
    out = recommend(s, model(psi_hat=0.05, eta_hat=0.3))
    assert out.recommended_psi == pytest.approx(0.07)
    assert out.recommended_eta == pytest.approx(0.4)


def test_random_policy():
    s = policy(recommended_psi=0.1, recommended_eta=0.45)
    assert random_policy(s, 0.0, 1) is s
    assert random_policy(s, 0.01, 7) == random_policy(s, 0.01, 7)
    rng = np.random.default_rng(3)
    sigma = 0.001
    draws = np.array([random_policy(s, sigma, rng).recommended_psi - 0.1 for _ in range(10_000)])
    assert abs(draws.mean()) < 3 * sigma / np.sqrt(10_000)
    with pytest.raises(ValueError):
        random_policy(s, -1.0, 0)


def test_random_policy_clamps():
    s = policy(recommended_psi=0.19, recommended_eta=0.85)
    for seed in range(50):
        out = random_policy(s, (1.0, 1.0), seed)
        assert 0.0 <= out.recommended_psi <= 0.2 and 0.0 <= out.recommended_eta <= 0.9


def test_no_interaction_policy():
    s = no_interaction_policy(0.005, 0.01)
    assert (s.recommended_psi, s.recommended_eta) == (0.005, 0.01)
    assert replace(s) == s
