import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epi_signal.epi_core import BehaviorRates, EpiParams
from epi_signal.equilibria import (
    LINEARIZED,
    PARTIAL_POOLING,
    POOLING,
    SEPARATING,
    EquilibriumKind,
    NoInteriorSolutionError,
    alpha_approximation,
    alpha_approximation_value,
    beta_sensitivity,
    build_strategy,
    estimated_rates,
    existence_window,
    fixed_point_residual,
    pooled_message_posterior,
    rc_of_alpha,
    solve_alpha_fixed_point,
)
from epi_signal.signaling import GameParams, pooling_strategy, separating_strategy

EPI = EpiParams.baseline()
GAME = GameParams()
UNIFORM = (0.25, 0.25, 0.25, 0.25)

alphas = st.floats(0.0, 1.0)


def test_kind_validation():
    with pytest.raises(ValueError):
        EquilibriumKind("mixed")
    with pytest.raises(ValueError):
        EquilibriumKind.partial_pooling(1.5)


def test_build_strategy_limits():
    zero = build_strategy(EquilibriumKind.partial_pooling(0.0)).matrix
    np.testing.assert_array_equal(zero[1:3], separating_strategy().matrix[1:3])
    # the piecewise matrix pools status 11 at every alpha
    np.testing.assert_array_equal(zero[3], [1.0, 0.0, 0.0, 0.0])
    assert build_strategy(EquilibriumKind.partial_pooling(1.0)) == pooling_strategy()
    assert build_strategy(EquilibriumKind.separating()) == separating_strategy()
    assert build_strategy(EquilibriumKind.pooling()) == pooling_strategy()
    g = build_strategy(EquilibriumKind.partial_pooling(0.5)).matrix
    assert (np.array(UNIFORM) @ g)[0] == pytest.approx(0.75)


@given(alphas)
def test_pooled_posterior_identity(a):
    pi = np.array([0.1, 0.2, 0.3, 0.4])
    post = pooled_message_posterior(pi, a)
    mass = pi[0] + a * (pi[1] + pi[2]) + pi[3]
    np.testing.assert_allclose(post * mass, [pi[0], a * pi[1], a * pi[2], pi[3]], atol=1e-15)


def test_pooled_posterior_oracles():
    pi = (0.1, 0.2, 0.3, 0.4)
    assert pooled_message_posterior(pi, 0.0)[1] == 0.0
    assert pooled_message_posterior(pi, 1.0)[1] == pytest.approx(0.2, rel=1e-15)
    assert pooled_message_posterior(UNIFORM, 0.5)[1] == pytest.approx(1 / 6)
    with pytest.raises(ValueError):
        pooled_message_posterior((0.0, 0.5, 0.5, 0.0), 0.0)


def test_estimated_rates():
    pi = (0.1, 0.2, 0.3, 0.4)
    assert estimated_rates(pi, 0.0)[0] == pytest.approx(0.1 + 0.2 + 0.4)
    assert estimated_rates(pi, 1.0) == pytest.approx((1.0, 1.0))
    assert estimated_rates(UNIFORM, 0.5)[0] == pytest.approx(0.875)


@given(alphas, alphas)
def test_estimated_rates_monotone(a, b):
    lo, hi = sorted((a, b))
    pl, el = estimated_rates(UNIFORM, lo)
    ph, eh = estimated_rates(UNIFORM, hi)
    assert ph >= pl and eh >= el


def test_rc_of_alpha_baseline():
    at0 = rc_of_alpha(EPI, UNIFORM, 0.0)
    assert at0.rc > 0
    assert at0.beta_sens == pytest.approx(4.79e-4, rel=1e-2)
    assert at0.beta_sens > 0
    lin = rc_of_alpha(EPI, UNIFORM, 0.3, mode=LINEARIZED)
    assert lin.rc == pytest.approx(at0.rc + 0.3 * at0.beta_sens)
    with pytest.raises(ValueError):
        rc_of_alpha(EPI, UNIFORM, 0.3, mode="quadratic")


def test_beta_sens_richardson():
    b1 = beta_sensitivity(EPI, UNIFORM, step=1e-4)
    b2 = beta_sensitivity(EPI, UNIFORM, step=5e-5)
    richardson = (4 * b2 - b1) / 3
    assert abs(b1 - richardson) < 1e-6


def test_existence_window_baseline():
    v = existence_window(EPI, GAME, UNIFORM)
    assert v.window.lower_bound == pytest.approx(0.223745, abs=1e-6)
    assert v.window.upper_bound == pytest.approx(0.223853, abs=1e-6)
    assert v.kind == POOLING
    assert "separation" in v.note


def test_existence_window_verdicts():
    v = existence_window(EPI, GAME, UNIFORM)
    lo, hi = v.window.lower_bound, v.window.upper_bound
    assert existence_window(EPI, replace(GAME, semantic_weight=0.5 * lo), UNIFORM).kind == POOLING
    assert existence_window(EPI, replace(GAME, semantic_weight=0.5 * (lo + hi)), UNIFORM).kind == PARTIAL_POOLING
    assert existence_window(EPI, replace(GAME, semantic_weight=2 * hi), UNIFORM).kind == SEPARATING


def test_existence_window_incentive_free():
    v = existence_window(EPI, replace(GAME, mask_lie_incentive=0.0), UNIFORM)
    assert v.window.lower_bound == 0.0
    assert v.kind == SEPARATING


def test_fixed_point_boundary_and_errors():
    sol = solve_alpha_fixed_point(EPI, replace(GAME, mask_lie_incentive=0.0), UNIFORM)
    assert sol.mixing_alpha == 0.0 and sol.boundary
    # baseline window has no sign change: residual(1) <= 0
    lam = 0.5 * sum((0.223745, 0.223853))
    with pytest.raises(NoInteriorSolutionError):
        solve_alpha_fixed_point(EPI, replace(GAME, semantic_weight=lam), UNIFORM)
    assert fixed_point_residual(EPI, replace(GAME, semantic_weight=lam), UNIFORM, 1.0) <= 0.0


def test_fixed_point_converges_with_bracket():
    game = replace(GAME, semantic_weight=2.0)
    sol = solve_alpha_fixed_point(EPI, game, UNIFORM)
    assert 0.0 < sol.mixing_alpha < 1.0
    assert abs(fixed_point_residual(EPI, game, UNIFORM, sol.mixing_alpha)) < 1e-8
    assert fixed_point_residual(EPI, game, UNIFORM, 0.0) < 0 < fixed_point_residual(EPI, game, UNIFORM, 1.0)


def test_alpha_approximation_oracles():
    value = alpha_approximation_value(GameParams(mask_lie_incentive=0.5, semantic_weight=0.5, economic_factor=0.5), 1.0, 0.5)
    assert value == pytest.approx(0.30327 / 0.57582, rel=1e-4)
    assert value == pytest.approx(0.5267, abs=1e-4)
    assert alpha_approximation(EPI, replace(GAME, mask_lie_incentive=0.0), UNIFORM) == 0.0
    assert alpha_approximation(EPI, replace(GAME, semantic_weight=1e12), UNIFORM) < 1e-10


def test_alpha_approximation_uniform_prior_small_alpha():
    # approximation error scales like alpha* pi01 / (pi00 + pi11); small here
    game = replace(GAME, semantic_weight=20.0)
    sol = solve_alpha_fixed_point(EPI, game, UNIFORM, mode=LINEARIZED)
    approx = alpha_approximation(EPI, game, UNIFORM)
    assert sol.mixing_alpha < 0.1
    assert abs(approx - sol.mixing_alpha) / sol.mixing_alpha < 0.10


def test_reference_rates_change_window():
    v = existence_window(EPI, GAME, UNIFORM, reference=BehaviorRates(0.02, 0.3))
    assert math.isfinite(v.window.lower_bound)
