"""PHA decision layer: distortion, adaptive corrections and baseline policies.

The PHA reads corrections (psi_tilde, eta_tilde) as distrust of the reported
rates: its estimated model runs at (psi_hat - psi_tilde, eta_hat - eta_tilde)
while it recommends psi_r = psi_hat + psi_tilde and eta_r = eta_hat + eta_tilde.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .epi_core import (
    CompartmentState,
    EpiParams,
    EstimatedParams,
    force_of_infection,
    integrate_estimated_week,
    r0,
)

FD_STEP = 1e-4


@dataclass(frozen=True)
class PolicyState:
    """Current recommendations, corrections and update hyperparameters.

    ``psi_scale`` and ``eta_max`` set the relative size of a unit step in the
    two correction coordinates; ``control_step`` weights the R_c <= 1 term.
    """

    recommended_psi: float
    recommended_eta: float
    correction_psi: float = 0.0
    correction_eta: float = 0.0
    step_size: float = 0.05
    psi_max: float = 0.2
    eta_max: float = 0.9
    control_step: float = 0.0
    psi_scale: float = 0.2

    def __post_init__(self) -> None:
        if self.step_size <= 0.0:
            raise ValueError("step_size must be > 0")
        if not 0.0 <= self.eta_max <= 1.0 or self.psi_max < 0.0:
            raise ValueError("caps must satisfy psi_max >= 0 and 0 <= eta_max <= 1")
        if not 0.0 <= self.recommended_psi <= self.psi_max:
            raise ValueError("recommended_psi outside [0, psi_max]")
        if not 0.0 <= self.recommended_eta <= self.eta_max:
            raise ValueError("recommended_eta outside [0, eta_max]")

    @property
    def scale(self) -> np.ndarray:
        return np.array([self.psi_scale, self.eta_max])

    @property
    def corrections(self) -> np.ndarray:
        return np.array([self.correction_psi, self.correction_eta])


@dataclass(frozen=True)
class DistortionRecord:
    observed_H: float
    predicted_H: float
    threshold: float = 1.0

    @property
    def distortion(self) -> float:
        return distortion(self.observed_H, self.predicted_H)

    @property
    def exceeds(self) -> bool:
        return self.distortion > self.threshold


@dataclass(frozen=True)
class EstimatedModel:
    """PHA's one-week forecasting model.

    ``state`` is the assimilated state at the start of the week, ``psi_hat``
    and ``eta_hat`` the believed rates and ``claimed_coverage`` the share of
    responders claiming vaccination.
    """

    params: EpiParams
    state: CompartmentState
    psi_hat: float
    eta_hat: float
    claimed_coverage: float
    substeps_per_day: int = 2

    def rates(self, corrections: Sequence[float]) -> EstimatedParams:
        psi = max(0.0, self.psi_hat - corrections[0])
        eta = min(1.0, max(0.0, self.eta_hat - corrections[1]))
        return EstimatedParams(
            psi_hat=psi,
            eta_hat=eta,
            gamma_hat=self.params.recovery_rate,
            lambda_hat=force_of_infection(self.params, self.state),
        )

    def rollout(self, corrections: Sequence[float]) -> CompartmentState:
        nxt, _ = integrate_estimated_week(self.params, self.rates(corrections), self.state, self.substeps_per_day)
        return nxt

    def predict_H(self, corrections: Sequence[float]) -> float:
        return self.params.hospitalization_ratio * self.rollout(corrections).I

    def perceived_rc(self, corrections: Sequence[float], psi_max: float, eta_max: float) -> float:
        """R_c the PHA expects after a week at its recommended rates."""
        psi_r = min(psi_max, self.psi_hat + corrections[0])
        eta_r = min(eta_max, self.eta_hat + corrections[1])
        coverage = 1.0 - (1.0 - self.claimed_coverage) * math.exp(-7.0 * psi_r)
        return r0(self.params) * (1.0 - eta_r) * (1.0 - self.params.vaccine_efficacy * coverage)


def distortion(observed_H: float, predicted_H: float) -> float:
    """D = (H - H_hat)^2."""
    if observed_H < 0.0 or predicted_H < 0.0:
        raise ValueError("hospitalization counts must be >= 0")
    return (observed_H - predicted_H) ** 2


def weighted_distortion(
    message_marginal: Sequence[float],
    belief: np.ndarray,
    theta_given_status: np.ndarray,
    squared_errors: np.ndarray,
) -> float:
    """D = sum_m P(m) sum_c p(c|m) sum_theta p(theta|c) |H - H_hat(theta)|^2.

    ``belief[m, c]``, ``theta_given_status[t, c]`` and ``squared_errors[t, c]``.
    """
    pm = np.asarray(message_marginal, dtype=float)
    per_status = (np.asarray(theta_given_status) * np.asarray(squared_errors)).sum(axis=0)
    return float(pm @ (np.asarray(belief) @ per_status))


def _predicted_distortion(model: EstimatedModel, observed_H: float, corrections: np.ndarray) -> float:
    return (observed_H - model.predict_H(corrections)) ** 2


def distortion_gradient(
    model: EstimatedModel, state: PolicyState, observed_H: float, h: float = FD_STEP
) -> np.ndarray:
    """Central-difference gradient of predicted distortion w.r.t. (psi_tilde, eta_tilde)."""
    c = state.corrections
    grad = np.empty(2)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        grad[i] = (_predicted_distortion(model, observed_H, c + e) - _predicted_distortion(model, observed_H, c - e)) / (
            2.0 * h
        )
    return grad


def _directional_derivative(model: EstimatedModel, observed_H: float, c: np.ndarray, direction: np.ndarray) -> float:
    h = FD_STEP
    up = _predicted_distortion(model, observed_H, c + h * direction)
    down = _predicted_distortion(model, observed_H, c - h * direction)
    return (up - down) / (2.0 * h)


def _rc_gradient(model: EstimatedModel, state: PolicyState, c: np.ndarray) -> np.ndarray:
    """Gradient of perceived R_c in scaled correction coordinates."""
    h = FD_STEP
    grad = np.empty(2)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h * state.scale[i]
        up = model.perceived_rc(c + e, state.psi_max, state.eta_max)
        down = model.perceived_rc(c - e, state.psi_max, state.eta_max)
        grad[i] = (up - down) / (2.0 * h)
    return grad


def recommend(state: PolicyState, model: EstimatedModel) -> PolicyState:
    """Recommendations psi_r = psi_hat + psi_tilde and eta_r = eta_hat + eta_tilde, capped."""
    psi_r = min(state.psi_max, max(0.0, model.psi_hat + state.correction_psi))
    eta_r = min(state.eta_max, max(0.0, model.eta_hat + state.correction_eta))
    return replace(state, recommended_psi=psi_r, recommended_eta=eta_r)


def adaptive_update(
    state: PolicyState,
    record: DistortionRecord,
    estimated_model: EstimatedModel,
    step_size: float | None = None,
    max_halvings: int = 4,
) -> PolicyState:
    """One gradient step on the corrections when D exceeds the threshold.

    The distortion gradient is projected on the common distrust axis
    ``scale`` and the corrections move against it by ``step_size`` (halved
    while the predicted distortion increases).  When the PHA still expects
    R_c >= 1 at its recommendation, a step of ``control_step`` down the
    perceived R_c gradient is added.  Corrections stay in [0, caps].
    """
    if not record.exceeds:
        return state
    step = state.step_size if step_size is None else step_size
    scale = state.scale
    c = state.corrections
    observed = record.observed_H
    slope = _directional_derivative(estimated_model, observed, c, scale)
    if not math.isfinite(slope):
        warnings.warn("non-finite distortion gradient; update skipped", RuntimeWarning, stacklevel=2)
        return state
    caps = np.array([state.psi_max, state.eta_max])
    current = record.distortion
    move = np.zeros(2)
    if slope != 0.0:
        direction = -math.copysign(1.0, slope) * scale
        for _ in range(max_halvings + 1):
            trial = np.clip(c + step * direction, 0.0, caps)
            if _predicted_distortion(estimated_model, observed, trial) <= current:
                break
            step *= 0.5
        move = step * direction
    if state.control_step > 0.0 and estimated_model.perceived_rc(c, state.psi_max, state.eta_max) >= 1.0:
        grad = _rc_gradient(estimated_model, state, c)
        norm = float(np.linalg.norm(grad))
        if math.isfinite(norm) and norm > 0.0:
            move = move - state.control_step * scale * grad / norm
    new_c = np.clip(c + move, 0.0, caps)
    updated = replace(state, correction_psi=float(new_c[0]), correction_eta=float(new_c[1]))
    return recommend(updated, estimated_model)


def random_policy(state: PolicyState, noise_scale: float | Sequence[float], rng_seed) -> PolicyState:
    """Perturb recommendations by zero-mean Gaussian noise, clamped to [0, cap].

    ``noise_scale`` is one standard deviation or a (psi, eta) pair;
    ``rng_seed`` is a seed or a numpy Generator.
    """
    sigma = np.broadcast_to(np.asarray(noise_scale, dtype=float), (2,))
    if np.any(sigma < 0.0):
        raise ValueError("noise_scale must be >= 0")
    if np.all(sigma == 0.0):
        return state
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    noise = rng.normal(0.0, 1.0, size=2) * sigma
    psi = float(np.clip(state.recommended_psi + noise[0], 0.0, state.psi_max))
    eta = float(np.clip(state.recommended_eta + noise[1], 0.0, state.eta_max))
    return replace(state, recommended_psi=psi, recommended_eta=eta)


def no_interaction_policy(psi_init: float = 0.05, eta_init: float = 0.10, **caps: float) -> PolicyState:
    """Recommendations frozen at the baseline rates."""
    psi_max = caps.get("psi_max", max(0.2, psi_init))
    eta_max = caps.get("eta_max", max(0.9, eta_init))
    return PolicyState(psi_init, eta_init, psi_max=psi_max, eta_max=eta_max)
