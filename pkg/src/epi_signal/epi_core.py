"""SVEAIR dynamics and the epidemic quantities derived from them.

Ground-truth system (per day):

    S' = Lambda - lam (1 - eta) S - (psi + mu) S
    V' = psi S - lam (1 - delta) V - mu V
    E' = lam ((1 - eta) S + (1 - delta) V) - (k + mu) E
    A' = k (1 - p) E - (gamma + mu) A
    I' = k p E - (gamma + mu) I
    R' = gamma (A + I) - mu R

with force of infection lam = beta0 (I + b A) / K.  The receiver-estimated
system has the same form with (psi_hat, eta_hat, gamma_hat) in place of the
true rates and lam_hat recomputed from the estimated state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

COMPARTMENTS = ("S", "V", "E", "A", "I", "R")


class DegenerateStateError(ValueError):
    """Raised when a state has zero total population."""


class IntegrationDivergedError(ArithmeticError):
    """Raised when integration produces a non-finite state."""


class DegenerateThresholdError(ZeroDivisionError):
    """Raised when a closed-form expression divides by exactly zero."""


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class EpiParams:
    """Epidemiological rate constants (per day unless dimensionless)."""

    birth_rate: float
    natural_death_rate: float
    base_transmission: float
    asymptomatic_relative_infectiousness: float
    symptomatic_fraction: float
    latency_rate: float
    recovery_rate: float
    vaccine_efficacy: float
    hospitalization_ratio: float

    def __post_init__(self) -> None:
        for name in ("birth_rate", "natural_death_rate", "base_transmission"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        _check_unit("asymptomatic_relative_infectiousness", self.asymptomatic_relative_infectiousness)
        _check_unit("symptomatic_fraction", self.symptomatic_fraction)
        _check_unit("vaccine_efficacy", self.vaccine_efficacy)
        _check_unit("hospitalization_ratio", self.hospitalization_ratio)
        if self.latency_rate <= 0.0 or self.recovery_rate <= 0.0:
            raise ValueError("latency_rate and recovery_rate must be > 0")

    @classmethod
    def baseline(cls, population: float = 10_000.0, **overrides: float) -> "EpiParams":
        """Table A2 baseline values, with birth rate set to mu * K(0)."""
        mu = 1.0 / 27375.0
        values = dict(
            birth_rate=mu * population,
            natural_death_rate=mu,
            base_transmission=0.35,
            asymptomatic_relative_infectiousness=0.5,
            symptomatic_fraction=0.67,
            latency_rate=1.0 / 5.0,
            recovery_rate=1.0 / 10.0,
            vaccine_efficacy=0.45,
            hospitalization_ratio=0.05,
        )
        values.update(overrides)
        return cls(**values)

    def with_(self, **changes: float) -> "EpiParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class CompartmentState:
    """Six SVEAIR compartments in persons."""

    S: float
    V: float
    E: float
    A: float
    I: float
    R: float

    def __post_init__(self) -> None:
        values = self.as_tuple()
        if any(v < 0.0 for v in values):
            raise ValueError(f"compartments must be >= 0, got {values}")

    @property
    def K(self) -> float:
        return self.S + self.V + self.E + self.A + self.I + self.R

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.S, self.V, self.E, self.A, self.I, self.R)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    def fractions(self) -> tuple[float, ...]:
        total = self.K
        if total <= 0.0:
            raise DegenerateStateError("total population is zero")
        return tuple(v / total for v in self.as_tuple())

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "CompartmentState":
        S, V, E, A, I, R = (float(v) for v in values)
        return cls(S, V, E, A, I, R)

    @classmethod
    def initial(cls, population: float = 10_000.0, infected: float = 150.0) -> "CompartmentState":
        """Fully susceptible population seeded with symptomatic infections."""
        return cls(population - infected, 0.0, 0.0, 0.0, infected, 0.0)


@dataclass(frozen=True)
class CompartmentDerivatives:
    dS: float
    dV: float
    dE: float
    dA: float
    dI: float
    dR: float

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.dS, self.dV, self.dE, self.dA, self.dI, self.dR)

    @property
    def total(self) -> float:
        return math.fsum(self.as_tuple())


@dataclass(frozen=True)
class BehaviorRates:
    vaccination_rate: float
    masking_rate: float

    def __post_init__(self) -> None:
        if self.vaccination_rate < 0.0:
            raise ValueError("vaccination_rate must be >= 0")
        _check_unit("masking_rate", self.masking_rate)


@dataclass(frozen=True)
class EstimatedParams:
    """Receiver's parameter vector (psi_hat, eta_hat, gamma_hat, lambda_hat)."""

    psi_hat: float
    eta_hat: float
    gamma_hat: float
    lambda_hat: float = 0.0

    def __post_init__(self) -> None:
        if self.psi_hat < 0.0 or self.lambda_hat < 0.0:
            raise ValueError("psi_hat and lambda_hat must be >= 0")
        _check_unit("eta_hat", self.eta_hat)
        if self.gamma_hat <= 0.0:
            raise ValueError("gamma_hat must be > 0")


@dataclass(frozen=True)
class HerdImmunityThreshold:
    psi: float
    valid: bool


def force_of_infection(params: EpiParams, state: CompartmentState) -> float:
    """lambda = beta0 (I + b A) / K."""
    total = state.K
    if total <= 0.0:
        raise DegenerateStateError("force of infection undefined for zero population")
    b = params.asymptomatic_relative_infectiousness
    return params.base_transmission * (state.I + b * state.A) / total


def _rhs(y, beta0, b, p, k, gamma, mu, delta, lam_birth, psi, eta):
    S, V, E, A, I, R = y
    total = S + V + E + A + I + R
    if total <= 0.0:
        raise DegenerateStateError("force of infection undefined for zero population")
    lam = beta0 * (I + b * A) / total
    inf_s = lam * (1.0 - eta) * S
    inf_v = lam * (1.0 - delta) * V
    return (
        lam_birth - inf_s - (psi + mu) * S,
        psi * S - inf_v - mu * V,
        inf_s + inf_v - (k + mu) * E,
        k * (1.0 - p) * E - (gamma + mu) * A,
        k * p * E - (gamma + mu) * I,
        gamma * (A + I) - mu * R,
    )


def _coeffs(params: EpiParams, psi: float, eta: float, gamma: float | None = None):
    return (
        params.base_transmission,
        params.asymptomatic_relative_infectiousness,
        params.symptomatic_fraction,
        params.latency_rate,
        params.recovery_rate if gamma is None else gamma,
        params.natural_death_rate,
        params.vaccine_efficacy,
        params.birth_rate,
        psi,
        eta,
    )


def sveair_derivatives(
    params: EpiParams, behavior: BehaviorRates, state: CompartmentState
) -> CompartmentDerivatives:
    """Time derivatives of the ground-truth system."""
    coeffs = _coeffs(params, behavior.vaccination_rate, behavior.masking_rate)
    return CompartmentDerivatives(*_rhs(state.as_tuple(), *coeffs))


def estimated_derivatives(
    params: EpiParams, estimate: EstimatedParams, state: CompartmentState
) -> CompartmentDerivatives:
    """Time derivatives of the receiver-estimated system."""
    coeffs = _coeffs(params, estimate.psi_hat, estimate.eta_hat, estimate.gamma_hat)
    return CompartmentDerivatives(*_rhs(state.as_tuple(), *coeffs))


def _rk4_days(y, coeffs, days: int, substeps_per_day: int):
    """Classical RK4 with clamping at zero; returns (y, clamp_events)."""
    h = 1.0 / substeps_per_day
    half = 0.5 * h
    sixth = h / 6.0
    clamps = 0
    for _ in range(days * substeps_per_day):
        k1 = _rhs(y, *coeffs)
        k2 = _rhs(tuple(a + half * d for a, d in zip(y, k1)), *coeffs)
        k3 = _rhs(tuple(a + half * d for a, d in zip(y, k2)), *coeffs)
        k4 = _rhs(tuple(a + h * d for a, d in zip(y, k3)), *coeffs)
        nxt = []
        for a, d1, d2, d3, d4 in zip(y, k1, k2, k3, k4):
            v = a + sixth * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
            if not math.isfinite(v):
                raise IntegrationDivergedError("non-finite compartment value")
            if v < 0.0:
                v = 0.0
                clamps += 1
            nxt.append(v)
        y = tuple(nxt)
    return y, clamps


def integrate_week(
    params: EpiParams,
    behavior: BehaviorRates,
    state: CompartmentState,
    substeps_per_day: int = 10,
    days: int = 7,
) -> tuple[CompartmentState, int]:
    """Advance the ground-truth state one week with fixed-step RK4.

    Returns the new state and the number of clamping events.
    """
    if substeps_per_day < 1:
        raise ValueError("substeps_per_day must be >= 1")
    coeffs = _coeffs(params, behavior.vaccination_rate, behavior.masking_rate)
    y, clamps = _rk4_days(state.as_tuple(), coeffs, days, substeps_per_day)
    return CompartmentState(*y), clamps


def integrate_estimated_week(
    params: EpiParams,
    estimate: EstimatedParams,
    state: CompartmentState,
    substeps_per_day: int = 10,
    days: int = 7,
) -> tuple[CompartmentState, int]:
    """Advance the receiver-estimated state one week with fixed-step RK4."""
    if substeps_per_day < 1:
        raise ValueError("substeps_per_day must be >= 1")
    coeffs = _coeffs(params, estimate.psi_hat, estimate.eta_hat, estimate.gamma_hat)
    y, clamps = _rk4_days(state.as_tuple(), coeffs, days, substeps_per_day)
    return CompartmentState(*y), clamps


def effective_beta(params: EpiParams) -> float:
    """beta = beta0 (p + b (1 - p))."""
    p = params.symptomatic_fraction
    return params.base_transmission * (p + params.asymptomatic_relative_infectiousness * (1.0 - p))


def r0(params: EpiParams) -> float:
    """R0 = beta k / ((k + mu)(gamma + mu))."""
    k, gamma, mu = params.latency_rate, params.recovery_rate, params.natural_death_rate
    return effective_beta(params) * k / ((k + mu) * (gamma + mu))


def r_control(params: EpiParams, behavior: BehaviorRates) -> float:
    """R_c = R0 ((1 - delta) psi + (1 - eta) mu) / (psi + mu)."""
    psi, eta = behavior.vaccination_rate, behavior.masking_rate
    mu = params.natural_death_rate
    denom = psi + mu
    if denom == 0.0:
        raise DegenerateThresholdError("psi + mu is zero")
    delta = params.vaccine_efficacy
    return r0(params) * ((1.0 - delta) * psi + (1.0 - eta) * mu) / denom


def r_effective_coverage(params: EpiParams, masking_rate: float, coverage: float) -> float:
    """Control number at current vaccine coverage: R0 (1 - eta)(1 - delta v).

    ``coverage`` is V / (S + V).  On the disease-free state with eta = 0 this
    coincides with ``r_control``; it is the weekly control metric used by the
    simulation because it tracks behavior as coverage builds up.
    """
    _check_unit("masking_rate", masking_rate)
    _check_unit("coverage", coverage)
    return r0(params) * (1.0 - masking_rate) * (1.0 - params.vaccine_efficacy * coverage)


def herd_immunity_threshold(params: EpiParams, masking_rate: float) -> HerdImmunityThreshold:
    """psi_HI = mu (R0 (1 - eta) - 1) / (1 - R0 (1 - delta)) with validity flag."""
    basic = r0(params)
    delta = params.vaccine_efficacy
    denom = 1.0 - basic * (1.0 - delta)
    if denom == 0.0:
        raise DegenerateThresholdError("1 - R0 (1 - delta) is zero")
    psi = params.natural_death_rate * (basic * (1.0 - masking_rate) - 1.0) / denom
    upper = math.inf if delta == 1.0 else 1.0 / (1.0 - delta)
    return HerdImmunityThreshold(psi=psi, valid=1.0 < basic < upper)


def hospitalization(params: EpiParams, state: CompartmentState) -> float:
    """H = xi I."""
    return params.hospitalization_ratio * state.I
