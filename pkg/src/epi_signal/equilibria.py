"""Separating, pooling and partial-pooling regimes and the mixing fixed point.

In partial pooling, statuses 01 and 10 send 00 with probability alpha and
otherwise report truthfully; 00 and 11 always send 00.  The mixing
probability alpha* balances the R_c-discounted masking incentive of status
01 against the semantic-accuracy reward lambda1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .epi_core import BehaviorRates, EpiParams, r_control
from .signaling import (
    BehaviorProfile,
    GameParams,
    SenderStrategy,
    _check_distribution,
    pooling_strategy,
    separating_strategy,
)

SEPARATING = "separating"
PARTIAL_POOLING = "partial_pooling"
POOLING = "pooling"
KINDS = (SEPARATING, PARTIAL_POOLING, POOLING)

UNDER_RESPONSE = "under_response"
LINEARIZED = "linearized"
BETA_STEP = 1e-4

# Reference recommendation whose realized value shrinks under pooling.
DEFAULT_REFERENCE = BehaviorRates(vaccination_rate=0.05, masking_rate=0.10)


class NoInteriorSolutionError(ValueError):
    """The fixed-point residual has no sign change on (0, 1)."""


@dataclass(frozen=True)
class EquilibriumKind:
    name: str
    mixing_alpha: float = 0.0

    def __post_init__(self) -> None:
        if self.name not in KINDS:
            raise ValueError(f"unknown equilibrium kind {self.name!r}")
        if not 0.0 <= self.mixing_alpha <= 1.0:
            raise ValueError("mixing_alpha must lie in [0, 1]")

    @classmethod
    def separating(cls) -> "EquilibriumKind":
        return cls(SEPARATING)

    @classmethod
    def pooling(cls) -> "EquilibriumKind":
        return cls(POOLING, 1.0)

    @classmethod
    def partial_pooling(cls, mixing_alpha: float) -> "EquilibriumKind":
        return cls(PARTIAL_POOLING, mixing_alpha)


@dataclass(frozen=True)
class ExistenceWindow:
    lower_bound: float
    upper_bound: float
    beta_sens: float
    rc_separating: float
    rc_pooling: float

    @property
    def empty(self) -> bool:
        return self.lower_bound >= self.upper_bound


@dataclass(frozen=True)
class ExistenceVerdict:
    window: ExistenceWindow
    kind: str
    note: str


@dataclass(frozen=True)
class RcOfAlpha:
    rc: float
    beta_sens: float


@dataclass(frozen=True)
class FixedPointSolution:
    mixing_alpha: float
    residual: float
    iterations: int
    boundary: bool = False


def build_strategy(kind: EquilibriumKind, profile: BehaviorProfile | None = None) -> SenderStrategy:
    """Sender strategy for an equilibrium regime.

    The matrix depends only on the regime; ``profile`` is accepted so callers
    can pass the population they are modelling.
    """
    if kind.name == SEPARATING:
        return separating_strategy()
    if kind.name == POOLING:
        return pooling_strategy()
    a = kind.mixing_alpha
    g = np.zeros((4, 4))
    g[0, 0] = 1.0
    g[1, 0], g[1, 1] = a, 1.0 - a
    g[2, 0], g[2, 2] = a, 1.0 - a
    g[3, 0] = 1.0
    return SenderStrategy(g)


def _pooled_mass(pi: np.ndarray, alpha: float) -> float:
    return pi[0] + alpha * (pi[1] + pi[2]) + pi[3]


def pooled_message_posterior(prior: Sequence[float], mixing_alpha: float) -> np.ndarray:
    """p(theta | m = 00) over (00, 01, 10, 11) in partial pooling."""
    pi = _check_distribution(prior)
    mass = _pooled_mass(pi, mixing_alpha)
    if mass <= 0.0:
        raise ValueError("message 00 has zero marginal probability")
    return np.array([pi[0], mixing_alpha * pi[1], mixing_alpha * pi[2], pi[3]]) / mass


def estimated_rates(prior: Sequence[float], mixing_alpha: float) -> tuple[float, float]:
    """PHA's inflated compliance estimates (psi_hat, eta_hat)."""
    pi = _check_distribution(prior)
    psi_hat = pi[0] + pi[1] + mixing_alpha * pi[2] + pi[3]
    eta_hat = pi[0] + pi[2] + mixing_alpha * pi[1] + pi[3]
    return float(psi_hat), float(eta_hat)


def true_compliance(prior: Sequence[float]) -> tuple[float, float]:
    """Share truly vaccinated (statuses 00, 01) and truly masked (00, 10)."""
    pi = _check_distribution(prior)
    return float(pi[0] + pi[1]), float(pi[0] + pi[2])


def _rc_under_response(params: EpiParams, pi: np.ndarray, alpha: float, reference: BehaviorRates) -> float:
    # Written out rather than via estimated_rates so that the central
    # difference for beta_sens can evaluate slightly negative alpha.
    psi_hat = pi[0] + pi[1] + alpha * pi[2] + pi[3]
    eta_hat = pi[0] + pi[2] + alpha * pi[1] + pi[3]
    v_true, m_true = true_compliance(pi)
    ratio_v = v_true / psi_hat if psi_hat > 0.0 else 1.0
    ratio_m = m_true / eta_hat if eta_hat > 0.0 else 1.0
    psi = reference.vaccination_rate * ratio_v
    eta = min(1.0, reference.masking_rate * ratio_m)
    return r_control(params, BehaviorRates(psi, eta))


def beta_sensitivity(
    params: EpiParams,
    prior: Sequence[float],
    reference: BehaviorRates = DEFAULT_REFERENCE,
    step: float = BETA_STEP,
) -> float:
    """dR_c/dalpha at alpha = 0 by central difference."""
    pi = _check_distribution(prior)
    hi = _rc_under_response(params, pi, step, reference)
    lo = _rc_under_response(params, pi, -step, reference)
    return (hi - lo) / (2.0 * step)


def rc_of_alpha(
    params: EpiParams,
    prior: Sequence[float],
    mixing_alpha: float,
    reference: BehaviorRates = DEFAULT_REFERENCE,
    mode: str = UNDER_RESPONSE,
) -> RcOfAlpha:
    """Realized R_c when the PHA under-responds to inflated estimates.

    The PHA issues the ``reference`` recommendation; realized rates are the
    recommendation scaled by true/estimated compliance.  ``linearized`` mode
    returns R_c(0) + beta_sens alpha.
    """
    pi = _check_distribution(prior)
    if not 0.0 <= mixing_alpha <= 1.0:
        raise ValueError("mixing_alpha must lie in [0, 1]")
    beta = beta_sensitivity(params, pi, reference)
    if mode == UNDER_RESPONSE:
        rc = _rc_under_response(params, pi, mixing_alpha, reference)
    elif mode == LINEARIZED:
        rc = _rc_under_response(params, pi, 0.0, reference) + beta * mixing_alpha
    else:
        raise ValueError(f"unknown R_c mode {mode!r}")
    return RcOfAlpha(rc=rc, beta_sens=beta)


def existence_window(
    params: EpiParams,
    game: GameParams,
    prior: Sequence[float],
    reference: BehaviorRates = DEFAULT_REFERENCE,
    mode: str = UNDER_RESPONSE,
) -> ExistenceVerdict:
    """Window e^{-a R_c(1)} I_m < lambda1 < e^{-a R_c(0)} I_m (1 + a beta_sens)."""
    a, i_m = game.economic_factor, game.mask_lie_incentive
    at0 = rc_of_alpha(params, prior, 0.0, reference, mode)
    at1 = rc_of_alpha(params, prior, 1.0, reference, mode)
    lower = math.exp(-a * at1.rc) * i_m
    upper = math.exp(-a * at0.rc) * i_m * (1.0 + a * at0.beta_sens)
    window = ExistenceWindow(lower, upper, at0.beta_sens, at0.rc, at1.rc)
    lam = game.semantic_weight
    if lam <= lower:
        kind = POOLING
    elif lam >= upper:
        kind = SEPARATING
    else:
        kind = PARTIAL_POOLING
    note = "pure separation is not an equilibrium when I_m > 0" if i_m > 0.0 else ""
    return ExistenceVerdict(window, kind, note)


def fixed_point_rhs(
    params: EpiParams,
    game: GameParams,
    prior: Sequence[float],
    mixing_alpha: float,
    reference: BehaviorRates = DEFAULT_REFERENCE,
    mode: str = UNDER_RESPONSE,
) -> float:
    """e^{-a R_c(alpha)} I_m / (lambda1 (1 - p(theta01 | 00)))."""
    if game.semantic_weight <= 0.0:
        raise ValueError("semantic_weight must be > 0 for the fixed point")
    rc = rc_of_alpha(params, prior, mixing_alpha, reference, mode).rc
    p01 = pooled_message_posterior(prior, mixing_alpha)[1]
    return math.exp(-game.economic_factor * rc) * game.mask_lie_incentive / (game.semantic_weight * (1.0 - p01))


def fixed_point_residual(
    params: EpiParams,
    game: GameParams,
    prior: Sequence[float],
    mixing_alpha: float,
    reference: BehaviorRates = DEFAULT_REFERENCE,
    mode: str = UNDER_RESPONSE,
) -> float:
    return mixing_alpha - fixed_point_rhs(params, game, prior, mixing_alpha, reference, mode)


def solve_alpha_fixed_point(
    params: EpiParams,
    game: GameParams,
    prior: Sequence[float],
    tolerance: float = 1e-8,
    reference: BehaviorRates = DEFAULT_REFERENCE,
    mode: str = UNDER_RESPONSE,
    max_iter: int = 200,
) -> FixedPointSolution:
    """Bisection on alpha - RHS(alpha) over [0, 1]."""
    if game.mask_lie_incentive == 0.0:
        return FixedPointSolution(0.0, 0.0, 0, boundary=True)

    def resid(x: float) -> float:
        return fixed_point_residual(params, game, prior, x, reference, mode)

    lo, hi = 0.0, 1.0
    r_lo, r_hi = resid(lo), resid(hi)
    if not (r_lo < 0.0 < r_hi):
        raise NoInteriorSolutionError(f"no sign change on (0, 1): residual {r_lo:.3g} at 0, {r_hi:.3g} at 1")
    best, best_r = lo, r_lo
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        r_mid = resid(mid)
        if abs(r_mid) < abs(best_r):
            best, best_r = mid, r_mid
        if r_mid < 0.0:
            lo = mid
        else:
            hi = mid
        if abs(best_r) < 0.01 * tolerance or hi - lo < 1e-16:
            break
    if abs(best_r) >= tolerance:
        raise NoInteriorSolutionError(f"bisection stalled with residual {best_r:.3g}")
    return FixedPointSolution(best, best_r, it)


def alpha_approximation(
    params: EpiParams,
    game: GameParams,
    prior: Sequence[float],
    reference: BehaviorRates = DEFAULT_REFERENCE,
    beta_sens: float | None = None,
) -> float:
    """alpha* ~ e^{-a R_c(0)} I_m / (lambda1 + a beta e^{-a R_c(0)} I_m), unclamped."""
    at0 = rc_of_alpha(params, prior, 0.0, reference)
    beta = at0.beta_sens if beta_sens is None else beta_sens
    return alpha_approximation_value(game, at0.rc, beta)


def alpha_approximation_value(game: GameParams, rc0: float, beta_sens: float) -> float:
    a, i_m, lam = game.economic_factor, game.mask_lie_incentive, game.semantic_weight
    pull = math.exp(-a * rc0) * i_m
    if pull == 0.0:
        return 0.0
    return pull / (lam + a * beta_sens * pull)
