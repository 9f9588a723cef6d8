"""Two-bit signaling game between a population (sender) and a PHA (receiver).

Statuses and messages are indexed 0..3 in the order 00, 01, 10, 11.  The
first bit is vaccination, the second masking; 0 means compliant.  Sender
strategies are row-stochastic matrices g[c, m] and receiver beliefs are
row-stochastic matrices p[m, c].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

LABELS = ("00", "01", "10", "11")
NO_RESPONSE = "no-response"
N_STATUS = 4
ROW_TOL = 1e-12

VACCINE_BAND = (0.05, 0.15)
MASK_BAND = (0.40, 0.80)


@dataclass(frozen=True)
class TrueStatus:
    vaccine_bit: int
    mask_bit: int

    def __post_init__(self) -> None:
        if self.vaccine_bit not in (0, 1) or self.mask_bit not in (0, 1):
            raise ValueError("status bits must be 0 or 1")

    @property
    def index(self) -> int:
        return 2 * self.vaccine_bit + self.mask_bit

    @property
    def label(self) -> str:
        return LABELS[self.index]

    @classmethod
    def from_label(cls, label: str) -> "TrueStatus":
        if label not in LABELS:
            raise ValueError(f"unknown status {label!r}")
        return cls(int(label[0]), int(label[1]))

    @classmethod
    def from_index(cls, index: int) -> "TrueStatus":
        return cls.from_label(LABELS[index])


# Messages share the status encoding; silence is the extra symbol NO_RESPONSE.
Message = TrueStatus
StatusLike = Union[TrueStatus, int, str]


def status_index(c: StatusLike) -> int:
    if isinstance(c, TrueStatus):
        return c.index
    if isinstance(c, str):
        return TrueStatus.from_label(c).index
    if isinstance(c, (int, np.integer)) and 0 <= int(c) < N_STATUS:
        return int(c)
    raise ValueError(f"invalid status {c!r}")


def _bits(i: int) -> tuple[int, int]:
    return i >> 1, i & 1


def feasible(c: int, m: int) -> bool:
    """A message may only hide non-compliance, never invent it."""
    return (m & ~c) == 0


FEASIBLE = np.array([[feasible(c, m) for m in range(N_STATUS)] for c in range(N_STATUS)])
HAMMING_V = np.array([[abs(_bits(c)[0] - _bits(m)[0]) for m in range(N_STATUS)] for c in range(N_STATUS)], dtype=float)
HAMMING_M = np.array([[abs(_bits(c)[1] - _bits(m)[1]) for m in range(N_STATUS)] for c in range(N_STATUS)], dtype=float)
HAMMING = HAMMING_V + HAMMING_M


def _check_distribution(pi: Sequence[float], name: str = "prior") -> np.ndarray:
    arr = np.asarray(pi, dtype=float)
    if arr.shape != (N_STATUS,):
        raise ValueError(f"{name} must have {N_STATUS} entries")
    if np.any(arr < 0.0) or abs(arr.sum() - 1.0) > 1e-9:
        raise ValueError(f"{name} must be a probability distribution")
    return arr


@dataclass(frozen=True)
class SenderStrategy:
    """g[c, m]: probability that status c sends message m."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        g = np.array(self.matrix, dtype=float)
        if g.shape != (N_STATUS, N_STATUS):
            raise ValueError("sender strategy must be 4x4")
        if np.any(g < 0.0) or np.any(g > 1.0):
            raise ValueError("strategy entries must lie in [0, 1]")
        if np.any(np.abs(g.sum(axis=1) - 1.0) > ROW_TOL):
            raise ValueError("strategy rows must sum to 1")
        if np.any(g[~FEASIBLE] != 0.0):
            raise ValueError("compliant bits may not be reported as non-compliant")
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SenderStrategy) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash(self.matrix.tobytes())


@dataclass(frozen=True)
class ReceiverBelief:
    """p[m, c]: belief over statuses after message m.

    ``defined[m]`` is False for off-path messages, whose row holds the prior.
    """

    matrix: np.ndarray
    defined: np.ndarray = field(default_factory=lambda: np.ones(N_STATUS, dtype=bool))

    def __post_init__(self) -> None:
        p = np.array(self.matrix, dtype=float)
        d = np.array(self.defined, dtype=bool)
        if p.shape != (N_STATUS, N_STATUS) or d.shape != (N_STATUS,):
            raise ValueError("belief must be 4x4 with a 4-entry defined mask")
        if np.any(p < 0.0) or np.any(np.abs(p.sum(axis=1) - 1.0) > ROW_TOL):
            raise ValueError("belief rows must be probability distributions")
        p.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "matrix", p)
        object.__setattr__(self, "defined", d)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ReceiverBelief)
            and np.array_equal(self.matrix, other.matrix)
            and np.array_equal(self.defined, other.defined)
        )

    def __hash__(self) -> int:
        return hash((self.matrix.tobytes(), self.defined.tobytes()))


@dataclass(frozen=True)
class BehaviorProfile:
    """Population types and reporting propensities (Table A1 structure)."""

    type_distribution: tuple[float, float, float, float]
    non_responsive_share: float = 0.3
    vaccine_deception_propensity: float = 0.10
    mask_deception_propensity: float = 0.60

    def __post_init__(self) -> None:
        pi = _check_distribution(self.type_distribution, "type_distribution")
        object.__setattr__(self, "type_distribution", tuple(float(x) for x in pi))
        if not 0.0 <= self.non_responsive_share <= 1.0:
            raise ValueError("non_responsive_share must lie in [0, 1]")
        lo, hi = VACCINE_BAND
        if not lo <= self.vaccine_deception_propensity <= hi:
            raise ValueError(f"vaccine_deception_propensity must lie in [{lo}, {hi}]")
        lo, hi = MASK_BAND
        if not lo <= self.mask_deception_propensity <= hi:
            raise ValueError(f"mask_deception_propensity must lie in [{lo}, {hi}]")

    @property
    def prior(self) -> np.ndarray:
        return np.array(self.type_distribution)

    def honesty(self, c: StatusLike) -> tuple[bool, bool]:
        """Per-bit honesty flags: a compliant bit is always reported honestly."""
        v, m = _bits(status_index(c))
        return (v == 0, m == 0)


@dataclass(frozen=True)
class GameParams:
    vaccine_lie_incentive: float = 1.0
    mask_lie_incentive: float = 0.5
    semantic_weight: float = 0.2
    distortion_weight: float = 0.01
    rationality: float = 1.0
    economic_factor: float = 0.5
    distortion_threshold: float = 1.0

    def __post_init__(self) -> None:
        for name in (
            "vaccine_lie_incentive",
            "mask_lie_incentive",
            "semantic_weight",
            "distortion_weight",
            "economic_factor",
            "distortion_threshold",
        ):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.rationality <= 0.0:
            raise ValueError("rationality must be > 0")


@dataclass(frozen=True)
class DeceptionLevel:
    """Aggregate deception in persons plus rates per member of the population."""

    overall: float
    vaccination: float
    masking: float
    population: float

    @property
    def overall_rate(self) -> float:
        return self.overall / self.population

    @property
    def vaccination_rate(self) -> float:
        return self.vaccination / self.population

    @property
    def masking_rate(self) -> float:
        return self.masking / self.population


def incentive_table(incentives: GameParams) -> np.ndarray:
    """gain[c, m]: incentive collected by status c for sending message m."""
    gain = np.zeros((N_STATUS, N_STATUS))
    for c in range(N_STATUS):
        cv, cm = _bits(c)
        for m in range(N_STATUS):
            if not FEASIBLE[c, m]:
                continue
            mv, mm = _bits(m)
            gain[c, m] = incentives.vaccine_lie_incentive * (cv and not mv) + incentives.mask_lie_incentive * (
                cm and not mm
            )
    return gain


def sender_utility_base(strategy: SenderStrategy, c: StatusLike, incentives: GameParams) -> float:
    """Expected deception payoff of status c under the strategy."""
    i = status_index(c)
    return float(strategy.matrix[i] @ incentive_table(incentives)[i])


def sender_utility_rc(strategy: SenderStrategy, c: StatusLike, incentives: GameParams, rc: float) -> float:
    """Deception payoff with every incentive term scaled by exp(-a R_c)."""
    if rc < 0.0:
        raise ValueError("rc must be >= 0")
    return sender_utility_base(strategy, c, incentives) * math.exp(-incentives.economic_factor * rc)


def semantic_loss(
    strategy: SenderStrategy,
    belief: ReceiverBelief,
    type_counts: Sequence[float],
    population: float,
) -> float:
    """U_L = -(1/K) sum over responders of sum_m g(m|c) p(c|m).

    ``type_counts`` holds the number of responders with each true status;
    silent individuals contribute nothing.
    """
    counts = np.asarray(type_counts, dtype=float)
    if population <= 0.0:
        raise ValueError("population must be > 0")
    if counts.sum() == 0.0:
        return 0.0
    accuracy = np.einsum("cm,mc->c", strategy.matrix, belief.matrix)
    return -float(counts @ accuracy) / population


def pragmatic_sender(
    incentives: GameParams,
    rc: float,
    belief: ReceiverBelief,
) -> SenderStrategy:
    """Softmax speaker: g(m|c) proportional to exp(alpha (U_s - lambda1 U_L)).

    U_s is the R_c-discounted incentive and -U_L = p(c|m) the listener's
    probability of recovering the true status.  Only feasible messages enter
    the normalization.
    """
    alpha = incentives.rationality
    discount = math.exp(-incentives.economic_factor * rc)
    score = discount * incentive_table(incentives) + incentives.semantic_weight * belief.matrix.T
    score = np.where(FEASIBLE, alpha * score, -np.inf)
    if np.any(np.all(~np.isfinite(score), axis=1)):
        raise FloatingPointError("degenerate softmax: no finite message score")
    score -= score.max(axis=1, keepdims=True)
    weights = np.where(FEASIBLE, np.exp(score), 0.0)
    g = weights / weights.sum(axis=1, keepdims=True)
    return SenderStrategy(_renormalize_rows(g))


def _renormalize_rows(m: np.ndarray) -> np.ndarray:
    m = m / m.sum(axis=1, keepdims=True)
    # Push any residual rounding into the largest entry so rows sum to 1.
    for row in m:
        row[np.argmax(row)] += 1.0 - row.sum()
    return m


def bayes_posterior(strategy: SenderStrategy, prior: Sequence[float]) -> tuple[ReceiverBelief, np.ndarray]:
    """Posterior p(c|m) proportional to g(m|c) pi(c) and marginal P(m).

    Messages with zero marginal take the prior as their belief.
    """
    pi = _check_distribution(prior)
    joint = strategy.matrix * pi[:, None]  # [c, m]
    marginal = joint.sum(axis=0)
    post = np.empty((N_STATUS, N_STATUS))
    defined = marginal > 0.0
    for m in range(N_STATUS):
        post[m] = joint[:, m] / marginal[m] if defined[m] else pi
    return ReceiverBelief(post, defined), marginal


def receiver_inference_constrained(
    prior: Sequence[float],
    message_marginal: Sequence[float],
    distortion_table: np.ndarray,
    distortion_weight: float,
    theta_given_status: np.ndarray | None = None,
    sign: float = 1.0,
    messages: Sequence[int] | None = None,
) -> ReceiverBelief:
    """Closed-form inference p(c|m) proportional to
    exp((sign lambda2 sum_theta P(m) p(theta|c) d(theta, c) - P(m)) / P(m)).

    ``distortion_table[t, c]`` is the squared hospitalization error for
    parameter value t under status c and ``theta_given_status[t, c]`` the
    weights p(theta|c) (uniform over t by default).  ``sign=+1`` follows the
    printed formula; ``sign=-1`` penalizes high-distortion statuses instead.
    Statuses with zero prior receive zero mass.  Messages outside
    ``messages`` (default: all) keep the prior.
    """
    pi = _check_distribution(prior)
    pm = np.asarray(message_marginal, dtype=float)
    table = np.asarray(distortion_table, dtype=float)
    if table.ndim != 2 or table.shape[1] != N_STATUS:
        raise ValueError("distortion_table must have shape (n_theta, 4)")
    if theta_given_status is None:
        weights = np.full(table.shape, 1.0 / table.shape[0])
    else:
        weights = np.asarray(theta_given_status, dtype=float)
    if sign not in (1.0, -1.0):
        raise ValueError("sign must be +1 or -1")
    inverted = range(N_STATUS) if messages is None else messages
    expected = (weights * table).sum(axis=0)
    support = pi > 0.0
    post = np.tile(pi, (N_STATUS, 1))
    defined = np.zeros(N_STATUS, dtype=bool)
    for m in inverted:
        if pm[m] <= 0.0:
            raise ValueError(f"message {LABELS[m]} has zero marginal probability")
        exponent = (sign * distortion_weight * pm[m] * expected - pm[m]) / pm[m]
        exponent = np.where(support, exponent, -np.inf)
        exponent -= exponent[support].max()
        row = np.where(support, np.exp(exponent), 0.0)
        post[m] = row / row.sum()
        defined[m] = True
    return ReceiverBelief(post, defined)


def surprise(belief: ReceiverBelief, c: StatusLike, m: StatusLike) -> float:
    """-ln p(c|m) in nats; infinity for a zero-probability event."""
    prob = belief.matrix[status_index(m), status_index(c)]
    if prob <= 0.0:
        return math.inf
    return -math.log(prob) if prob < 1.0 else 0.0


def deception_level(
    strategy: SenderStrategy,
    type_counts: Sequence[float],
    silent: float,
    population: float | None = None,
) -> DeceptionLevel:
    """Hamming-weighted misreporting mass plus full weight for silence.

    overall = 1/2 sum_c n_c sum_m g(m|c) |m - c|_H + K_s and the per-bit
    components use the bit-restricted Hamming distance (their mean equals
    ``overall``).  ``population`` defaults to responders plus silent.
    """
    counts = np.asarray(type_counts, dtype=float)
    if population is None:
        population = float(counts.sum() + silent)
    g = strategy.matrix
    vacc = float(counts @ (g * HAMMING_V).sum(axis=1)) + silent
    mask = float(counts @ (g * HAMMING_M).sum(axis=1)) + silent
    return DeceptionLevel(0.5 * (vacc + mask), vacc, mask, population)


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0.0]
    return float(-(p * np.log2(p)).sum())


def information_content_bits(
    prior: Sequence[float], belief: ReceiverBelief, message_marginal: Sequence[float]
) -> float:
    """Mutual information between status and message: H(pi) - sum_m P(m) H(p(.|m))."""
    pi = _check_distribution(prior)
    pm = np.asarray(message_marginal, dtype=float)
    conditional = sum(pm[m] * _entropy_bits(belief.matrix[m]) for m in range(N_STATUS) if pm[m] > 0.0)
    return max(0.0, _entropy_bits(pi) - conditional)


def per_bit_strategy(vaccine_propensity: float, mask_propensity: float) -> SenderStrategy:
    """Nine-type reporting: each non-compliant bit is hidden independently.

    A status with a non-compliant vaccination bit claims vaccination with
    probability ``vaccine_propensity``; likewise for masking.
    """
    qv, qm = vaccine_propensity, mask_propensity
    g = np.zeros((N_STATUS, N_STATUS))
    g[0, 0] = 1.0
    g[1, 0], g[1, 1] = qm, 1.0 - qm
    g[2, 0], g[2, 2] = qv, 1.0 - qv
    g[3, 0] = qv * qm
    g[3, 1] = qv * (1.0 - qm)
    g[3, 2] = (1.0 - qv) * qm
    g[3, 3] = (1.0 - qv) * (1.0 - qm)
    return SenderStrategy(g)


def separating_strategy() -> SenderStrategy:
    return SenderStrategy(np.eye(N_STATUS))


def pooling_strategy() -> SenderStrategy:
    g = np.zeros((N_STATUS, N_STATUS))
    g[:, 0] = 1.0
    return SenderStrategy(g)
