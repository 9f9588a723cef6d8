"""Weekly population/PHA loop, Monte Carlo orchestration and stress tests.

Each week the population reports its status through the equilibrium
strategy, the PHA compares observed hospitalizations with its one-week
forecast and adjusts its recommendations, and the ground-truth epidemic
advances one week under the realized behavior.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import savgol_filter

from .epi_core import (
    BehaviorRates,
    CompartmentState,
    EpiParams,
    IntegrationDivergedError,
    integrate_week,
    r_effective_coverage,
)
from .equilibria import KINDS, PARTIAL_POOLING, POOLING, SEPARATING, EquilibriumKind, build_strategy
from .policy import (
    DistortionRecord,
    EstimatedModel,
    PolicyState,
    adaptive_update,
    random_policy,
    recommend,
)
from .signaling import (
    HAMMING,
    HAMMING_M,
    HAMMING_V,
    MASK_BAND,
    N_STATUS,
    VACCINE_BAND,
    BehaviorProfile,
    GameParams,
    SenderStrategy,
    incentive_table,
    per_bit_strategy,
    pooling_strategy,
    separating_strategy,
)

POLICIES = ("adaptive", "random", "none")
THREADS_ENV = "EPI_SIGNAL_THREADS"
STRESS_FACTORS = ("ihr", "incentives", "nonresponsive_share", "vaccine_efficacy")


@dataclass(frozen=True)
class ScenarioConfig:
    equilibrium: str = SEPARATING
    policy: str = "adaptive"
    psi_init: float = 0.05
    eta_init: float = 0.10
    epi: EpiParams = field(default_factory=EpiParams.baseline)
    game: GameParams = field(default_factory=GameParams)
    population: int = 10_000
    initial_infected: float = 150.0
    weeks: int = 26
    runs: int = 50
    seed_base: int = 0
    non_responsive_share: float = 0.3
    # Fallback belief over statuses when nobody responds.
    type_distribution: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    # None selects the nine-type per-bit reporting for partial pooling;
    # a value in [0, 1] selects the single-alpha mixing matrix instead.
    mixing_alpha: float | None = None
    stochastic: bool = True
    beta_noise_sigma: float = 0.05
    substeps_per_day: int = 10
    model_substeps_per_day: int = 2
    step_size: float = 0.05
    control_step: float = 0.03
    psi_scale: float = 0.3
    psi_max: float = 0.2
    eta_max: float = 0.9
    random_noise_scale: tuple[float, float] | None = None
    sg_window: int = 5
    sg_order: int = 2
    exp_factor: float = 0.3
    stress_ihr_factor: float = 2.0
    stress_incentive_factor: float = 2.0
    stress_nonresponsive_share: float = 0.5
    stress_vaccine_efficacy: float = 0.70

    def __post_init__(self) -> None:
        if self.equilibrium not in KINDS:
            raise ValueError(f"equilibrium must be one of {KINDS}")
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")
        if self.weeks < 1 or self.runs < 1 or self.population < 1:
            raise ValueError("weeks, runs and population must be >= 1")
        if not 0.0 <= self.initial_infected <= self.population:
            raise ValueError("initial_infected must lie in [0, population]")
        if not 0.0 <= self.non_responsive_share <= 1.0:
            raise ValueError("non_responsive_share must lie in [0, 1]")
        if self.psi_init < 0.0 or not 0.0 <= self.eta_init <= 1.0:
            raise ValueError("baseline rates out of range")
        if self.psi_init > self.psi_max or self.eta_init > self.eta_max:
            raise ValueError("baseline rates exceed the policy caps")
        if self.mixing_alpha is not None and not 0.0 <= self.mixing_alpha <= 1.0:
            raise ValueError("mixing_alpha must lie in [0, 1]")
        if self.beta_noise_sigma < 0.0:
            raise ValueError("beta_noise_sigma must be >= 0")
        if self.substeps_per_day < 1 or self.model_substeps_per_day < 1:
            raise ValueError("substeps must be >= 1")
        if not 0.0 < self.exp_factor <= 1.0:
            raise ValueError("exp_factor must lie in (0, 1]")

    @property
    def seeds(self) -> tuple[int, ...]:
        return tuple(self.seed_base + i for i in range(self.runs))


@dataclass(frozen=True)
class ReportAggregate:
    """Outcome of one week of reporting.

    ``joint_counts[c, m]`` counts responders by true status and message.
    Claimed shares are taken at face value over responders and fall back to
    the profile prior when nobody responds.
    """

    joint_counts: np.ndarray
    silent: float
    silent_eligible: float
    eligible: float
    population: float
    claimed_vaccination: float
    claimed_masking: float
    true_vaccination: float
    true_masking: float
    hamming_v_eligible: float
    hamming_m_eligible: float

    @property
    def message_counts(self) -> np.ndarray:
        return self.joint_counts.sum(axis=0)

    @property
    def status_counts(self) -> np.ndarray:
        return self.joint_counts.sum(axis=1)

    @property
    def responders(self) -> float:
        return float(self.joint_counts.sum())

    @property
    def deception_persons(self) -> tuple[float, float, float]:
        """(overall, vaccination, masking) deception in persons."""
        v = float((self.joint_counts * HAMMING_V).sum()) + self.silent
        m = float((self.joint_counts * HAMMING_M).sum()) + self.silent
        return 0.5 * (v + m), v, m

    @property
    def deception_overall_rate(self) -> float:
        return self.deception_persons[0] / self.population

    @property
    def deception_rate(self) -> float:
        """Deception per member of the deception-eligible (non-recovered) population."""
        return 0.5 * (self.deception_vaccination_rate + self.deception_masking_rate)

    @property
    def deception_vaccination_rate(self) -> float:
        if self.eligible <= 0.0:
            return 0.0
        return (self.hamming_v_eligible + self.silent_eligible) / self.eligible

    @property
    def deception_masking_rate(self) -> float:
        if self.eligible <= 0.0:
            return 0.0
        return (self.hamming_m_eligible + self.silent_eligible) / self.eligible

    @property
    def deception_responder_rate(self) -> float:
        if self.responders <= 0.0:
            return 0.0
        return 0.5 * float((self.joint_counts * HAMMING).sum()) / self.responders


@dataclass(frozen=True)
class WeeklyMetrics:
    week: int
    rc: float
    S: float
    V: float
    E: float
    A: float
    I: float
    R: float
    hospitalization: float
    psi_r: float
    eta_r: float
    psi: float
    eta: float
    vaccination_coverage: float
    mask_coverage: float
    claimed_vaccination: float
    claimed_masking: float
    deception_rate: float
    deception_vaccination: float
    deception_masking: float
    deception_overall: float
    deception_responder: float
    sender_utility: float
    receiver_utility: float
    distortion: float
    predicted_hospitalization: float
    information_bits: float
    correction_psi: float
    correction_eta: float


METRIC_FIELDS = tuple(f.name for f in fields(WeeklyMetrics) if f.name != "week")
STRATEGIC_FIELDS = (
    "deception_rate",
    "deception_vaccination",
    "deception_masking",
    "deception_overall",
    "deception_responder",
    "sender_utility",
    "receiver_utility",
    "information_bits",
)


@dataclass(frozen=True)
class RunResult:
    seed: int
    weeks: tuple[WeeklyMetrics, ...]
    week_control: int | None
    disease_control_score: float | None
    peak_hospitalization: float
    final_deception: float
    valid: bool = True
    clamp_events: int = 0
    vaccine_propensity: float = float("nan")
    mask_propensity: float = float("nan")

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(w, name) for w in self.weeks], dtype=float)


@dataclass(frozen=True)
class SummaryStats:
    config: ScenarioConfig
    runs: tuple[RunResult, ...]
    mean: dict
    std: dict
    smoothed_mean: dict
    week_controls: tuple
    n_invalid: int

    @property
    def n_controlled(self) -> int:
        return sum(w is not None for w in self.week_controls)

    @property
    def controlled_fraction(self) -> float:
        return self.n_controlled / len(self.week_controls) if self.week_controls else 0.0

    @property
    def mean_week_control(self) -> float | None:
        """Mean control week over runs that reached control."""
        done = [w for w in self.week_controls if w is not None]
        return float(np.mean(done)) if done else None

    @property
    def mean_week_control_penalized(self) -> float:
        """Mean control week with uncontrolled runs counted as T + 1."""
        horizon = self.config.weeks + 1
        return float(np.mean([horizon if w is None else w for w in self.week_controls]))

    @property
    def week_control_of_mean(self) -> int | None:
        return first_below(self.smoothed_mean["rc"], 1.0)

    @property
    def mean_score(self) -> float:
        """Mean disease-control score with uncontrolled runs scored 0."""
        valid = [r for r in self.runs if r.valid]
        return float(np.mean([r.disease_control_score or 0.0 for r in valid])) if valid else float("nan")

    @property
    def mean_peak_hospitalization(self) -> float:
        return float(np.mean([r.peak_hospitalization for r in self.runs if r.valid]))

    def endpoint(self, name: str) -> float:
        return float(self.mean[name][-1])


@dataclass(frozen=True)
class StressRow:
    factor: str
    equilibrium: str
    delta_score: float
    peak_ratio: float
    base_score: float
    perturbed_score: float
    base_peak: float
    perturbed_peak: float


@dataclass(frozen=True)
class StressReport:
    rows: tuple[StressRow, ...]

    def get(self, factor: str, equilibrium: str) -> StressRow:
        for row in self.rows:
            if row.factor == factor and row.equilibrium == equilibrium:
                return row
        raise KeyError((factor, equilibrium))


def first_below(series: Sequence[float], threshold: float) -> int | None:
    """1-based index of the first value below ``threshold``."""
    for i, v in enumerate(series):
        if v < threshold:
            return i + 1
    return None


def smooth_series(series: Sequence[float], kind: str = "savitzky_golay", **params) -> np.ndarray:
    """Savitzky-Golay (window, order) or exponential (factor) smoothing."""
    x = np.asarray(series, dtype=float)
    if kind == "savitzky_golay":
        window = int(params.get("window", 5))
        order = int(params.get("order", 2))
        if window > len(x):
            raise ValueError(f"window {window} exceeds series length {len(x)}")
        return savgol_filter(x, window, order, mode="interp")
    if kind == "exponential":
        factor = float(params.get("factor", 0.3))
        if not 0.0 < factor <= 1.0:
            raise ValueError("factor must lie in (0, 1]")
        out = np.empty_like(x)
        acc = x[0] if len(x) else 0.0
        for i, v in enumerate(x):
            acc = v if i == 0 else factor * v + (1.0 - factor) * acc
            out[i] = acc
        return out
    raise ValueError(f"unknown smoothing kind {kind!r}")


def _status_population(state: CompartmentState, masking_rate: float) -> tuple[np.ndarray, np.ndarray]:
    """Expected counts by status for eligible (non-R) and recovered members.

    V members are vaccinated; S, E, A and I members are not.  Everyone masks
    with probability ``masking_rate``.
    """
    unvacc = state.S + state.E + state.A + state.I
    m = masking_rate
    eligible = np.array([state.V * m, state.V * (1.0 - m), unvacc * m, unvacc * (1.0 - m)])
    recovered = np.array([0.0, 0.0, state.R * m, state.R * (1.0 - m)])
    return eligible, recovered


def _sample_statuses(state: CompartmentState, masking_rate: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    total = int(round(state.K))
    probs = np.array([state.V, state.S + state.E + state.A + state.I, state.R], dtype=float)
    probs = probs / probs.sum()
    n_v, n_u, n_r = rng.multinomial(total, probs)
    masked = rng.binomial([n_v, n_u, n_r], masking_rate)
    eligible = np.array([masked[0], n_v - masked[0], masked[1], n_u - masked[1]], dtype=float)
    recovered = np.array([0, 0, masked[2], n_r - masked[2]], dtype=float)
    return eligible, recovered


def population_report(
    profile: BehaviorProfile,
    strategy: SenderStrategy,
    state: CompartmentState,
    rng: np.random.Generator | None,
    masking_rate: float,
) -> ReportAggregate:
    """Sample one week of reports; ``rng=None`` returns expected counts.

    Recovered members report truthfully; a ``non_responsive_share`` of every
    group stays silent.
    """
    share = profile.non_responsive_share
    g = strategy.matrix
    if rng is None:
        eligible, recovered = _status_population(state, masking_rate)
        silent_e = eligible * share
        silent_r = recovered * share
        joint = (eligible - silent_e)[:, None] * g + np.diag(recovered - silent_r)
        joint_e = (eligible - silent_e)[:, None] * g
    else:
        eligible, recovered = _sample_statuses(state, masking_rate, rng)
        silent_e = rng.binomial(eligible.astype(np.int64), share).astype(float)
        silent_r = rng.binomial(recovered.astype(np.int64), share).astype(float)
        joint_e = np.zeros((N_STATUS, N_STATUS))
        for c in range(N_STATUS):
            n = int(eligible[c] - silent_e[c])
            if n > 0:
                joint_e[c] = rng.multinomial(n, g[c])
        joint = joint_e + np.diag(recovered - silent_r)
    messages = joint.sum(axis=0)
    responders = messages.sum()
    prior = profile.prior
    if responders > 0.0:
        claimed_v = float((messages[0] + messages[1]) / responders)
        claimed_m = float((messages[0] + messages[2]) / responders)
    else:
        claimed_v = float(prior[0] + prior[1])
        claimed_m = float(prior[0] + prior[2])
    total = float(eligible.sum() + recovered.sum())
    statuses = eligible + recovered
    return ReportAggregate(
        joint_counts=joint,
        silent=float(silent_e.sum() + silent_r.sum()),
        silent_eligible=share * float(eligible.sum()) if rng is None else float(silent_e.sum()),
        eligible=float(eligible.sum()),
        population=total,
        claimed_vaccination=claimed_v,
        claimed_masking=claimed_m,
        true_vaccination=float((statuses[0] + statuses[1]) / total) if total else 0.0,
        true_masking=float((statuses[0] + statuses[2]) / total) if total else 0.0,
        hamming_v_eligible=float((joint_e * HAMMING_V).sum()),
        hamming_m_eligible=float((joint_e * HAMMING_M).sum()),
    )


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0.0]
    return float(-(p * np.log(p)).sum())


def _strategic_metrics(report: ReportAggregate, game: GameParams, rc: float, D: float):
    """(sender utility, receiver utility, information bits) for one week."""
    joint = report.joint_counts
    total = joint.sum()
    # Only misreported bits collect incentives; truthful and recovered
    # responders contribute nothing.
    discount = math.exp(-game.economic_factor * rc)
    sender = float((joint * incentive_table(game)).sum()) * discount / report.population
    if total <= 0.0:
        return sender, -game.distortion_weight * D, 0.0
    pj = joint / total
    h_joint = _entropy(pj.ravel())
    h_c = _entropy(pj.sum(axis=1))
    h_m = _entropy(pj.sum(axis=0))
    conditional = h_joint - h_m  # expected surprise -ln p(c|m), nats
    receiver = -conditional - game.distortion_weight * D
    info = max(0.0, (h_c + h_m - h_joint) / math.log(2.0))
    return sender, receiver, info


def scenario_strategy(config: ScenarioConfig, vaccine_propensity: float, mask_propensity: float) -> SenderStrategy:
    if config.equilibrium == SEPARATING:
        return separating_strategy()
    if config.equilibrium == POOLING:
        return pooling_strategy()
    if config.mixing_alpha is not None:
        return build_strategy(EquilibriumKind.partial_pooling(config.mixing_alpha))
    return per_bit_strategy(vaccine_propensity, mask_propensity)


def _assimilate(config: ScenarioConfig, observed_H: float, recovered: float, claimed_coverage: float) -> CompartmentState:
    """PHA's state estimate from hospitalizations and claimed coverage.

    I = H / xi; A and E follow from the symptomatic split and the
    quasi-steady latent balance; R comes from the PHA's own forecast.
    """
    epi = config.epi
    xi = epi.hospitalization_ratio
    K = float(config.population)
    p = epi.symptomatic_fraction
    I = observed_H / xi if xi > 0.0 else 0.0
    A = I * (1.0 - p) / p if p > 0.0 else 0.0
    E = I * (epi.recovery_rate + epi.natural_death_rate) / (epi.latency_rate * p) if p > 0.0 else 0.0
    infected = min(K, I + A + E)
    R = min(max(0.0, recovered), K - infected)
    rest = K - infected - R
    V = min(rest, claimed_coverage * K)
    scale = infected / (I + A + E) if I + A + E > 0.0 else 0.0
    return CompartmentState(rest - V, V, E * scale, A * scale, I * scale, R)


def weekly_loop(config: ScenarioConfig, rng_seed: int) -> RunResult:
    """Run one scenario for ``config.weeks`` weeks."""
    rng = np.random.default_rng(rng_seed)
    epi = config.epi
    game = config.game
    K = float(config.population)
    if config.stochastic:
        qv = float(rng.uniform(*VACCINE_BAND))
        qm = float(rng.uniform(*MASK_BAND))
    else:
        qv = 0.5 * sum(VACCINE_BAND)
        qm = 0.5 * sum(MASK_BAND)
    strategy = scenario_strategy(config, qv, qm)
    profile = BehaviorProfile(config.type_distribution, config.non_responsive_share, qv, qm)
    report_rng = rng if config.stochastic else None

    state = CompartmentState.initial(K, config.initial_infected)
    psi, eta = config.psi_init, config.eta_init
    policy = PolicyState(
        config.psi_init,
        config.eta_init,
        step_size=config.step_size,
        psi_max=config.psi_max,
        eta_max=config.eta_max,
        control_step=config.control_step,
        psi_scale=config.psi_scale,
    )
    noise = config.random_noise_scale or (0.0, 0.0)
    prev_model: EstimatedModel | None = None
    recovered_hat = 0.0
    clamps = 0
    weeks: list[WeeklyMetrics] = []
    valid = True
    for t in range(1, config.weeks + 1):
        H = epi.hospitalization_ratio * state.I
        interactive = config.policy != "none"
        report = population_report(profile, strategy, state, report_rng, eta) if interactive else None
        D = 0.0
        predicted = float("nan")
        if config.policy == "adaptive":
            if prev_model is not None:
                predicted_state = prev_model.rollout(policy.corrections)
                predicted = epi.hospitalization_ratio * predicted_state.I
                recovered_hat = predicted_state.R
                record = DistortionRecord(H, predicted, game.distortion_threshold)
                D = record.distortion
            model = EstimatedModel(
                epi,
                _assimilate(config, H, recovered_hat, report.claimed_vaccination),
                policy.recommended_psi,
                report.claimed_masking,
                report.claimed_vaccination,
                config.model_substeps_per_day,
            )
            if prev_model is not None:
                policy = adaptive_update(policy, record, prev_model)
            # Corrections persist between updates; recommendations always sit
            # on top of the current estimates.
            policy = recommend(policy, model)
            prev_model = model
        elif config.policy == "random" and t > 1:
            policy = random_policy(policy, noise, rng)

        if interactive:
            ratio = min(1.0, eta / report.claimed_masking) if report.claimed_masking > 0.0 else 1.0
            psi = policy.recommended_psi
            eta = min(config.eta_max, policy.recommended_eta * ratio)
        coverage = state.V / (state.S + state.V) if state.S + state.V > 0.0 else 0.0
        rc = r_effective_coverage(epi, eta, coverage)
        fr = state.fractions()
        if report is not None:
            sender, receiver, info = _strategic_metrics(report, game, rc, D)
            dec = (
                report.deception_rate,
                report.deception_vaccination_rate,
                report.deception_masking_rate,
                report.deception_overall_rate,
                report.deception_responder_rate,
            )
            claims = (report.claimed_vaccination, report.claimed_masking)
        else:
            sender = receiver = info = float("nan")
            dec = (float("nan"),) * 5
            claims = (float("nan"),) * 2
        weeks.append(
            WeeklyMetrics(
                t, rc, *fr, H / K, policy.recommended_psi, policy.recommended_eta, psi, eta, coverage, eta,
                *claims, *dec, sender, receiver, D, predicted, info, policy.correction_psi, policy.correction_eta,
            )
        )
        params = epi
        if config.stochastic and config.beta_noise_sigma > 0.0:
            factor = math.exp(config.beta_noise_sigma * rng.standard_normal())
            params = epi.with_(base_transmission=epi.base_transmission * factor)
        try:
            state, n_clamp = integrate_week(params, BehaviorRates(psi, eta), state, config.substeps_per_day)
        except IntegrationDivergedError:
            valid = False
            break
        clamps += n_clamp

    rc_series = np.array([w.rc for w in weeks])
    week_control = None
    if valid and len(rc_series) >= config.sg_window:
        week_control = first_below(smooth_series(rc_series, "savitzky_golay", window=config.sg_window, order=config.sg_order), 1.0)
    score = 1.0 - week_control / config.weeks if week_control is not None else None
    return RunResult(
        seed=rng_seed,
        weeks=tuple(weeks),
        week_control=week_control,
        disease_control_score=score,
        peak_hospitalization=max(w.hospitalization for w in weeks),
        final_deception=weeks[-1].deception_rate,
        valid=valid,
        clamp_events=clamps,
        vaccine_propensity=qv,
        mask_propensity=qm,
    )


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_many(config: ScenarioConfig, seeds: Sequence[int], threads: int | None) -> list[RunResult]:
    workers = min(worker_count(threads), len(seeds))
    if workers <= 1:
        return [weekly_loop(config, s) for s in seeds]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(weekly_loop, [config] * len(seeds), seeds))


def calibrate_noise_scale(config: ScenarioConfig) -> tuple[float, float]:
    """Std of weekly recommendation changes in a deterministic adaptive run."""
    reference = replace(config, policy="adaptive", stochastic=False, runs=1)
    run = weekly_loop(reference, config.seed_base)
    dpsi = np.diff(run.series("psi_r"))
    deta = np.diff(run.series("eta_r"))
    return float(np.std(dpsi)), float(np.std(deta))


def summarize(config: ScenarioConfig, runs: Iterable[RunResult]) -> SummaryStats:
    runs = tuple(runs)
    valid = [r for r in runs if r.valid]
    mean: dict = {}
    std: dict = {}
    smoothed: dict = {}
    for name in METRIC_FIELDS:
        if valid:
            data = np.array([r.series(name) for r in valid])
            # Shifted-data moments: exact when every run agrees.
            shift = data[0]
            dev = data - shift
            mean_dev = dev.mean(axis=0)
            mean[name] = shift + mean_dev
            std[name] = np.sqrt(np.maximum(0.0, (dev**2).mean(axis=0) - mean_dev**2))
        else:
            mean[name] = std[name] = np.full(config.weeks, np.nan)
        series = mean[name]
        if name in STRATEGIC_FIELDS:
            smoothed[name] = smooth_series(series, "exponential", factor=config.exp_factor)
        elif len(series) >= config.sg_window:
            smoothed[name] = smooth_series(series, "savitzky_golay", window=config.sg_window, order=config.sg_order)
        else:
            smoothed[name] = series.copy()
    return SummaryStats(
        config=config,
        runs=runs,
        mean=mean,
        std=std,
        smoothed_mean=smoothed,
        week_controls=tuple(r.week_control for r in valid),
        n_invalid=len(runs) - len(valid),
    )


def monte_carlo(config: ScenarioConfig, seeds: Sequence[int] | None = None, threads: int | None = None) -> SummaryStats:
    """Independent runs aggregated in seed order."""
    seeds = tuple(config.seeds if seeds is None else seeds)
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    if config.policy == "random" and config.random_noise_scale is None:
        config = replace(config, random_noise_scale=calibrate_noise_scale(config))
    return summarize(config, _run_many(config, seeds, threads))


def stress_config(base: ScenarioConfig, factor: str) -> ScenarioConfig:
    if factor == "ihr":
        xi = min(1.0, base.epi.hospitalization_ratio * base.stress_ihr_factor)
        return replace(base, epi=base.epi.with_(hospitalization_ratio=xi))
    if factor == "incentives":
        g = base.game
        f = base.stress_incentive_factor
        return replace(
            base,
            game=replace(g, vaccine_lie_incentive=g.vaccine_lie_incentive * f, mask_lie_incentive=g.mask_lie_incentive * f),
        )
    if factor == "nonresponsive_share":
        return replace(base, non_responsive_share=base.stress_nonresponsive_share)
    if factor == "vaccine_efficacy":
        return replace(base, epi=base.epi.with_(vaccine_efficacy=base.stress_vaccine_efficacy))
    if factor == "identity":
        return base
    raise ValueError(f"unknown stress factor {factor!r}")


def compare(factor: str, base: SummaryStats, perturbed: SummaryStats) -> StressRow:
    return StressRow(
        factor=factor,
        equilibrium=base.config.equilibrium,
        delta_score=perturbed.mean_score - base.mean_score,
        peak_ratio=perturbed.mean_peak_hospitalization / base.mean_peak_hospitalization,
        base_score=base.mean_score,
        perturbed_score=perturbed.mean_score,
        base_peak=base.mean_peak_hospitalization,
        perturbed_peak=perturbed.mean_peak_hospitalization,
    )


def stress_grid(
    base: ScenarioConfig,
    factors: Sequence[str] = STRESS_FACTORS,
    equilibria: Sequence[str] = KINDS,
    threads: int | None = None,
) -> StressReport:
    """Perturbed vs baseline outcomes for each factor and equilibrium."""
    rows = []
    for kind in equilibria:
        cfg = replace(base, equilibrium=kind)
        reference = monte_carlo(cfg, threads=threads)
        for factor in factors:
            perturbed = reference if factor == "identity" else monte_carlo(stress_config(cfg, factor), threads=threads)
            rows.append(compare(factor, reference, perturbed))
    return StressReport(tuple(rows))


def tolerance_frontier(config: ScenarioConfig, alphas: Sequence[float] = tuple(np.linspace(0.0, 1.0, 11))):
    """Largest final deception rate whose week-T R_c is below 1, sweeping alpha.

    Empirical: deterministic runs of the single-alpha partial-pooling
    strategy under the configured policy.  Returns (frontier, rows).
    """
    rows = []
    for a in alphas:
        cfg = replace(config, equilibrium=PARTIAL_POOLING, mixing_alpha=float(a), stochastic=False, runs=1)
        run = weekly_loop(cfg, config.seed_base)
        rows.append((float(a), run.final_deception, run.weeks[-1].rc))
    feasible = [d for _, d, rc in rows if rc < 1.0]
    return (max(feasible) if feasible else None), rows


def config_dict(config: ScenarioConfig) -> dict:
    return asdict(config)
