"""Config parsing, result serialization and the ``epi-signal`` command line.

Configs are INI documents with sections [epi], [game], [behavior],
[policy], [simulation] and [stress]; every key is optional and defaults to
the baseline parameter table.  Unknown sections or keys are rejected.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .epi_core import BehaviorRates, EpiParams
from .equilibria import (
    KINDS,
    PARTIAL_POOLING,
    NoInteriorSolutionError,
    alpha_approximation,
    existence_window,
    solve_alpha_fixed_point,
)
from .signaling import GameParams
from .simulation import (
    METRIC_FIELDS,
    POLICIES,
    STRESS_FACTORS,
    RunResult,
    ScenarioConfig,
    StressReport,
    SummaryStats,
    monte_carlo,
    stress_grid,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4

SECTIONS = ("epi", "game", "behavior", "policy", "simulation", "stress")
RATE_LEVELS = {"high": (0.05, 0.10), "low": (0.005, 0.01)}
GRID_POLICIES = ("adaptive", "random")
INCENTIVE_LEVELS = ("base", "raised")
CSV_COLUMNS = ("scenario", "run", "seed", "week") + METRIC_FIELDS
LONG_COLUMNS = ("scenario", "metric", "week", "run", "value")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


class DivergenceError(RuntimeError):
    """Every Monte Carlo run diverged."""


def _nonneg(x: float) -> str | None:
    return None if x >= 0.0 else "must be >= 0"


def _pos(x: float) -> str | None:
    return None if x > 0.0 else "must be > 0"


def _unit(x: float) -> str | None:
    return None if 0.0 <= x <= 1.0 else "must lie in [0, 1]"


def _open_unit(x: float) -> str | None:
    return None if 0.0 < x <= 1.0 else "must lie in (0, 1]"


def _at_least_one(x: int) -> str | None:
    return None if x >= 1 else "must be >= 1"


def _choice(options: Sequence[str]) -> Callable[[str], str | None]:
    def check(x: str) -> str | None:
        return None if x in options else f"must be one of {', '.join(options)}"

    return check


def _optional_unit(x: float | None) -> str | None:
    return None if x is None else _unit(x)


def _optional_nonneg(x: float | None) -> str | None:
    return None if x is None else _nonneg(x)


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("true", "yes", "on", "1"):
        return True
    if value in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional_float(text: str) -> float | None:
    return None if text.strip().lower() in ("none", "auto", "") else float(text)


@dataclass(frozen=True)
class Key:
    section: str
    name: str
    parse: Callable[[str], Any]
    default: Any
    check: Callable[[Any], str | None] | None = None

    @property
    def path(self) -> str:
        return f"{self.section}.{self.name}"


KEYS = (
    Key("epi", "mu", float, 1.0 / 27375.0, _nonneg),
    Key("epi", "beta0", float, 0.35, _nonneg),
    Key("epi", "delta", float, 0.45, _unit),
    Key("epi", "gamma_inv_days", float, 10.0, _pos),
    Key("epi", "b", float, 0.5, _unit),
    Key("epi", "k_inv_days", float, 5.0, _pos),
    Key("epi", "p", float, 0.67, _unit),
    Key("epi", "xi", float, 0.05, _unit),
    Key("game", "I_v", float, 1.0, _nonneg),
    Key("game", "I_m", float, 0.5, _nonneg),
    Key("game", "lambda1", float, 0.2, _nonneg),
    Key("game", "lambda2", float, 0.01, _nonneg),
    Key("game", "a", float, 0.5, _nonneg),
    Key("game", "alpha_rsa", float, 1.0, _pos),
    Key("game", "D_star", float, 1.0, _nonneg),
    Key("behavior", "nonresponsive_share", float, 0.3, _unit),
    Key("behavior", "psi_init", float, 0.05, _nonneg),
    Key("behavior", "eta_init", float, 0.10, _unit),
    Key("behavior", "pi_00", float, 0.25, _unit),
    Key("behavior", "pi_01", float, 0.25, _unit),
    Key("behavior", "pi_10", float, 0.25, _unit),
    Key("behavior", "pi_11", float, 0.25, _unit),
    Key("policy", "policy", str, "adaptive", _choice(POLICIES)),
    Key("policy", "step_size", float, 0.05, _pos),
    Key("policy", "control_step", float, 0.03, _nonneg),
    Key("policy", "psi_scale", float, 0.3, _pos),
    Key("policy", "psi_max", float, 0.2, _nonneg),
    Key("policy", "eta_max", float, 0.9, _unit),
    Key("policy", "random_sigma_psi", _parse_optional_float, None, _optional_nonneg),
    Key("policy", "random_sigma_eta", _parse_optional_float, None, _optional_nonneg),
    Key("simulation", "equilibrium", str, "separating", _choice(KINDS)),
    Key("simulation", "mixing_alpha", _parse_optional_float, None, _optional_unit),
    Key("simulation", "K", int, 10_000, _at_least_one),
    Key("simulation", "I0", float, 150.0, _nonneg),
    Key("simulation", "T_weeks", int, 26, _at_least_one),
    Key("simulation", "n_runs", int, 50, _at_least_one),
    Key("simulation", "seed_base", int, 0, None),
    Key("simulation", "stochastic", _parse_bool, True, None),
    Key("simulation", "beta_noise_sigma", float, 0.05, _nonneg),
    Key("simulation", "substeps_per_day", int, 10, _at_least_one),
    Key("simulation", "model_substeps_per_day", int, 2, _at_least_one),
    Key("simulation", "sg_window", int, 5, _at_least_one),
    Key("simulation", "sg_order", int, 2, _nonneg),
    Key("simulation", "exp_factor", float, 0.3, _open_unit),
    Key("stress", "ihr_factor", float, 2.0, _nonneg),
    Key("stress", "incentive_factor", float, 2.0, _nonneg),
    Key("stress", "nonresponsive_share", float, 0.5, _unit),
    Key("stress", "vaccine_efficacy", float, 0.70, _unit),
)
KEY_INDEX = {(k.section, k.name): k for k in KEYS}


def _read_values(text: str) -> dict[str, Any]:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str  # keys are case-sensitive symbols (I_v, K, ...)
    try:
        parser.read_string(text)
    except configparser.ParsingError as exc:
        # MissingSectionHeaderError is a ParsingError with a single lineno
        lines = getattr(exc, "errors", None) or [(getattr(exc, "lineno", "?"), getattr(exc, "line", ""))]
        lineno, line = lines[0]
        raise ConfigError(f"parse error at line {lineno}: {str(line).strip()!r}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"parse error: {exc}") from exc
    values = {k.path: k.default for k in KEYS}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{section}: unknown section")
        for name, raw in parser.items(section):
            key = KEY_INDEX.get((section, name))
            if key is None:
                raise ConfigError(f"{section}.{name}: unknown key")
            try:
                value = key.parse(raw.strip())
            except ValueError as exc:
                raise ConfigError(f"{key.path}: cannot parse {raw!r} ({exc})") from exc
            if isinstance(value, float) and not math.isfinite(value):
                raise ConfigError(f"{key.path}: must be finite")
            values[key.path] = value
    for key in KEYS:
        problem = key.check(values[key.path]) if key.check else None
        if problem:
            raise ConfigError(f"{key.path}: {problem}, got {values[key.path]!r}")
    return values


def _build(values: dict[str, Any]) -> ScenarioConfig:
    v = values
    K = v["simulation.K"]
    epi = EpiParams(
        birth_rate=v["epi.mu"] * K,
        natural_death_rate=v["epi.mu"],
        base_transmission=v["epi.beta0"],
        asymptomatic_relative_infectiousness=v["epi.b"],
        symptomatic_fraction=v["epi.p"],
        latency_rate=1.0 / v["epi.k_inv_days"],
        recovery_rate=1.0 / v["epi.gamma_inv_days"],
        vaccine_efficacy=v["epi.delta"],
        hospitalization_ratio=v["epi.xi"],
    )
    game = GameParams(
        vaccine_lie_incentive=v["game.I_v"],
        mask_lie_incentive=v["game.I_m"],
        semantic_weight=v["game.lambda1"],
        distortion_weight=v["game.lambda2"],
        rationality=v["game.alpha_rsa"],
        economic_factor=v["game.a"],
        distortion_threshold=v["game.D_star"],
    )
    pi = tuple(v[f"behavior.pi_{s}"] for s in ("00", "01", "10", "11"))
    if abs(sum(pi) - 1.0) > 1e-9:
        raise ConfigError(f"behavior.pi_00..pi_11: must sum to 1, got {sum(pi)!r}")
    sig_psi, sig_eta = v["policy.random_sigma_psi"], v["policy.random_sigma_eta"]
    if (sig_psi is None) != (sig_eta is None):
        raise ConfigError("policy.random_sigma_psi: set both random sigmas or neither")
    if v["behavior.psi_init"] > v["policy.psi_max"]:
        raise ConfigError("behavior.psi_init: must not exceed policy.psi_max")
    if v["behavior.eta_init"] > v["policy.eta_max"]:
        raise ConfigError("behavior.eta_init: must not exceed policy.eta_max")
    if v["simulation.I0"] > K:
        raise ConfigError("simulation.I0: must not exceed simulation.K")
    if v["simulation.sg_order"] >= v["simulation.sg_window"]:
        raise ConfigError("simulation.sg_order: must be smaller than simulation.sg_window")
    return ScenarioConfig(
        equilibrium=v["simulation.equilibrium"],
        policy=v["policy.policy"],
        psi_init=v["behavior.psi_init"],
        eta_init=v["behavior.eta_init"],
        epi=epi,
        game=game,
        population=K,
        initial_infected=v["simulation.I0"],
        weeks=v["simulation.T_weeks"],
        runs=v["simulation.n_runs"],
        seed_base=v["simulation.seed_base"],
        non_responsive_share=v["behavior.nonresponsive_share"],
        type_distribution=pi,
        mixing_alpha=v["simulation.mixing_alpha"],
        stochastic=v["simulation.stochastic"],
        beta_noise_sigma=v["simulation.beta_noise_sigma"],
        substeps_per_day=v["simulation.substeps_per_day"],
        model_substeps_per_day=v["simulation.model_substeps_per_day"],
        step_size=v["policy.step_size"],
        control_step=v["policy.control_step"],
        psi_scale=v["policy.psi_scale"],
        psi_max=v["policy.psi_max"],
        eta_max=v["policy.eta_max"],
        random_noise_scale=None if sig_psi is None else (sig_psi, sig_eta),
        sg_window=v["simulation.sg_window"],
        sg_order=v["simulation.sg_order"],
        exp_factor=v["simulation.exp_factor"],
        stress_ihr_factor=v["stress.ihr_factor"],
        stress_incentive_factor=v["stress.incentive_factor"],
        stress_nonresponsive_share=v["stress.nonresponsive_share"],
        stress_vaccine_efficacy=v["stress.vaccine_efficacy"],
    )


def parse_config(text: str) -> ScenarioConfig:
    """Validated ScenarioConfig from INI text; missing keys take defaults."""
    values = _read_values(text)
    try:
        return _build(values)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def config_values(config: ScenarioConfig) -> dict[str, Any]:
    """Config keyed by ``section.name``, the inverse of parse_config."""
    epi, game = config.epi, config.game
    sigma = config.random_noise_scale
    pi = config.type_distribution
    return {
        "epi.mu": epi.natural_death_rate,
        "epi.beta0": epi.base_transmission,
        "epi.delta": epi.vaccine_efficacy,
        "epi.gamma_inv_days": 1.0 / epi.recovery_rate,
        "epi.b": epi.asymptomatic_relative_infectiousness,
        "epi.k_inv_days": 1.0 / epi.latency_rate,
        "epi.p": epi.symptomatic_fraction,
        "epi.xi": epi.hospitalization_ratio,
        "game.I_v": game.vaccine_lie_incentive,
        "game.I_m": game.mask_lie_incentive,
        "game.lambda1": game.semantic_weight,
        "game.lambda2": game.distortion_weight,
        "game.a": game.economic_factor,
        "game.alpha_rsa": game.rationality,
        "game.D_star": game.distortion_threshold,
        "behavior.nonresponsive_share": config.non_responsive_share,
        "behavior.psi_init": config.psi_init,
        "behavior.eta_init": config.eta_init,
        "behavior.pi_00": pi[0],
        "behavior.pi_01": pi[1],
        "behavior.pi_10": pi[2],
        "behavior.pi_11": pi[3],
        "policy.policy": config.policy,
        "policy.step_size": config.step_size,
        "policy.control_step": config.control_step,
        "policy.psi_scale": config.psi_scale,
        "policy.psi_max": config.psi_max,
        "policy.eta_max": config.eta_max,
        "policy.random_sigma_psi": None if sigma is None else sigma[0],
        "policy.random_sigma_eta": None if sigma is None else sigma[1],
        "simulation.equilibrium": config.equilibrium,
        "simulation.mixing_alpha": config.mixing_alpha,
        "simulation.K": config.population,
        "simulation.I0": config.initial_infected,
        "simulation.T_weeks": config.weeks,
        "simulation.n_runs": config.runs,
        "simulation.seed_base": config.seed_base,
        "simulation.stochastic": config.stochastic,
        "simulation.beta_noise_sigma": config.beta_noise_sigma,
        "simulation.substeps_per_day": config.substeps_per_day,
        "simulation.model_substeps_per_day": config.model_substeps_per_day,
        "simulation.sg_window": config.sg_window,
        "simulation.sg_order": config.sg_order,
        "simulation.exp_factor": config.exp_factor,
        "stress.ihr_factor": config.stress_ihr_factor,
        "stress.incentive_factor": config.stress_incentive_factor,
        "stress.nonresponsive_share": config.stress_nonresponsive_share,
        "stress.vaccine_efficacy": config.stress_vaccine_efficacy,
    }


def format_float(x: float) -> str:
    """17 significant digits: exact round trip for 64-bit floats."""
    return format(float(x), ".17g")


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def serialize(config: ScenarioConfig) -> str:
    """Canonical INI text: every section and key in fixed order."""
    values = config_values(config)
    lines: list[str] = []
    for section in SECTIONS:
        lines.append(f"[{section}]")
        for key in KEYS:
            if key.section == section:
                lines.append(f"{key.name} = {_format_value(values[key.path])}")
        lines.append("")
    return "\n".join(lines)


def atomic_write(path: Path, data: str) -> None:
    """Write-temp-then-rename so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def weekly_rows(scenario: str, summary: SummaryStats) -> list[list[Any]]:
    """One row per run per week, then mean and std rows per week."""
    rows: list[list[Any]] = []
    for i, run in enumerate(summary.runs):
        for w in run.weeks:
            rows.append([scenario, i, run.seed, w.week] + [float(getattr(w, f)) for f in METRIC_FIELDS])
    for label, table in (("mean", summary.mean), ("std", summary.std)):
        for t in range(summary.config.weeks):
            rows.append([scenario, label, "", t + 1] + [float(table[f][t]) for f in METRIC_FIELDS])
    return rows


def weekly_csv(scenario: str, summary: SummaryStats) -> str:
    return _csv_text(CSV_COLUMNS, weekly_rows(scenario, summary))


def _json_float(x: float | None) -> float | None:
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _run_record(run: RunResult) -> dict[str, Any]:
    return {
        "seed": run.seed,
        "valid": run.valid,
        "week_control": run.week_control,
        "disease_control_score": _json_float(run.disease_control_score),
        "peak_hospitalization": _json_float(run.peak_hospitalization),
        "final_deception": _json_float(run.final_deception),
        "clamp_events": run.clamp_events,
    }


def summary_dict(scenario: str, summary: SummaryStats) -> dict[str, Any]:
    cfg = summary.config
    return {
        "scenario": scenario,
        "equilibrium": cfg.equilibrium,
        "policy": cfg.policy,
        "psi_init": cfg.psi_init,
        "eta_init": cfg.eta_init,
        "n_runs": len(summary.runs),
        "n_invalid": summary.n_invalid,
        "controlled_fraction": summary.controlled_fraction,
        "mean_week_control": _json_float(summary.mean_week_control),
        "mean_week_control_penalized": _json_float(summary.mean_week_control_penalized),
        "week_control_of_mean": summary.week_control_of_mean,
        "mean_disease_control_score": _json_float(summary.mean_score),
        "mean_peak_hospitalization": _json_float(summary.mean_peak_hospitalization),
        "final_deception_rate": _json_float(summary.endpoint("deception_rate")),
        "random_noise_scale": None if cfg.random_noise_scale is None else list(cfg.random_noise_scale),
        "runs": [_run_record(r) for r in summary.runs],
    }


def _dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def write_scenario(out_dir: Path, scenario: str, summary: SummaryStats) -> dict[str, Any]:
    record = summary_dict(scenario, summary)
    atomic_write(Path(out_dir) / "weekly.csv", weekly_csv(scenario, summary))
    atomic_write(Path(out_dir) / "summary.json", _dump_json(record))
    return record


def _checked(summary: SummaryStats) -> SummaryStats:
    if summary.n_invalid == len(summary.runs):
        raise DivergenceError("every run diverged")
    return summary


def grid_configs(base: ScenarioConfig) -> list[tuple[str, ScenarioConfig]]:
    """Equilibrium x policy x rate level x incentive level (24 cells)."""
    cells = []
    g = base.game
    f = base.stress_incentive_factor
    for kind in KINDS:
        for policy in GRID_POLICIES:
            for rate, (psi, eta) in RATE_LEVELS.items():
                for level in INCENTIVE_LEVELS:
                    game = g if level == "base" else replace(
                        g, vaccine_lie_incentive=g.vaccine_lie_incentive * f, mask_lie_incentive=g.mask_lie_incentive * f
                    )
                    cfg = replace(base, equilibrium=kind, policy=policy, psi_init=psi, eta_init=eta, game=game)
                    cells.append((f"{kind}-{policy}-{rate}-{level}", cfg))
    return cells


def stress_rows(report: StressReport) -> list[list[Any]]:
    return [
        [r.factor, r.equilibrium, r.delta_score, r.peak_ratio, r.base_score, r.perturbed_score, r.base_peak, r.perturbed_peak]
        for r in report.rows
    ]


STRESS_COLUMNS = (
    "factor",
    "equilibrium",
    "delta_score",
    "peak_ratio",
    "base_score",
    "perturbed_score",
    "base_peak",
    "perturbed_peak",
)


def equilibrium_report(config: ScenarioConfig) -> dict[str, Any]:
    """Existence window, verdict and (inside the window) alpha* and residual."""
    reference = BehaviorRates(config.psi_init, config.eta_init)
    prior = config.type_distribution
    verdict = existence_window(config.epi, config.game, prior, reference)
    w = verdict.window
    out: dict[str, Any] = {
        "lambda1": config.game.semantic_weight,
        "lower_bound": w.lower_bound,
        "upper_bound": w.upper_bound,
        "beta_sens": w.beta_sens,
        "rc_separating": w.rc_separating,
        "rc_pooling": w.rc_pooling,
        "verdict": verdict.kind,
        "note": verdict.note,
    }
    if verdict.kind == PARTIAL_POOLING:
        try:
            sol = solve_alpha_fixed_point(config.epi, config.game, prior, reference=reference)
            out["alpha_star"] = sol.mixing_alpha
            out["residual"] = sol.residual
        except NoInteriorSolutionError as exc:
            out["alpha_star"] = None
            out["solver_note"] = str(exc)
        out["alpha_approximation"] = alpha_approximation(config.epi, config.game, prior, reference)
    return out


def plot_data(results_dir: Path) -> str:
    """Long-format (scenario, metric, week, run, value) CSV of every weekly.csv."""
    files = sorted(Path(results_dir).rglob("weekly.csv"))
    if not files:
        raise FileNotFoundError(f"no weekly.csv under {results_dir}")
    rows = []
    for path in files:
        with open(path, newline="", encoding="utf-8") as fh:
            for rec in csv.DictReader(fh):
                for metric in METRIC_FIELDS:
                    rows.append([rec["scenario"], metric, rec["week"], rec["run"], rec[metric]])
    return _csv_text(LONG_COLUMNS, rows)


def load_config(path: str) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _cmd_run(args: argparse.Namespace) -> None:
    cfg = load_config(args.config)
    summary = _checked(monte_carlo(cfg, threads=args.threads))
    record = write_scenario(Path(args.out), args.name, summary)
    print(_dump_json({k: v for k, v in record.items() if k != "runs"}), end="")


def _cmd_grid(args: argparse.Namespace) -> None:
    base = load_config(args.config)
    out = Path(args.out)
    index = []
    for name, cfg in grid_configs(base):
        summary = _checked(monte_carlo(cfg, threads=args.threads))
        record = write_scenario(out / name, name, summary)
        index.append({k: v for k, v in record.items() if k != "runs"})
    atomic_write(out / "grid_summary.json", _dump_json(index))
    print(f"{len(index)} cells written to {out}")


def _cmd_stress(args: argparse.Namespace) -> None:
    base = load_config(args.config)
    report = stress_grid(base, threads=args.threads)
    out = Path(args.out)
    atomic_write(out / "stress.csv", _csv_text(STRESS_COLUMNS, stress_rows(report)))
    atomic_write(out / "stress.json", _dump_json([dict(zip(STRESS_COLUMNS, row)) for row in stress_rows(report)]))
    for r in report.rows:
        print(f"{r.factor:20s} {r.equilibrium:16s} delta_score={r.delta_score:+.3f} peak_ratio={r.peak_ratio:.3f}")


def _cmd_equilibrium(args: argparse.Namespace) -> None:
    text = _dump_json(equilibrium_report(load_config(args.config)))
    if args.out:
        atomic_write(Path(args.out), text)
    print(text, end="")


def _cmd_plot_data(args: argparse.Namespace) -> None:
    text = plot_data(Path(args.results_dir))
    if args.out:
        atomic_write(Path(args.out), text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epi-signal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_cmd(name: str, help_text: str, default_out: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="INI config file")
        p.add_argument("--out", default=default_out, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker processes (default: $EPI_SIGNAL_THREADS)")
        return p

    p = scenario_cmd("run", "Monte Carlo runs of one scenario", "results")
    p.add_argument("--name", default="scenario", help="scenario label in outputs")
    p.set_defaults(func=_cmd_run)
    scenario_cmd("grid", "factorial grid of scenarios", "results/grid").set_defaults(func=_cmd_grid)
    scenario_cmd("stress", "stress-test table", "results/stress").set_defaults(func=_cmd_stress)
    p = sub.add_parser("equilibrium", help="existence window, verdict and alpha*")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="also write the JSON here")
    p.set_defaults(func=_cmd_equilibrium)
    p = sub.add_parser("plot-data", help="long-format CSV from a results directory")
    p.add_argument("results_dir")
    p.add_argument("--out", default=None, help="output CSV (default: stdout)")
    p.set_defaults(func=_cmd_plot_data)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


__all__ = [
    "ConfigError",
    "KEYS",
    "STRESS_FACTORS",
    "config_values",
    "equilibrium_report",
    "grid_configs",
    "main",
    "parse_config",
    "plot_data",
    "serialize",
    "weekly_csv",
]
