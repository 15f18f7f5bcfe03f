"""Seeded experiment runners behind the CLI.

Each runner turns a ResolvedConfig into CSV files plus a metadata.json.
Every sweep point gets its own seed derived from (master seed, kind,
scheme, point), so points are pure functions and can run on any number
of worker threads without changing a byte of output: results are
gathered and sorted before writing.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence, TypeVar

from .. import __version__
from ..channel import GENERATOR_NAME, sample_channels
from ..constellation import (
    Constellation,
    make_apsk,
    make_square_qam,
    normalize,
    parse_complex_array,
    render_complex_array,
)
from ..errors import ConfigError, ParseError
from ..ga import solve_re_point, trace_re_region
from ..metrics import (
    MiConfig,
    harvested_power_analytic,
    mutual_information_mc,
    snr_to_noise_variance,
    ssr_mc,
)
from ..orchestrator import (
    ChatEndpointAgent,
    DesignTask,
    DeviceSimConfig,
    RtfvConfig,
    ScriptedAgent,
    RtfvResult,
    run_rtfv,
    write_transcript,
)
from ..seeding import derive_seed
from .config import ResolvedConfig
from .csvio import write_csv

__all__ = [
    "ExperimentOutcome",
    "run_mi_snr",
    "run_re_region",
    "run_ssr_eh",
    "run_rtfv_experiment",
    "run_ga_design",
]

_FEAS_TOL = 1e-6

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class ExperimentOutcome:
    """What the CLI reports: files written, warnings, and success."""

    csv_paths: tuple[str, ...]
    warnings: tuple[str, ...] = ()
    failed: bool = False


class _SeedBook:
    """derive_seed wrapper that remembers every seed it hands out."""

    def __init__(self, master: int):
        self.master = master
        self.derived: dict[str, int] = {}

    def derive(self, *labels: object) -> int:
        seed = derive_seed(self.master, *labels)
        self.derived["/".join(str(l) for l in labels)] = seed
        return seed


def _map_points(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _emit_metadata(out_dir: Path, rc: ResolvedConfig, seeds: _SeedBook) -> None:
    payload = {
        "tool": "swiptlab",
        "version": __version__,
        "generator": GENERATOR_NAME,
        "seeds": {"master": seeds.master, "derived": seeds.derived},
        "config": rc.to_metadata(),
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    with open(out_dir / "metadata.json", "w", newline="\n") as handle:
        handle.write(text)


def _mi_of(
    rc: ResolvedConfig,
    constellation: Constellation,
    sample_count: int,
    channel_seed: int,
    noise_seed: int,
    sigma2: float | None = None,
) -> float:
    task = rc.task
    channels = sample_channels(sample_count, channel_seed, task.channel_model)
    cfg = MiConfig(
        task.sigma2 if sigma2 is None else sigma2, task.noise_convention, sample_count
    )
    return mutual_information_mc(constellation, math.sqrt(task.rho), channels, cfg, noise_seed)


def _rtfv_scripted_design(rc: ResolvedConfig, seeds: _SeedBook) -> Constellation:
    """Run one scripted full-feedback loop and deploy its best design."""
    task = rc.task
    cfg = RtfvConfig(
        feedback_mode="full",
        max_rounds=rc.rtfv.max_rounds,
        early_stop_patience=rc.rtfv.early_stop_patience,
        duplicate_tolerance=rc.rtfv.duplicate_tolerance,
        agent_kind="scripted",
        seed=seeds.derive("scheme-rtfv", "loop"),
        static_every=rc.rtfv.static_every,
        alternate_codebook=rc.rtfv.alternate_codebook,
    )
    device = DeviceSimConfig(
        threshold=task.eh_threshold,
        rho=task.rho,
        sigma2=task.sigma2,
        eh=task.eh,
        channel_model=task.channel_model,
        channel_count=rc.rtfv.channel_count,
        mi_sample_count=rc.rtfv.mi_sample_count,
        noise_convention=rc.rtfv.noise_convention,
        seed=seeds.derive("scheme-rtfv", "device"),
    )
    agent = ScriptedAgent(seed=seeds.derive("scheme-rtfv", "agent"))
    result = run_rtfv(DesignTask(modulation_order=task.modulation_order, papr_max=task.papr_max), agent, cfg, device)
    if result.best_constellation is None:
        raise ConfigError(
            "scheme 'rtfv-scripted' found no feasible design at the task threshold"
        )
    return result.best_constellation


def _scheme_constellation(scheme: str, rc: ResolvedConfig, seeds: _SeedBook) -> Constellation:
    task = rc.task
    if scheme == "qam16":
        return make_square_qam(16)
    if scheme == "apsk":
        return make_apsk(rc.apsk_phase_span, task.modulation_order)
    if scheme == "from-file":
        try:
            text = Path(rc.constellation_file).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read constellation file: {exc}") from exc
        try:
            return normalize(parse_complex_array(text))
        except (ParseError, ValueError) as exc:
            raise ConfigError(f"bad constellation file: {exc}") from exc
    if scheme == "ga":
        needed = max(rc.ga.fitness_sample_count, rc.ga.final_sample_count)
        channels = sample_channels(
            needed, seeds.derive("scheme-ga", "channels"), task.channel_model
        )
        cfg = replace(rc.ga, seed=seeds.derive("scheme-ga", task.eh_threshold))
        result = solve_re_point(task, cfg, channels)
        if result.constellation is None:
            raise ConfigError(
                f"ga design is analytically infeasible at threshold {task.eh_threshold}"
            )
        return result.constellation
    if scheme == "rtfv-scripted":
        return _rtfv_scripted_design(rc, seeds)
    if scheme == "rtfv-llm":
        raise ConfigError(
            "scheme 'rtfv-llm' is only available through the rtfv experiment"
        )
    raise ConfigError(f"unknown scheme: {scheme!r}")


def run_mi_snr(rc: ResolvedConfig, out_dir: Path, workers: int = 1) -> ExperimentOutcome:
    """MI versus SNR, one curve per scheme; sigma^2 = rho / 10^(snr/10)."""
    seeds = _SeedBook(rc.seed)
    p = rc.mi_snr
    count = int(math.floor((p.snr_stop_db - p.snr_start_db) / p.snr_step_db + 1e-9)) + 1
    grid = [p.snr_start_db + i * p.snr_step_db for i in range(count)]
    designs = {s: _scheme_constellation(s, rc, seeds) for s in rc.schemes}

    def point(job: tuple[str, float]) -> tuple[float, str, float]:
        scheme, snr_db = job
        sigma2 = snr_to_noise_variance(snr_db, rc.task.rho)
        mi = _mi_of(
            rc,
            designs[scheme],
            p.sample_count,
            seeds.derive("mi-snr", scheme, snr_db, "channels"),
            seeds.derive("mi-snr", scheme, snr_db, "noise"),
            sigma2=sigma2,
        )
        return (snr_db, scheme, mi)

    jobs = [(scheme, snr) for scheme in rc.schemes for snr in grid]
    rows = sorted(_map_points(point, jobs, workers), key=lambda r: (r[0], r[1]))
    path = out_dir / "mi_snr.csv"
    write_csv(path, ("snr_db", "scheme", "mi_bits"), rows)
    _emit_metadata(out_dir, rc, seeds)
    return ExperimentOutcome((str(path),))


def _apsk_grid_rows(
    rc: ResolvedConfig, seeds: _SeedBook, workers: int
) -> list[tuple[str, float, float, float, bool]]:
    """Best feasible arc from the span grid at each threshold."""
    task = rc.task

    def evaluate(span: float) -> tuple[float, float]:
        c = make_apsk(span, task.modulation_order)
        p_h = harvested_power_analytic(c, task.rho, task.eh)
        mi = _mi_of(
            rc,
            c,
            rc.re_region.sample_count,
            seeds.derive("re-region", "apsk", span, "channels"),
            seeds.derive("re-region", "apsk", span, "noise"),
        )
        return (p_h, mi)

    evals = _map_points(evaluate, list(rc.apsk_span_grid), workers)
    rows = []
    for th in rc.re_region.thresholds:
        feasible = [(p_h, mi) for p_h, mi in evals if p_h >= th - _FEAS_TOL]
        if feasible:
            p_h, mi = max(feasible, key=lambda e: e[1])
            rows.append(("apsk", th, p_h, mi, True))
        else:
            p_h, mi = max(evals, key=lambda e: e[0])
            rows.append(("apsk", th, p_h, mi, False))
    return rows


def run_re_region(rc: ResolvedConfig, out_dir: Path, workers: int = 1) -> ExperimentOutcome:
    """Rate/energy region: best MI at each harvested-power threshold."""
    seeds = _SeedBook(rc.seed)
    task = rc.task
    thresholds = rc.re_region.thresholds
    rows: list[tuple[str, float, float, float, bool]] = []

    for scheme in rc.schemes:
        if scheme == "ga":
            needed = max(rc.ga.fitness_sample_count, rc.ga.final_sample_count)
            channels = sample_channels(
                needed, seeds.derive("re-region", "ga", "channels"), task.channel_model
            )
            cfg = replace(rc.ga, seed=seeds.derive("re-region", "ga"))
            trace = trace_re_region(task, list(thresholds), cfg, channels)
            for th, result in trace.results:
                rows.append((scheme, th, result.p_h_final, result.mi_final, result.feasible))
        elif scheme == "apsk":
            rows.extend(_apsk_grid_rows(rc, seeds, workers))
        else:
            c = _scheme_constellation(scheme, rc, seeds)
            p_h = harvested_power_analytic(c, task.rho, task.eh)
            mi = _mi_of(
                rc,
                c,
                rc.re_region.sample_count,
                seeds.derive("re-region", scheme, "channels"),
                seeds.derive("re-region", scheme, "noise"),
            )
            for th in thresholds:
                rows.append((scheme, th, p_h, mi, p_h >= th - _FEAS_TOL))

    rows.sort(key=lambda r: (r[1], r[0]))
    path = out_dir / "re_region.csv"
    write_csv(path, ("scheme", "p_th", "p_h", "mi_bits", "feasible"), rows)
    _emit_metadata(out_dir, rc, seeds)
    if not any(r[4] for r in rows):
        return ExperimentOutcome(
            (str(path),),
            warnings=("no scheme met any threshold in the grid",),
            failed=True,
        )
    return ExperimentOutcome((str(path),))


def run_ssr_eh(rc: ResolvedConfig, out_dir: Path, workers: int = 1) -> ExperimentOutcome:
    """Symbol success rate and harvested power across the power split."""
    seeds = _SeedBook(rc.seed)
    task = rc.task
    step = rc.ssr.rho_step
    count = int(round(1.0 / step))
    if abs(count * step - 1.0) > 1e-9:
        count = int(math.floor(1.0 / step + 1e-12))
    rhos = [min(1.0, i * step) for i in range(count + 1)]
    designs = {s: _scheme_constellation(s, rc, seeds) for s in rc.schemes}

    def point(job: tuple[str, float]) -> tuple[str, float, float, float]:
        scheme, rho = job
        c = designs[scheme]
        p_h = harvested_power_analytic(c, rho, task.eh)
        channels = sample_channels(
            rc.ssr.symbols, seeds.derive("ssr-eh", scheme, rho, "channels"), task.channel_model
        )
        ssr = ssr_mc(
            c, rho, task.sigma2, channels, rc.ssr.symbols, seeds.derive("ssr-eh", scheme, rho, "run")
        )
        return (scheme, rho, p_h, ssr)

    jobs = [(scheme, rho) for scheme in rc.schemes for rho in rhos]
    rows = sorted(_map_points(point, jobs, workers), key=lambda r: (r[1], r[0]))
    path = out_dir / "ssr_eh.csv"
    write_csv(path, ("scheme", "rho", "p_h", "ssr"), rows)
    _emit_metadata(out_dir, rc, seeds)
    return ExperimentOutcome((str(path),))


def _run_id(threshold: float, mode: str) -> str:
    return f"th{threshold:g}-{mode}"


def _best_feasible_p_h(result: RtfvResult) -> float:
    best = (float("-inf"), 0.0)
    for record in result.records:
        fb = record.feedback
        if fb.above_threshold and fb.mi > best[0]:
            best = (fb.mi, fb.p_h)
    return best[1]


def run_rtfv_experiment(rc: ResolvedConfig, out_dir: Path, workers: int = 1) -> ExperimentOutcome:
    """One closed loop per (threshold, feedback mode), plus transcripts."""
    seeds = _SeedBook(rc.seed)
    task = rc.task
    rp = rc.rtfv
    if rp.agent == "llm":
        # Fail on missing RTFV_LLM_* configuration before any round runs.
        ChatEndpointAgent.from_env()

    design_task = DesignTask(
        modulation_order=task.modulation_order, papr_max=task.papr_max
    )

    def point(job: tuple[float, str]) -> tuple[float, str, RtfvResult]:
        threshold, mode = job
        cfg = RtfvConfig(
            feedback_mode=mode,
            max_rounds=rp.max_rounds,
            early_stop_patience=rp.early_stop_patience,
            duplicate_tolerance=rp.duplicate_tolerance,
            agent_kind=rp.agent,
            seed=seeds.derive("rtfv", threshold, mode, "loop"),
            static_every=rp.static_every,
            alternate_codebook=rp.alternate_codebook,
            include_d_min=rp.include_d_min,
        )
        device = DeviceSimConfig(
            threshold=threshold,
            rho=task.rho,
            sigma2=task.sigma2,
            eh=task.eh,
            channel_model=task.channel_model,
            channel_count=rp.channel_count,
            mi_sample_count=rp.mi_sample_count,
            noise_convention=rp.noise_convention,
            seed=seeds.derive("rtfv", threshold, mode, "device"),
        )
        if rp.agent == "scripted":
            agent = ScriptedAgent(seed=seeds.derive("rtfv", threshold, mode, "agent"))
        else:
            agent = ChatEndpointAgent.from_env()
        return (threshold, mode, run_rtfv(design_task, agent, cfg, device))

    jobs = [(th, mode) for th in rp.thresholds for mode in rp.modes]
    results = _map_points(point, jobs, workers)
    results.sort(key=lambda r: (r[0], r[1]))

    summary_rows = []
    trace_rows = []
    for threshold, mode, result in results:
        run_id = _run_id(threshold, mode)
        summary_rows.append(
            (
                threshold,
                mode,
                len(result.records),
                result.reward_state.value,
                result.reward_state.mi_best_feasible,
                _best_feasible_p_h(result),
                result.feasible_found,
            )
        )
        for record in result.records:
            trace_rows.append((run_id, record.round, record.reward))
        write_transcript(result.records, out_dir / f"transcript_{run_id}.jsonl")

    summary_path = out_dir / "rtfv_summary.csv"
    write_csv(
        summary_path,
        ("threshold", "mode", "rounds_used", "final_reward", "best_mi", "best_p_h", "feasible"),
        summary_rows,
    )
    trace_path = out_dir / "reward_trace.csv"
    write_csv(trace_path, ("run_id", "round", "reward"), trace_rows)
    _emit_metadata(out_dir, rc, seeds)
    return ExperimentOutcome((str(summary_path), str(trace_path)))


def run_ga_design(rc: ResolvedConfig, out_dir: Path, workers: int = 1) -> ExperimentOutcome:
    """Single GA solve at the task threshold; saves the design itself."""
    seeds = _SeedBook(rc.seed)
    task = rc.task
    needed = max(rc.ga.fitness_sample_count, rc.ga.final_sample_count)
    channels = sample_channels(
        needed, seeds.derive("ga-design", "channels"), task.channel_model
    )
    cfg = replace(rc.ga, seed=seeds.derive("ga-design", task.eh_threshold))
    result = solve_re_point(task, cfg, channels)

    path = out_dir / "ga_design.csv"
    write_csv(
        path,
        ("threshold", "mi_bits", "p_h", "papr", "feasible", "generations"),
        [
            (
                task.eh_threshold,
                result.mi_final,
                result.p_h_final,
                result.papr_final,
                result.feasible,
                result.generations_run,
            )
        ],
    )
    if result.constellation is not None:
        with open(out_dir / "constellation.txt", "w", newline="\n") as handle:
            handle.write(render_complex_array(result.constellation) + "\n")
    _emit_metadata(out_dir, rc, seeds)
    if not result.feasible:
        reason = "analytic bound" if result.declared_infeasible else "final evaluation"
        return ExperimentOutcome(
            (str(path),),
            warnings=(f"design infeasible at threshold {task.eh_threshold} ({reason})",),
            failed=True,
        )
    return ExperimentOutcome((str(path),))
