"""Real-coded genetic algorithm for rate/energy design points.

Solves: maximize mutual information over M complex points subject to a
harvested-power floor and a PAPR ceiling. Unit average energy and a
symmetric phase span are equality constraints, so candidates are repaired
into that manifold instead of being penalized; the two inequality
constraints enter the fitness as hinge penalties.

One solve uses common random numbers throughout: a single channel/noise
sub-batch scores every candidate in every generation, so elite fitness is
exactly reproducible and the best-fitness trace is non-decreasing by
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import CHANNEL_MODELS, ChannelBatch, sample_noise
from .constellation import (
    Constellation,
    make_apsk,
    make_square_qam,
    normalize,
    rotate_to_symmetric_span,
    stats,
)
from .errors import EmptyBatchError, InvalidParameterError
from .metrics import (
    EhParams,
    MiConfig,
    _mi_core,
    effective_noise_variance,
    harvested_power_analytic,
    mutual_information_mc,
)
from .seeding import derive_seed, philox_stream

__all__ = [
    "ReTask",
    "GaConfig",
    "GaResult",
    "RegionTrace",
    "harvested_power_upper_bound",
    "repair",
    "solve_re_point",
    "trace_re_region",
]


@dataclass(frozen=True)
class ReTask:
    """One rate/energy design point.

    amplitude_only restricts the search to nonnegative real points (zero
    phase span), which is the setting the brute-force oracle can sweep.
    """

    eh_threshold: float
    modulation_order: int = 16
    papr_max: float = 15.0
    rho: float = 0.5
    sigma2: float = 0.1
    eh: EhParams = field(default_factory=EhParams)
    channel_model: str = "rayleigh-cn01"
    amplitude_only: bool = False
    noise_convention: str = "consistent"

    def __post_init__(self) -> None:
        if self.modulation_order < 2:
            raise InvalidParameterError("modulation order must be at least 2")
        if self.papr_max < 1.0:
            raise InvalidParameterError("papr_max below 1 is unsatisfiable")
        if self.eh_threshold < 0.0:
            raise InvalidParameterError("harvested-power threshold cannot be negative")
        if not (0.0 <= self.rho <= 1.0):
            raise InvalidParameterError("power-splitting factor must be in [0, 1]")
        if self.sigma2 <= 0.0:
            raise InvalidParameterError("noise variance must be positive")
        if self.channel_model not in CHANNEL_MODELS:
            raise InvalidParameterError(f"unknown channel model: {self.channel_model!r}")


@dataclass(frozen=True)
class GaConfig:
    """Evolution knobs; defaults are sized so one solve finishes in seconds."""

    population_size: int = 60
    generations: int = 200
    tournament_size: int = 3
    elite_count: int = 2
    crossover_rate: float = 0.9
    blend_alpha: float = 0.5
    mutation_sigma_initial: float = 0.08
    mutation_decay: float = 0.995
    penalty_weight_eh: float = 10.0
    penalty_weight_papr: float = 10.0
    fitness_sample_count: int = 2000
    final_sample_count: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 4:
            raise InvalidParameterError("population_size must be at least 4")
        if not (0 <= self.elite_count < self.population_size):
            raise InvalidParameterError("elite_count must be below population_size")
        if self.tournament_size < 1:
            raise InvalidParameterError("tournament_size must be at least 1")
        if not (0.0 <= self.crossover_rate <= 1.0):
            raise InvalidParameterError("crossover_rate must be in [0, 1]")
        if self.blend_alpha < 0.0:
            raise InvalidParameterError("blend_alpha cannot be negative")
        if self.mutation_sigma_initial < 0.0:
            raise InvalidParameterError("mutation sigma cannot be negative")
        if not (0.0 < self.mutation_decay <= 1.0):
            raise InvalidParameterError("mutation_decay must be in (0, 1]")
        if self.penalty_weight_eh < 0.0 or self.penalty_weight_papr < 0.0:
            raise InvalidParameterError("penalty weights cannot be negative")
        if self.fitness_sample_count < 1 or self.final_sample_count < 1:
            raise InvalidParameterError("sample counts must be at least 1")
        if self.generations < 0:
            raise InvalidParameterError("generations cannot be negative")


@dataclass(frozen=True)
class GaResult:
    """Outcome of one solve.

    declared_infeasible marks tasks rejected by the analytic bound before
    any search; feasible reports whether the final design met both
    inequality constraints (to 1e-6) at the final evaluation.
    """

    constellation: Constellation | None
    mi_final: float
    p_h_final: float
    papr_final: float
    feasible: bool
    declared_infeasible: bool
    fitness_trace: tuple[float, ...]
    generations_run: int


@dataclass(frozen=True)
class RegionTrace:
    """Feasible (P_H, MI) points along a threshold grid, plus full detail."""

    points: tuple[tuple[float, float], ...]
    skipped_thresholds: tuple[float, ...]
    results: tuple[tuple[float, GaResult], ...]


def harvested_power_upper_bound(task: ReTask) -> float:
    """Largest harvested power any unit-energy admissible design can reach.

    At unit average energy, E|x|^4 <= papr * E|x|^2 = papr_max, and the
    phase-span attenuation peaks at span 0, so the bound is
    c1*(1-rho)*m2h + c2*(1-rho)^2*m4h*papr_max.
    """
    m2h, m4h = CHANNEL_MODELS[task.channel_model]
    return (
        task.eh.c1 * (1.0 - task.rho) * m2h
        + task.eh.c2 * (1.0 - task.rho) ** 2 * m4h * task.papr_max
    )


def repair(genes: np.ndarray, task: ReTask) -> Constellation:
    """Project a chromosome onto the equality-constraint manifold.

    Genes are [Re_1..Re_M, Im_1..Im_M]. Amplitude-only tasks fold points
    onto the nonnegative real axis first. A numerically dead chromosome
    (no energy) is replaced by a fixed benign layout rather than erroring,
    so evolution can continue.
    """
    m = task.modulation_order
    if genes.shape != (2 * m,):
        raise InvalidParameterError(
            f"chromosome must hold {2 * m} genes, got shape {genes.shape}"
        )
    pts = genes[:m] + 1j * genes[m:]
    if task.amplitude_only:
        pts = np.abs(pts).astype(np.complex128)
    if float(np.mean(np.abs(pts) ** 2)) < 1e-15:
        if task.amplitude_only:
            pts = np.linspace(0.5, 1.5, m).astype(np.complex128)
        else:
            pts = make_apsk(math.pi / 4, m).points
    return rotate_to_symmetric_span(normalize(Constellation(pts)))


def _is_even_square(m: int) -> bool:
    side = math.isqrt(m)
    return side * side == m and side % 2 == 0


def _init_population(rng: np.random.Generator, task: ReTask, cfg: GaConfig) -> np.ndarray:
    """Half structured seeds (arc and grid layouts), half diffuse random."""
    m = task.modulation_order
    rows = []
    structured = cfg.population_size // 2
    for i in range(structured):
        if i % 2 == 1 and _is_even_square(m):
            base = make_square_qam(m).points
        else:
            base = make_apsk(rng.uniform(0.05, math.pi), m).points
        pts = base + rng.normal(0.0, 0.05, m) + 1j * rng.normal(0.0, 0.05, m)
        rows.append(np.concatenate([pts.real, pts.imag]))
    radius = math.sqrt(task.papr_max)
    for _ in range(cfg.population_size - structured):
        r = radius * np.sqrt(rng.uniform(0.0, 1.0, m))
        theta = rng.uniform(-math.pi, math.pi, m)
        pts = r * np.exp(1j * theta)
        rows.append(np.concatenate([pts.real, pts.imag]))
    return np.array(rows)


def _tournament(rng: np.random.Generator, fitnesses: np.ndarray, k: int) -> int:
    idx = rng.integers(0, fitnesses.size, k)
    return int(idx[np.argmax(fitnesses[idx])])


def solve_re_point(task: ReTask, cfg: GaConfig, channels: ChannelBatch) -> GaResult:
    """Run the GA for one design point.

    Tasks whose threshold exceeds the analytic upper bound are declared
    infeasible without searching. Deterministic for identical
    (task, cfg, channels).
    """
    if channels.model != task.channel_model:
        raise InvalidParameterError(
            f"channel batch model {channels.model!r} does not match task {task.channel_model!r}"
        )
    needed = max(cfg.fitness_sample_count, cfg.final_sample_count)
    if len(channels) < needed:
        raise EmptyBatchError(f"channel batch has {len(channels)} gains, need {needed}")
    if task.eh_threshold > harvested_power_upper_bound(task):
        return GaResult(None, 0.0, 0.0, 0.0, False, True, (), 0)

    m2h, m4h = CHANNEL_MODELS[task.channel_model]
    scale = math.sqrt(task.rho)
    nu = effective_noise_variance(
        MiConfig(task.sigma2, task.noise_convention, cfg.fitness_sample_count), task.rho
    )
    fit_gains = channels.gains[: cfg.fitness_sample_count]
    fit_noise = sample_noise(
        cfg.fitness_sample_count, nu, derive_seed(cfg.seed, "fitness-noise")
    ).samples

    def fitness_of(genes: np.ndarray) -> float:
        c = repair(genes, task)
        st = stats(c)
        mi = _mi_core(c.points, scale, fit_gains, fit_noise, nu)
        p_h = harvested_power_analytic(c, task.rho, task.eh, m2h, m4h)
        return (
            mi
            - cfg.penalty_weight_eh * max(0.0, task.eh_threshold - p_h)
            - cfg.penalty_weight_papr * max(0.0, st.papr - task.papr_max)
        )

    rng = philox_stream(derive_seed(cfg.seed, "evolve"))
    pop = _init_population(rng, task, cfg)
    dim = pop.shape[1]
    trace: list[float] = []
    fitnesses = np.empty(cfg.population_size)
    # Generation 0 is the initial population; each later entry follows one
    # breeding step, so the trace has generations+1 points.
    for gen in range(cfg.generations + 1):
        for i in range(cfg.population_size):
            fitnesses[i] = fitness_of(pop[i])
        order = np.argsort(-fitnesses, kind="stable")
        trace.append(float(fitnesses[order[0]]))
        if gen == cfg.generations:
            break
        sigma = cfg.mutation_sigma_initial * cfg.mutation_decay**gen
        children = [pop[i].copy() for i in order[: cfg.elite_count]]
        while len(children) < cfg.population_size:
            p1 = pop[_tournament(rng, fitnesses, cfg.tournament_size)]
            p2 = pop[_tournament(rng, fitnesses, cfg.tournament_size)]
            if rng.uniform() < cfg.crossover_rate:
                lo = np.minimum(p1, p2)
                hi = np.maximum(p1, p2)
                d = hi - lo
                child = rng.uniform(lo - cfg.blend_alpha * d, hi + cfg.blend_alpha * d)
            else:
                child = p1.copy()
            child = child + rng.normal(0.0, sigma, dim)
            children.append(child)
        pop = np.array(children)

    best = pop[int(np.argmax(fitnesses))]
    c = repair(best, task)
    st = stats(c)
    mi_final = mutual_information_mc(
        c,
        scale,
        channels,
        MiConfig(task.sigma2, task.noise_convention, cfg.final_sample_count),
        derive_seed(cfg.seed, "final-noise"),
    )
    p_h_final = harvested_power_analytic(c, task.rho, task.eh, m2h, m4h)
    feasible = (
        p_h_final >= task.eh_threshold - 1e-6 and st.papr <= task.papr_max + 1e-6
    )
    return GaResult(
        constellation=c,
        mi_final=mi_final,
        p_h_final=p_h_final,
        papr_final=st.papr,
        feasible=feasible,
        declared_infeasible=False,
        fitness_trace=tuple(trace),
        generations_run=cfg.generations,
    )


def trace_re_region(
    task_template: ReTask,
    threshold_grid: list[float],
    cfg: GaConfig,
    channels: ChannelBatch,
) -> RegionTrace:
    """Solve once per threshold and collect the feasible (P_H, MI) points.

    Each threshold gets its own derived seed so points are independently
    reproducible. Infeasible thresholds are skipped from the point list
    and reported in skipped_thresholds.
    """
    grid = [float(t) for t in threshold_grid]
    if not grid:
        raise InvalidParameterError("threshold grid is empty")
    if grid != sorted(grid):
        raise InvalidParameterError("threshold grid must be sorted ascending")
    points: list[tuple[float, float]] = []
    skipped: list[float] = []
    results: list[tuple[float, GaResult]] = []
    for i, threshold in enumerate(grid):
        task = replace(task_template, eh_threshold=threshold)
        point_cfg = replace(cfg, seed=derive_seed(cfg.seed, "re-region", i, threshold))
        result = solve_re_point(task, point_cfg, channels)
        results.append((threshold, result))
        if result.feasible:
            points.append((result.p_h_final, result.mi_final))
        else:
            skipped.append(threshold)
    return RegionTrace(tuple(points), tuple(skipped), tuple(results))
