"""Declarative experiment configuration.

Config files are TOML with sections mirroring the experiment pieces:
[experiment], [task], [ga], [apsk], and one section per sweep kind
([mi_snr], [re_region], [ssr_eh], [rtfv]). Unknown sections or keys are
rejected so typos cannot silently fall back to defaults. CLI flags
(--seed, --quick) override file values after parsing; everything is then
frozen into a ResolvedConfig whose to_metadata() dict is what runs
record next to their CSV output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import tomli

from ..errors import ConfigError
from ..feedback import MODES
from ..ga import GaConfig, ReTask
from ..metrics import EhParams

KINDS = ("mi-snr", "re-region", "ssr-eh", "rtfv-run", "ga-design")
SCHEMES = ("qam16", "apsk", "ga", "rtfv-scripted", "rtfv-llm", "from-file")

_DEFAULT_SCHEMES = {
    "mi-snr": ("qam16", "apsk"),
    "re-region": ("ga", "qam16"),
    "ssr-eh": ("qam16",),
    "rtfv-run": (),
    "ga-design": ("ga",),
}

_TASK_KEYS = {
    "eh_threshold": float,
    "modulation_order": int,
    "papr_max": float,
    "rho": float,
    "sigma2": float,
    "c1": float,
    "c2": float,
    "channel_model": str,
    "noise_convention": str,
    "amplitude_only": bool,
}

_GA_KEYS = {
    "population_size": int,
    "generations": int,
    "tournament_size": int,
    "elite_count": int,
    "crossover_rate": float,
    "blend_alpha": float,
    "mutation_sigma_initial": float,
    "mutation_decay": float,
    "penalty_weight_eh": float,
    "penalty_weight_papr": float,
    "fitness_sample_count": int,
    "final_sample_count": int,
}


@dataclass(frozen=True)
class MiSnrParams:
    snr_start_db: float = 0.0
    snr_stop_db: float = 30.0
    snr_step_db: float = 2.0
    sample_count: int = 100_000


@dataclass(frozen=True)
class ReRegionParams:
    thresholds: tuple[float, ...] = (0.0, 1.0, 2.0, 4.0, 6.0, 9.5)
    sample_count: int = 100_000


@dataclass(frozen=True)
class SsrParams:
    rho_step: float = 0.1
    symbols: int = 1_000_000


@dataclass(frozen=True)
class RtfvParams:
    thresholds: tuple[float, ...] = (2.0, 4.0, 6.0, 9.5)
    modes: tuple[str, ...] = ("one_bit", "two_bit", "full")
    agent: str = "scripted"
    max_rounds: int = 15
    static_every: int = 5
    early_stop_patience: int = 15
    duplicate_tolerance: float = 1e-3
    alternate_codebook: bool = False
    include_d_min: bool = False
    channel_count: int = 100_000
    mi_sample_count: int | None = None
    noise_convention: str = "paper"


@dataclass(frozen=True)
class ResolvedConfig:
    """Everything an experiment run needs, after defaults and overrides."""

    kind: str
    schemes: tuple[str, ...]
    seed: int
    quick: bool
    task: ReTask
    ga: GaConfig
    apsk_phase_span: float
    apsk_span_grid: tuple[float, ...]
    constellation_file: str | None
    mi_snr: MiSnrParams = field(default_factory=MiSnrParams)
    re_region: ReRegionParams = field(default_factory=ReRegionParams)
    ssr: SsrParams = field(default_factory=SsrParams)
    rtfv: RtfvParams = field(default_factory=RtfvParams)

    def to_metadata(self) -> dict[str, Any]:
        """Science-relevant settings only; no paths, no worker counts."""
        return {
            "kind": self.kind,
            "schemes": list(self.schemes),
            "master_seed": self.seed,
            "quick": self.quick,
            "task": {
                "eh_threshold": self.task.eh_threshold,
                "modulation_order": self.task.modulation_order,
                "papr_max": self.task.papr_max,
                "rho": self.task.rho,
                "sigma2": self.task.sigma2,
                "c1": self.task.eh.c1,
                "c2": self.task.eh.c2,
                "channel_model": self.task.channel_model,
                "noise_convention": self.task.noise_convention,
                "amplitude_only": self.task.amplitude_only,
            },
            "ga": {k: getattr(self.ga, k) for k in _GA_KEYS},
            "apsk": {
                "phase_span": self.apsk_phase_span,
                "span_grid": list(self.apsk_span_grid),
            },
            "constellation_file": self.constellation_file,
            "mi_snr": {
                "snr_start_db": self.mi_snr.snr_start_db,
                "snr_stop_db": self.mi_snr.snr_stop_db,
                "snr_step_db": self.mi_snr.snr_step_db,
                "sample_count": self.mi_snr.sample_count,
            },
            "re_region": {
                "thresholds": list(self.re_region.thresholds),
                "sample_count": self.re_region.sample_count,
            },
            "ssr_eh": {
                "rho_step": self.ssr.rho_step,
                "symbols": self.ssr.symbols,
            },
            "rtfv": {
                "thresholds": list(self.rtfv.thresholds),
                "modes": list(self.rtfv.modes),
                "agent": self.rtfv.agent,
                "max_rounds": self.rtfv.max_rounds,
                "static_every": self.rtfv.static_every,
                "early_stop_patience": self.rtfv.early_stop_patience,
                "duplicate_tolerance": self.rtfv.duplicate_tolerance,
                "alternate_codebook": self.rtfv.alternate_codebook,
                "include_d_min": self.rtfv.include_d_min,
                "channel_count": self.rtfv.channel_count,
                "mi_sample_count": self.rtfv.mi_sample_count,
                "noise_convention": self.rtfv.noise_convention,
            },
        }


def load_config(path: str | Path) -> dict[str, Any]:
    """Parse a TOML config file; syntax errors become ConfigError."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        return tomli.loads(raw.decode("utf-8"))
    except (tomli.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc


def _section(data: Mapping[str, Any], name: str) -> Mapping[str, Any]:
    sec = data.get(name, {})
    if not isinstance(sec, Mapping):
        raise ConfigError(f"section [{name}] must be a table")
    return sec


def _check_keys(name: str, sec: Mapping[str, Any], allowed: set[str]) -> None:
    unknown = sorted(set(sec) - allowed)
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r} in section [{name}]")


def _coerce(name: str, key: str, value: Any, want: type) -> Any:
    if want is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if want is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if want is bool and isinstance(value, bool):
        return value
    if want is str and isinstance(value, str):
        return value
    raise ConfigError(f"[{name}] {key} must be {want.__name__}, got {value!r}")


def _float_list(name: str, key: str, value: Any) -> tuple[float, ...]:
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"[{name}] {key} must be a list of numbers")
    return tuple(float(v) for v in value)


def _str_list(name: str, key: str, value: Any) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"[{name}] {key} must be a list of strings")
    return tuple(value)


def resolve_config(
    kind: str,
    data: Mapping[str, Any] | None = None,
    *,
    seed: int | None = None,
    quick: bool = False,
) -> ResolvedConfig:
    """Merge file data, CLI overrides, and defaults into one frozen config.

    `kind` comes from the CLI subcommand; a conflicting kind in the file
    is an error rather than a silent override. --quick swaps in the CI
    sample-count defaults (1e4 Monte Carlo, 1e5 symbols) wherever the
    file did not pin an explicit count.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind: {kind!r}")
    data = data or {}
    known_sections = {"experiment", "task", "ga", "apsk", "mi_snr", "re_region", "ssr_eh", "rtfv"}
    unknown = sorted(set(data) - known_sections)
    if unknown:
        raise ConfigError(f"unknown config section [{unknown[0]}]")

    exp = _section(data, "experiment")
    _check_keys("experiment", exp, {"kind", "schemes", "seed", "constellation_file"})
    file_kind = exp.get("kind")
    if file_kind is not None and file_kind != kind:
        raise ConfigError(
            f"config declares kind {file_kind!r} but the {kind!r} experiment was invoked"
        )
    if "schemes" in exp:
        schemes = _str_list("experiment", "schemes", exp["schemes"])
    else:
        schemes = _DEFAULT_SCHEMES[kind]
    for s in schemes:
        if s not in SCHEMES:
            raise ConfigError(f"unknown scheme: {s!r}")
    if kind != "rtfv-run" and not schemes:
        raise ConfigError(f"experiment {kind!r} needs at least one scheme")
    master_seed = seed if seed is not None else _coerce("experiment", "seed", exp.get("seed", 0), int)

    constellation_file = exp.get("constellation_file")
    if constellation_file is not None:
        constellation_file = _coerce("experiment", "constellation_file", constellation_file, str)
    if "from-file" in schemes and constellation_file is None:
        raise ConfigError("scheme 'from-file' requires [experiment] constellation_file")

    task_sec = _section(data, "task")
    _check_keys("task", task_sec, set(_TASK_KEYS))
    task_kwargs: dict[str, Any] = {}
    eh_kwargs: dict[str, float] = {}
    for key, want in _TASK_KEYS.items():
        if key not in task_sec:
            continue
        value = _coerce("task", key, task_sec[key], want)
        if key in ("c1", "c2"):
            eh_kwargs[key] = value
        else:
            task_kwargs[key] = value
    task_kwargs.setdefault("eh_threshold", 2.0)
    try:
        task = ReTask(eh=EhParams(**eh_kwargs), **task_kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid [task]: {exc}") from exc

    ga_sec = _section(data, "ga")
    _check_keys("ga", ga_sec, set(_GA_KEYS))
    ga_kwargs = {k: _coerce("ga", k, ga_sec[k], w) for k, w in _GA_KEYS.items() if k in ga_sec}
    if quick:
        ga_kwargs.setdefault("final_sample_count", 10_000)
    try:
        ga = GaConfig(seed=0, **ga_kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid [ga]: {exc}") from exc

    apsk_sec = _section(data, "apsk")
    _check_keys("apsk", apsk_sec, {"phase_span", "span_grid"})
    apsk_phase_span = _coerce("apsk", "phase_span", apsk_sec.get("phase_span", math.pi), float)
    if not (0.0 < apsk_phase_span <= math.pi):
        raise ConfigError("[apsk] phase_span must be in (0, pi]")
    if "span_grid" in apsk_sec:
        span_grid = _float_list("apsk", "span_grid", apsk_sec["span_grid"])
    else:
        span_grid = tuple(math.pi * (i + 1) / 12 for i in range(12))
    if not span_grid or any(not (0.0 < s <= math.pi) for s in span_grid):
        raise ConfigError("[apsk] span_grid entries must be in (0, pi]")

    mi_sec = _section(data, "mi_snr")
    _check_keys("mi_snr", mi_sec, {"snr_start_db", "snr_stop_db", "snr_step_db", "sample_count"})
    mi_params = MiSnrParams(
        snr_start_db=_coerce("mi_snr", "snr_start_db", mi_sec.get("snr_start_db", 0.0), float),
        snr_stop_db=_coerce("mi_snr", "snr_stop_db", mi_sec.get("snr_stop_db", 30.0), float),
        snr_step_db=_coerce("mi_snr", "snr_step_db", mi_sec.get("snr_step_db", 2.0), float),
        sample_count=_coerce(
            "mi_snr", "sample_count", mi_sec.get("sample_count", 10_000 if quick else 100_000), int
        ),
    )
    if mi_params.snr_step_db <= 0.0:
        raise ConfigError("[mi_snr] snr_step_db must be positive")
    if mi_params.snr_stop_db < mi_params.snr_start_db:
        raise ConfigError("[mi_snr] snr_stop_db must be >= snr_start_db")
    if mi_params.sample_count < 1:
        raise ConfigError("[mi_snr] sample_count must be positive")

    re_sec = _section(data, "re_region")
    _check_keys("re_region", re_sec, {"thresholds", "sample_count"})
    if "thresholds" in re_sec:
        thresholds = _float_list("re_region", "thresholds", re_sec["thresholds"])
    else:
        thresholds = ReRegionParams().thresholds
    if not thresholds or list(thresholds) != sorted(thresholds):
        raise ConfigError("[re_region] thresholds must be a nonempty ascending list")
    re_params = ReRegionParams(
        thresholds=thresholds,
        sample_count=_coerce(
            "re_region",
            "sample_count",
            re_sec.get("sample_count", 10_000 if quick else 100_000),
            int,
        ),
    )
    if re_params.sample_count < 1:
        raise ConfigError("[re_region] sample_count must be positive")

    ssr_sec = _section(data, "ssr_eh")
    _check_keys("ssr_eh", ssr_sec, {"rho_step", "symbols"})
    ssr_params = SsrParams(
        rho_step=_coerce("ssr_eh", "rho_step", ssr_sec.get("rho_step", 0.1), float),
        symbols=_coerce(
            "ssr_eh", "symbols", ssr_sec.get("symbols", 100_000 if quick else 1_000_000), int
        ),
    )
    if not (0.0 < ssr_params.rho_step <= 1.0):
        raise ConfigError("[ssr_eh] rho_step must be in (0, 1]")
    if ssr_params.symbols < 1:
        raise ConfigError("[ssr_eh] symbols must be positive")

    rtfv_sec = _section(data, "rtfv")
    _check_keys(
        "rtfv",
        rtfv_sec,
        {
            "thresholds",
            "modes",
            "agent",
            "max_rounds",
            "static_every",
            "early_stop_patience",
            "duplicate_tolerance",
            "alternate_codebook",
            "include_d_min",
            "channel_count",
            "mi_sample_count",
            "noise_convention",
        },
    )
    if "thresholds" in rtfv_sec:
        rtfv_thresholds = _float_list("rtfv", "thresholds", rtfv_sec["thresholds"])
    else:
        rtfv_thresholds = RtfvParams().thresholds
    if not rtfv_thresholds:
        raise ConfigError("[rtfv] thresholds must be nonempty")
    if "modes" in rtfv_sec:
        rtfv_modes = _str_list("rtfv", "modes", rtfv_sec["modes"])
    else:
        rtfv_modes = RtfvParams().modes
    for mode in rtfv_modes:
        if mode not in MODES:
            raise ConfigError(f"[rtfv] unknown feedback mode: {mode!r}")
    if not rtfv_modes:
        raise ConfigError("[rtfv] modes must be nonempty")
    agent = _coerce("rtfv", "agent", rtfv_sec.get("agent", "scripted"), str)
    if agent not in ("scripted", "llm"):
        raise ConfigError(f"[rtfv] agent must be 'scripted' or 'llm', got {agent!r}")
    mi_sample_count = rtfv_sec.get("mi_sample_count")
    if mi_sample_count is not None:
        mi_sample_count = _coerce("rtfv", "mi_sample_count", mi_sample_count, int)
    rtfv_params = RtfvParams(
        thresholds=rtfv_thresholds,
        modes=rtfv_modes,
        agent=agent,
        max_rounds=_coerce("rtfv", "max_rounds", rtfv_sec.get("max_rounds", 15), int),
        static_every=_coerce("rtfv", "static_every", rtfv_sec.get("static_every", 5), int),
        early_stop_patience=_coerce(
            "rtfv", "early_stop_patience", rtfv_sec.get("early_stop_patience", 15), int
        ),
        duplicate_tolerance=_coerce(
            "rtfv", "duplicate_tolerance", rtfv_sec.get("duplicate_tolerance", 1e-3), float
        ),
        alternate_codebook=_coerce(
            "rtfv", "alternate_codebook", rtfv_sec.get("alternate_codebook", False), bool
        ),
        include_d_min=_coerce("rtfv", "include_d_min", rtfv_sec.get("include_d_min", False), bool),
        channel_count=_coerce(
            "rtfv",
            "channel_count",
            rtfv_sec.get("channel_count", 10_000 if quick else 100_000),
            int,
        ),
        mi_sample_count=mi_sample_count,
        noise_convention=_coerce(
            "rtfv", "noise_convention", rtfv_sec.get("noise_convention", "paper"), str
        ),
    )

    return ResolvedConfig(
        kind=kind,
        schemes=schemes,
        seed=master_seed,
        quick=quick,
        task=task,
        ga=ga,
        apsk_phase_span=apsk_phase_span,
        apsk_span_grid=span_grid,
        constellation_file=constellation_file,
        mi_snr=mi_params,
        re_region=re_params,
        ssr=ssr_params,
        rtfv=rtfv_params,
    )
