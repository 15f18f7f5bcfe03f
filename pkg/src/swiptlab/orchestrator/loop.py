"""The closed prompt/propose/validate/measure loop.

One round: build a structured prompt, ask the agent for a candidate,
validate and canonicalize it, reject duplicates (re-prompting within the
round), measure it at the device simulator, encode feedback for the
configured mode, and fold the result into the reward. Transcripts are
JSON-lines, one round per line, written deterministically so identical
runs are byte-identical.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..channel import CHANNEL_MODELS, sample_channels
from ..constellation import (
    Constellation,
    normalize,
    parse_complex_array,
    render_complex_array,
    rotate_to_symmetric_span,
    stats,
)
from ..errors import (
    DegenerateConstellationError,
    InvalidParameterError,
    ParseError,
    TransportError,
)
from ..feedback import (
    MODES,
    FeedbackCode,
    FeedbackTuple,
    RewardState,
    device_feedback,
    encode_feedback,
    update_reward,
)
from ..metrics import EhParams
from ..seeding import derive_seed
from .agents import AgentContract
from .prompts import DesignTask, build_instruction_set, build_structured_prompt

__all__ = [
    "DeviceSimConfig",
    "Rejection",
    "RoundRecord",
    "RtfvConfig",
    "RtfvResult",
    "is_duplicate",
    "read_transcript",
    "run_rtfv",
    "validate_solution",
    "write_transcript",
]

# Feedback recorded for rounds whose proposal never reached the device.
_REJECTED_FEEDBACK = FeedbackTuple(float("-inf"), 0.0, False, 0.0)

_DUPLICATE_NOTICE = (
    "Note: your previous reply duplicated an earlier constellation. "
    "Propose a distinctly different layout this round."
)


@dataclass(frozen=True)
class Rejection:
    """Why a proposed solution was not accepted."""

    reason: str  # parse-error | wrong-length | papr-violation | degenerate
    detail: str = ""


def validate_solution(text: str, task: DesignTask) -> Constellation | Rejection:
    """Parse and canonicalize agent output, or explain the rejection.

    Accepted solutions come back normalized to unit energy and rotated to
    a symmetric phase span; the PAPR bound is checked after that
    canonicalization. Never raises for bad input.
    """
    try:
        c = parse_complex_array(text)
    except ParseError as exc:
        return Rejection("parse-error", str(exc))
    if c.order != task.modulation_order:
        return Rejection(
            "wrong-length",
            f"expected {task.modulation_order} points, got {c.order}",
        )
    if bool(np.all(c.points == c.points[0])):
        return Rejection("degenerate", "all points identical")
    try:
        c = normalize(c)
    except DegenerateConstellationError:
        return Rejection("degenerate", "constellation carries no energy")
    c = rotate_to_symmetric_span(c)
    papr = stats(c).papr
    if papr > task.papr_max + 1e-9:
        return Rejection(
            "papr-violation",
            f"papr {papr:.6f} exceeds {task.papr_max:g}",
        )
    return c


def is_duplicate(
    candidate: Constellation,
    history: Sequence[Constellation],
    tolerance: float = 1e-3,
) -> bool:
    """Whether the candidate matches any prior constellation as a point set.

    Point order must not matter, so each comparison solves the optimal
    assignment between the two sets and sums squared distances; a total
    at most tolerance * M counts as a duplicate. Inputs are expected to
    be canonicalized (unit energy, symmetric span) already.
    """
    pts = candidate.points
    m = pts.size
    for prior in history:
        if prior.order != m:
            continue
        cost = np.abs(pts[:, None] - prior.points[None, :]) ** 2
        rows, cols = linear_sum_assignment(cost)
        if float(cost[rows, cols].sum()) <= tolerance * m:
            return True
    return False


@dataclass(frozen=True)
class RtfvConfig:
    """Loop-side settings for one run."""

    feedback_mode: str = "full"
    max_rounds: int = 15
    early_stop_patience: int = 15
    duplicate_tolerance: float = 1e-3
    agent_kind: str = "scripted"
    seed: int = 0
    static_every: int = 5
    alternate_codebook: bool = False
    include_d_min: bool = False
    max_duplicate_attempts: int = 3

    def __post_init__(self) -> None:
        if self.feedback_mode not in MODES:
            raise InvalidParameterError(f"unknown feedback mode: {self.feedback_mode!r}")
        if self.max_rounds < 1:
            raise InvalidParameterError("max_rounds must be at least 1")
        if self.early_stop_patience < 1:
            raise InvalidParameterError("early_stop_patience must be at least 1")
        if self.duplicate_tolerance < 0.0:
            raise InvalidParameterError("duplicate_tolerance cannot be negative")
        if self.agent_kind not in ("scripted", "llm"):
            raise InvalidParameterError(f"unknown agent kind: {self.agent_kind!r}")
        if self.static_every < 1:
            raise InvalidParameterError("static_every must be at least 1")
        if self.max_duplicate_attempts < 1:
            raise InvalidParameterError("max_duplicate_attempts must be at least 1")


@dataclass(frozen=True)
class DeviceSimConfig:
    """Device-side truth the loop must never leak into prompts."""

    threshold: float
    rho: float = 0.5
    sigma2: float = 0.1
    eh: EhParams = field(default_factory=EhParams)
    channel_model: str = "rayleigh-cn01"
    channel_count: int = 100_000
    mi_sample_count: int | None = None
    noise_convention: str = "paper"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.threshold < 0.0:
            raise InvalidParameterError("threshold cannot be negative")
        if self.channel_model not in CHANNEL_MODELS:
            raise InvalidParameterError(f"unknown channel model: {self.channel_model!r}")
        if self.channel_count < 1:
            raise InvalidParameterError("channel_count must be at least 1")


@dataclass(frozen=True)
class RoundRecord:
    """Everything observable about one round."""

    round: int
    include_static: bool
    dynamic_part: str
    solution_text: str
    validation: str
    constellation: str | None
    feedback: FeedbackTuple
    code: FeedbackCode
    reward: int
    duration_s: float


@dataclass(frozen=True)
class RtfvResult:
    """Run outcome: the deployable design (if any) plus the full history."""

    best_constellation: Constellation | None
    reward_state: RewardState
    records: tuple[RoundRecord, ...]

    @property
    def feasible_found(self) -> bool:
        return self.best_constellation is not None


def run_rtfv(
    task: DesignTask,
    agent: AgentContract,
    cfg: RtfvConfig,
    device: DeviceSimConfig,
) -> RtfvResult:
    """Execute the closed loop for up to cfg.max_rounds rounds.

    Rejected or failed rounds still consume a round and record synthetic
    worst-case feedback (below threshold, mi = -inf) so reward semantics
    stay well defined. Duplicate proposals are re-prompted within the
    round up to max_duplicate_attempts. The loop stops early after
    early_stop_patience rounds without a reward increase, or after 3
    consecutive agent transport failures.
    """
    instructions = build_instruction_set(task, cfg.feedback_mode).text
    channels = sample_channels(
        device.channel_count, derive_seed(device.seed, "channels"), device.channel_model
    )
    mi_seed = derive_seed(device.seed, "mi-noise")

    state = RewardState()
    records: list[RoundRecord] = []
    exchanges: list[tuple[str, str]] = []
    accepted: list[Constellation] = []
    previous_mi = float("-inf")
    consecutive_failures = 0
    rounds_without_reward = 0

    for round_index in range(cfg.max_rounds):
        include_static = round_index % cfg.static_every == 0
        decoded = None
        d_min = None
        if records:
            decoded = (records[-1].feedback, records[-1].code)
            if cfg.include_d_min and records[-1].constellation:
                d_min = stats(parse_complex_array(records[-1].constellation)).d_min
        prompt = build_structured_prompt(
            task,
            records,
            state.value,
            decoded,
            include_static,
            feedback_mode=cfg.feedback_mode,
            include_d_min=cfg.include_d_min,
            d_min=d_min,
        )
        started = time.perf_counter()
        dynamic_used = prompt.dynamic_part
        prompt_text = prompt.text()
        reply = ""
        outcome = "transport-failure"
        constellation: Constellation | None = None
        transport_failed = False
        for attempt in range(cfg.max_duplicate_attempts):
            try:
                reply = agent.respond(instructions, prompt_text, tuple(exchanges))
            except TransportError:
                transport_failed = True
                break
            exchanges.append((prompt_text, reply))
            verdict = validate_solution(reply, task)
            if isinstance(verdict, Rejection):
                outcome = verdict.reason
                break
            if is_duplicate(verdict, accepted, cfg.duplicate_tolerance):
                if attempt + 1 < cfg.max_duplicate_attempts:
                    dynamic_used = prompt.dynamic_part + "\n\n" + _DUPLICATE_NOTICE
                    retry = build_structured_prompt(
                        task,
                        records,
                        state.value,
                        decoded,
                        include_static,
                        feedback_mode=cfg.feedback_mode,
                        include_d_min=cfg.include_d_min,
                        d_min=d_min,
                    )
                    prompt_text = (
                        retry.static_part + "\n\n" + dynamic_used
                        if include_static
                        else dynamic_used
                    )
                    continue
                outcome = "duplicate"
                break
            outcome = "accepted"
            constellation = verdict
            break

        if transport_failed:
            consecutive_failures += 1
        else:
            consecutive_failures = 0

        if constellation is not None:
            measurement = device_feedback(
                constellation,
                device.threshold,
                device.rho,
                device.sigma2,
                device.eh,
                channels,
                mi_seed,
                device.mi_sample_count,
                device.noise_convention,
            )
            accepted.append(constellation)
        else:
            measurement = _REJECTED_FEEDBACK
        code = encode_feedback(
            measurement, cfg.feedback_mode, previous_mi, cfg.alternate_codebook
        )
        reward_before = state.value
        state = update_reward(state, cfg.feedback_mode, measurement, constellation)
        previous_mi = measurement.mi
        records.append(
            RoundRecord(
                round=round_index,
                include_static=include_static,
                dynamic_part=dynamic_used,
                solution_text=reply,
                validation=outcome,
                constellation=(
                    render_complex_array(constellation) if constellation else None
                ),
                feedback=measurement,
                code=code,
                reward=state.value,
                duration_s=time.perf_counter() - started,
            )
        )
        if consecutive_failures >= 3:
            break
        if state.value > reward_before:
            rounds_without_reward = 0
        else:
            rounds_without_reward += 1
            if rounds_without_reward >= cfg.early_stop_patience:
                break

    return RtfvResult(state.best_constellation, state, tuple(records))


def _json_number(value: float) -> float | str:
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return float(value)


def _record_payload(record: RoundRecord) -> dict:
    code_payload: object
    if isinstance(record.code.payload, FeedbackTuple):
        t = record.code.payload
        code_payload = {
            "mi": _json_number(t.mi),
            "p_h": _json_number(t.p_h),
            "above_threshold": t.above_threshold,
            "phase_span": _json_number(t.phase_span),
        }
    else:
        code_payload = record.code.payload
    return {
        "round": record.round,
        "include_static": record.include_static,
        "dynamic_part": record.dynamic_part,
        "solution_text": record.solution_text,
        "validation": record.validation,
        "constellation": record.constellation,
        "feedback": {
            "mi": _json_number(record.feedback.mi),
            "p_h": _json_number(record.feedback.p_h),
            "above_threshold": record.feedback.above_threshold,
            "phase_span": _json_number(record.feedback.phase_span),
        },
        "code": {"mode": record.code.mode, "payload": code_payload},
        "reward": record.reward,
        # Zeroed on disk: wall-clock noise would break byte-identical
        # transcripts; in-memory records keep the measured value.
        "duration_s": 0.0,
    }


def write_transcript(records: Sequence[RoundRecord], path: str | Path) -> None:
    """Persist rounds as JSON-lines, one record per line, deterministically."""
    with open(path, "w", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(_record_payload(record)) + "\n")


def read_transcript(path: str | Path) -> list[dict]:
    """Load a JSON-lines transcript back into plain dicts."""
    out = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
