"""Prompt construction for the closed design loop.

The optimizer side of the loop is a deterministic template engine: a
static prompt part describing the task and resources, a dynamic part
carrying decoded feedback plus guidance phrases selected from a policy
table, and a machine-readable feedback block that both scripted and
remote agents can parse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

from ..errors import InvalidParameterError, TemplateFieldError
from ..feedback import MODES, FeedbackCode, FeedbackTuple

__all__ = [
    "DEFAULT_GOALS",
    "DEFAULT_GUIDANCE",
    "DesignTask",
    "InstructionSet",
    "StructuredPrompt",
    "build_instruction_set",
    "build_structured_prompt",
    "render_ap_resource_info",
    "render_feedback_block",
    "parse_feedback_block",
    "load_template",
]

DEFAULT_GOALS = (
    "Design a transmit constellation that maximizes the achievable "
    "information rate while keeping this device's harvested power above "
    "its private requirement."
)

DEFAULT_GUIDANCE: Mapping[str, str] = {
    "initial": (
        "Propose an initial constellation layout for the task. A balanced "
        "spread of phases and amplitudes is a reasonable start."
    ),
    "rejected": (
        "The previous reply was rejected ({reason}). Reply with exactly "
        "{modulation_order} complex entries in one bracketed array and "
        "respect the PAPR bound."
    ),
    "duplicate": (
        "That constellation was effectively identical to an earlier "
        "proposal. Produce a distinctly different layout."
    ),
    "below": (
        "Harvested power is below the requirement. Increase signal "
        "peakiness and reduce phase spread."
    ),
    "below_improved": (
        "The rate improved but harvested power is still short. Keep the "
        "spacing gains while concentrating more energy in a few peaks."
    ),
    "above_stagnant": (
        "The power requirement is met but the rate has stagnated. Spread "
        "points apart to raise the minimum distance without losing "
        "peakiness."
    ),
    "above_improved": (
        "Both objectives are trending well. Refine the current best "
        "layout with small adjustments."
    ),
}


@dataclass(frozen=True)
class DesignTask:
    """What the loop is asked to design, in prompt-ready terms."""

    goals: str = DEFAULT_GOALS
    modulation_order: int = 16
    papr_max: float = 15.0
    max_power_w: float = 1.0
    connected_users: int = 4

    def __post_init__(self) -> None:
        if self.modulation_order < 2:
            raise InvalidParameterError("modulation order must be at least 2")
        if self.papr_max < 1.0:
            raise InvalidParameterError("papr_max below 1 is unsatisfiable")
        if self.max_power_w <= 0.0:
            raise InvalidParameterError("power budget must be positive")
        if self.connected_users < 1:
            raise InvalidParameterError("need at least one connected user")


@dataclass(frozen=True)
class InstructionSet:
    """Immutable per-task instruction text for the solution generator."""

    text: str


@dataclass(frozen=True)
class StructuredPrompt:
    """One round's prompt, split into its static and dynamic parts.

    feedback_block duplicates the machine-readable section embedded in
    dynamic_part so consumers need not re-extract it.
    """

    static_part: str
    dynamic_part: str
    include_static: bool
    feedback_block: str | None

    def text(self) -> str:
        if self.include_static:
            return self.static_part + "\n\n" + self.dynamic_part
        return self.dynamic_part


class _StrictFields(dict):
    def __missing__(self, key: str) -> str:
        raise TemplateFieldError(key)


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return (resources.files("swiptlab.orchestrator") / "templates" / name).read_text()


def _task_fields(task: DesignTask, feedback_mode: str) -> dict[str, object]:
    return {
        "goals": task.goals,
        "modulation_order": task.modulation_order,
        "papr_max": f"{task.papr_max:g}",
        "max_power_w": f"{task.max_power_w:g}",
        "connected_users": task.connected_users,
        "feedback_mode": feedback_mode,
    }


def render_ap_resource_info(task: DesignTask, feedback_mode: str = "full") -> str:
    """Render the access-point resource/task file for this task."""
    if feedback_mode not in MODES:
        raise InvalidParameterError(f"unknown feedback mode: {feedback_mode!r}")
    fields = _task_fields(task, feedback_mode)
    if not str(fields["goals"]).strip():
        raise TemplateFieldError("goals")
    return load_template("ap_resource_info.txt").format_map(_StrictFields(fields))


def build_instruction_set(task: DesignTask, feedback_mode: str = "full") -> InstructionSet:
    """Render the solution generator's instruction set, once per task.

    The resource/task file is appended so the generator sees the full
    static context without a second channel. Deterministic: identical
    inputs give identical text.

    Raises:
        TemplateFieldError: naming the missing or empty field.
    """
    resource_text = render_ap_resource_info(task, feedback_mode)
    fields = _task_fields(task, feedback_mode)
    body = load_template("agent_instructions.txt").format_map(_StrictFields(fields))
    return InstructionSet(body + "\n\n" + resource_text)


def render_feedback_block(
    round_index: int,
    code: FeedbackCode,
    reward: int,
    *,
    include_d_min: bool = False,
    d_min: float | None = None,
) -> str:
    """Render the machine-readable feedback section (exact wire format).

    round_index tags the round the feedback was measured in. Decimals
    carry 6 fractional digits; a rejected round's mi renders as -inf.
    """
    lines = [
        "<feedback_block>",
        f"round={round_index}",
        f"mode={code.mode}",
    ]
    if code.mode == "full":
        t = code.payload
        assert isinstance(t, FeedbackTuple)
        lines.append("code=full")
        lines.append(f"mi={t.mi:.6f}")
        lines.append(f"p_h={t.p_h:.6f}")
        lines.append(f"above={1 if t.above_threshold else 0}")
        lines.append(f"delta={t.phase_span:.6f}")
        if include_d_min and d_min is not None:
            lines.append(f"d_min={d_min:.6f}")
    else:
        lines.append(f"code={code.payload}")
    lines.append(f"reward={reward}")
    lines.append("</feedback_block>")
    return "\n".join(lines)


_BLOCK_RE = re.compile(r"<feedback_block>\n(.*?)</feedback_block>", re.S)
_INT_KEYS = {"round", "reward", "above"}
_FLOAT_KEYS = {"mi", "p_h", "delta", "d_min"}


def parse_feedback_block(text: str) -> dict[str, object] | None:
    """Parse the last feedback block out of prompt text, or None if absent."""
    matches = _BLOCK_RE.findall(text)
    if not matches:
        return None
    out: dict[str, object] = {}
    for line in matches[-1].splitlines():
        if "=" not in line:
            continue
        key, _, value = line.partition("=")
        if key in _INT_KEYS:
            out[key] = int(value)
        elif key in _FLOAT_KEYS:
            out[key] = float(value)
        else:
            out[key] = value
    return out


def _guidance_key(history: Sequence) -> tuple[str, str]:
    """Pick the policy key from the last round; returns (key, reason)."""
    if not history:
        return "initial", ""
    last = history[-1]
    if last.validation != "accepted":
        return "rejected", last.validation
    above = last.feedback.above_threshold
    previous_mi = history[-2].feedback.mi if len(history) >= 2 else float("-inf")
    improved = last.feedback.mi > previous_mi
    if above:
        return ("above_improved" if improved else "above_stagnant"), ""
    return ("below_improved" if improved else "below"), ""


def build_structured_prompt(
    task: DesignTask,
    history: Sequence,
    reward: int,
    decoded_feedback: tuple[FeedbackTuple, FeedbackCode] | None,
    include_static: bool,
    guidance_policy: Mapping[str, str] | None = None,
    *,
    feedback_mode: str = "full",
    include_d_min: bool = False,
    d_min: float | None = None,
) -> StructuredPrompt:
    """Build the prompt for the next round.

    history holds the RoundRecords so far (the next round index is its
    length); decoded_feedback is the previous round's (tuple, code) and is
    required whenever history is nonempty. Round 0 never carries a
    feedback block.
    """
    policy = guidance_policy or DEFAULT_GUIDANCE
    round_index = len(history)
    if round_index > 0 and decoded_feedback is None:
        raise InvalidParameterError("rounds after the first need the latest feedback")
    static_part = render_ap_resource_info(task, feedback_mode)
    block: str | None = None
    if round_index > 0:
        _, code = decoded_feedback
        block = render_feedback_block(
            round_index - 1, code, reward, include_d_min=include_d_min, d_min=d_min
        )
    key, reason = _guidance_key(history)
    guidance = policy[key].format_map(
        _StrictFields({"reason": reason, "modulation_order": task.modulation_order})
    )
    parts = []
    if block is not None:
        parts.append(block)
    parts.append(guidance)
    parts.append(
        f"Reply with exactly {task.modulation_order} complex entries as one "
        "bracketed array."
    )
    return StructuredPrompt(
        static_part=static_part,
        dynamic_part="\n\n".join(parts),
        include_static=include_static,
        feedback_block=block,
    )
