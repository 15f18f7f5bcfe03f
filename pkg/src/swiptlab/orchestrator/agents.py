"""Agent contract and the hermetic scripted agent.

An agent is anything that maps (instruction set, prompt, history) to
solution text. The scripted agent is a deterministic stand-in for a
remote model: it reads only the machine-readable feedback block and
follows a simple search rule, which makes end-to-end loop behavior
testable without a network.
"""

from __future__ import annotations

import math
import re
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from ..constellation import (
    Constellation,
    make_apsk,
    make_square_qam,
    normalize,
    render_complex_array,
    rotate_to_symmetric_span,
)
from ..errors import InvalidParameterError
from ..seeding import derive_seed, philox_stream
from .prompts import parse_feedback_block

__all__ = ["AgentContract", "ScriptedAgent", "scripted_agent"]


@runtime_checkable
class AgentContract(Protocol):
    """Produce solution text for one round of the loop."""

    def respond(
        self,
        instructions: str,
        prompt: str,
        history: Sequence[tuple[str, str]],
    ) -> str:
        """history is the prior (prompt, reply) exchanges, oldest first."""
        ...


_ORDER_RE = re.compile(r"modulation order M\s*=\s*(\d+)")
_PAPR_RE = re.compile(r"PAPR\s*<=\s*([0-9.]+)")


def _clip_papr(points: np.ndarray, papr_max: float) -> np.ndarray:
    """Cap amplitudes so papr <= papr_max; phases untouched.

    papr as a function of the amplitude cap is monotone, so a short
    bisection lands on the tightest cap. Scale is irrelevant because the
    caller normalizes afterward.
    """
    r = np.abs(points)
    mean_sq = float(np.mean(r**2))
    if mean_sq <= 0.0 or float(np.max(r**2)) / mean_sq <= papr_max:
        return points
    lo, hi = 0.0, float(np.max(r))
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        capped = np.minimum(r, mid)
        denom = float(np.mean(capped**2))
        if denom > 0.0 and mid**2 / denom > papr_max:
            hi = mid
        else:
            lo = mid
    capped = np.minimum(r, lo)
    return capped * np.exp(1j * np.angle(points))


class ScriptedAgent:
    """Deterministic feedback-following proposer.

    Round 0 proposes a unit-modulus arc with phase span pi/3. While no
    design has earned a reward, it treats the task as power-starved: each
    below-threshold round narrows the arc by 0.7 and moves amplitude mass
    onto one peak point (raising the fourth moment) within the PAPR
    budget. Once a design is rewarded, it alternates two moves around the
    best-rewarded layout: a blend step toward a high-rate target (square
    grid when M allows, wide arc otherwise), and a seeded Gaussian jitter
    (sigma = 0.05); an unrewarded blend halves the blend weight, so the
    rate climbs while staying near the feasible side. Always emits
    canonical complex-array text.

    Reads the two-bit code in its default (power bit first) order.
    """

    def __init__(self, seed: int):
        self._rng = philox_stream(derive_seed(seed, "scripted-agent"))
        self._order: int | None = None
        self._papr_max = 15.0
        self._span = math.pi / 3
        self._gain = 1.0
        self._best: np.ndarray | None = None
        self._last: np.ndarray | None = None
        self._last_reward = 0
        self._blend = 0.4
        self._moves = 0
        self._last_was_blend = False

    def _configure(self, instructions: str) -> None:
        m = _ORDER_RE.search(instructions)
        if not m:
            raise InvalidParameterError("instructions do not state the modulation order")
        self._order = int(m.group(1))
        p = _PAPR_RE.search(instructions)
        if p:
            self._papr_max = float(p.group(1))

    def _max_gain(self) -> float:
        # One point at amplitude g among unit points has
        # papr = g^2 * M / (g^2 + M - 1); invert for the cap when binding.
        m = self._order
        if m > self._papr_max:
            return 0.98 * math.sqrt(self._papr_max * (m - 1) / (m - self._papr_max))
        return 8.0

    def _above_from(self, block: dict[str, object]) -> bool:
        mode = block.get("mode")
        if mode == "full":
            return bool(block.get("above"))
        code = str(block.get("code", "0"))
        return code[0] == "1"

    def _peaked_arc(self) -> np.ndarray:
        m = self._order
        pts = make_apsk(self._span, m).points.copy()
        pts[m // 2] *= self._gain
        return pts

    def _rate_target(self) -> np.ndarray:
        m = self._order
        side = math.isqrt(m)
        if side * side == m and side % 2 == 0:
            return make_square_qam(m).points
        return make_apsk(min(2.5, math.pi), m).points

    def _blended(self, base: np.ndarray) -> np.ndarray:
        pts = (1.0 - self._blend) * base + self._blend * self._rate_target()
        if float(np.mean(np.abs(pts) ** 2)) < 1e-12:
            return base
        return _clip_papr(pts, self._papr_max)

    def _perturbed(self, base: np.ndarray) -> np.ndarray:
        m = base.size
        r = np.abs(base) * (1.0 + 0.05 * self._rng.standard_normal(m))
        theta = np.angle(base) + 0.05 * self._rng.standard_normal(m)
        pts = np.maximum(r, 0.0) * np.exp(1j * theta)
        if float(np.mean(np.abs(pts) ** 2)) < 1e-12:
            return base
        return _clip_papr(pts, self._papr_max)

    def respond(
        self,
        instructions: str,
        prompt: str,
        history: Sequence[tuple[str, str]],
    ) -> str:
        if self._order is None:
            self._configure(instructions)
        block = parse_feedback_block(prompt)
        if block is None:
            self._span = math.pi / 3
            pts = make_apsk(self._span, self._order).points
        else:
            reward = int(block.get("reward", 0))
            rewarded = self._last is not None and reward > self._last_reward
            if rewarded:
                self._best = self._last
            self._last_reward = reward
            if self._best is None:
                self._span *= 0.7
                self._gain = min(self._gain * 1.8, self._max_gain())
                pts = self._peaked_arc()
            else:
                if self._last_was_blend and not rewarded:
                    self._blend = max(0.5 * self._blend, 0.05)
                blend_turn = self._moves % 2 == 0
                self._moves += 1
                if blend_turn:
                    pts = self._blended(self._best)
                    self._last_was_blend = True
                else:
                    pts = self._perturbed(self._best)
                    self._last_was_blend = False
        c = rotate_to_symmetric_span(normalize(Constellation(pts)))
        self._last = c.points
        return render_complex_array(c)


def scripted_agent(seed: int) -> ScriptedAgent:
    """Factory matching the agent-contract surface."""
    return ScriptedAgent(seed)
