"""Device-side feedback: measurement, bit-level encoding, and reward.

The device measures a candidate constellation, reports one of three
formats back to the optimizer, and keeps a cumulative reward:

* full: the measured tuple itself.
* one_bit: "1" iff harvested power clears the threshold.
* two_bit: harvested-power bit plus a rate-improved-since-last-round bit.

Reward increments by one on any feasible round in one_bit mode, and only
on feasible rounds that also improve the best feasible rate in the richer
modes. The best feasible design is tracked in every mode so a run can
always report what it would deploy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import CHANNEL_MODELS, ChannelBatch
from .constellation import Constellation, stats
from .errors import InvalidParameterError
from .metrics import EhParams, MiConfig, harvested_power_analytic, mutual_information_mc

__all__ = [
    "MODES",
    "FeedbackTuple",
    "FeedbackCode",
    "RewardState",
    "device_feedback",
    "encode_one_bit",
    "encode_two_bit",
    "encode_feedback",
    "update_reward",
]

MODES = ("full", "one_bit", "two_bit")


@dataclass(frozen=True)
class FeedbackTuple:
    """One round of device measurements.

    Attributes:
        mi: estimated mutual information in bits (-inf for a round whose
            proposal was rejected before measurement).
        p_h: harvested power.
        above_threshold: whether p_h strictly exceeds the target.
        phase_span: phase half-width of the measured constellation.
    """

    mi: float
    p_h: float
    above_threshold: bool
    phase_span: float


@dataclass(frozen=True)
class FeedbackCode:
    """Encoded feedback as sent over the reverse link.

    payload is the FeedbackTuple in full mode and a bit string otherwise
    ("0"/"1" for one_bit, two characters for two_bit).
    """

    mode: str
    payload: FeedbackTuple | str

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise InvalidParameterError(f"unknown feedback mode: {self.mode!r}")
        if self.mode == "full":
            if not isinstance(self.payload, FeedbackTuple):
                raise InvalidParameterError("full mode carries the measurement tuple")
        else:
            expected = 1 if self.mode == "one_bit" else 2
            if not (
                isinstance(self.payload, str)
                and len(self.payload) == expected
                and set(self.payload) <= {"0", "1"}
            ):
                raise InvalidParameterError(
                    f"{self.mode} mode carries {expected} bit(s), got {self.payload!r}"
                )


def device_feedback(
    constellation: Constellation,
    threshold: float,
    rho: float,
    sigma2: float,
    eh: EhParams,
    channels: ChannelBatch,
    seed: int,
    sample_count: int | None = None,
    noise_convention: str = "paper",
) -> FeedbackTuple:
    """Measure a candidate constellation at the device.

    Mutual information is estimated over the supplied channel batch with
    noise drawn from `seed`; harvested power uses the analytic model with
    the batch's nominal channel moments. Passing the same seed every round
    gives common random numbers, so feedback differences between rounds
    reflect the constellations rather than sampling noise.
    """
    n = sample_count if sample_count is not None else len(channels)
    cfg = MiConfig(sigma2, noise_convention, n)
    mi = mutual_information_mc(constellation, math.sqrt(rho), channels, cfg, seed)
    m2, m4 = CHANNEL_MODELS[channels.model]
    p_h = harvested_power_analytic(constellation, rho, eh, m2, m4)
    return FeedbackTuple(mi, p_h, p_h > threshold, stats(constellation).phase_span)


def encode_one_bit(measurement: FeedbackTuple) -> str:
    """Single feasibility bit: "1" iff harvested power beat the threshold."""
    return "1" if measurement.above_threshold else "0"


def encode_two_bit(
    measurement: FeedbackTuple,
    previous_mi: float,
    alternate_order: bool = False,
) -> str:
    """Two-bit codebook entry for this round.

    Default bit order is (power bit, rate bit): the first bit is "1" iff
    harvested power beat the threshold, the second iff mi strictly
    improved on previous_mi. Set alternate_order for the transposed
    (rate bit, power bit) layout used by some reporting formats.
    """
    power = "1" if measurement.above_threshold else "0"
    rate = "1" if measurement.mi > previous_mi else "0"
    return rate + power if alternate_order else power + rate


def encode_feedback(
    measurement: FeedbackTuple,
    mode: str,
    previous_mi: float = float("-inf"),
    alternate_order: bool = False,
) -> FeedbackCode:
    """Encode a measurement for the requested feedback mode."""
    if mode == "full":
        return FeedbackCode("full", measurement)
    if mode == "one_bit":
        return FeedbackCode("one_bit", encode_one_bit(measurement))
    if mode == "two_bit":
        return FeedbackCode("two_bit", encode_two_bit(measurement, previous_mi, alternate_order))
    raise InvalidParameterError(f"unknown feedback mode: {mode!r}")


@dataclass(frozen=True)
class RewardState:
    """Cumulative reward plus the best feasible design seen so far."""

    value: int = 0
    mi_best_feasible: float = float("-inf")
    best_constellation: Constellation | None = None

    def __post_init__(self) -> None:
        if self.value < 0:
            raise InvalidParameterError("reward cannot be negative")


def update_reward(
    state: RewardState,
    mode: str,
    measurement: FeedbackTuple,
    constellation: Constellation | None,
) -> RewardState:
    """Fold one round of feedback into the reward state.

    The reward never decreases. In one_bit mode it increments on every
    feasible round; in full and two_bit modes only when the round is
    feasible and strictly improves the best feasible rate so far. The
    best-design fields advance on that same strict improvement in every
    mode, which keeps "what would we deploy" well defined even when the
    reward rule is the coarse one.
    """
    if mode not in MODES:
        raise InvalidParameterError(f"unknown feedback mode: {mode!r}")
    improved = (
        measurement.above_threshold
        and measurement.mi > state.mi_best_feasible
        and constellation is not None
    )
    if mode == "one_bit":
        increment = measurement.above_threshold
    else:
        increment = improved
    return RewardState(
        value=state.value + (1 if increment else 0),
        mi_best_feasible=measurement.mi if improved else state.mi_best_feasible,
        best_constellation=constellation if improved else state.best_constellation,
    )
