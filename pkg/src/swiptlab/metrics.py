"""Link metrics: harvested power, mutual information, and symbol success.

The harvested-power model is nonlinear in the waveform: on top of the
usual second-moment term it rewards a high fourth moment, attenuated by
a Gaussian factor in the constellation's phase span. Mutual information
for a finite alphabet has no closed form, so it is estimated by Monte
Carlo over channel and noise draws; symbol success rate comes from a
matched minimum-distance detector over the same observation model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import CHANNEL_MODELS, ChannelBatch, sample_noise
from .constellation import Constellation, stats
from .errors import EmptyBatchError, InvalidParameterError
from .seeding import derive_seed, philox_stream

__all__ = [
    "EhParams",
    "MiConfig",
    "PHASE_SPAN_SHAPE",
    "harvested_power_analytic",
    "harvested_power_mc",
    "mutual_information_mc",
    "snr_to_noise_variance",
    "ssr_mc",
]

# Exponent coefficient of the phase-span attenuation exp(-k * span^2).
PHASE_SPAN_SHAPE = 2.0 / 3.0

_BLOCK = 1 << 16


@dataclass(frozen=True)
class EhParams:
    """Energy-harvester coefficients for the two power terms.

    c1 weights the linear (second-moment) term, c2 the nonlinear
    (fourth-moment) term. Both must be nonnegative and not both zero.
    """

    c1: float = 1.0
    c2: float = 2.0

    def __post_init__(self) -> None:
        if self.c1 < 0.0 or self.c2 < 0.0:
            raise InvalidParameterError("harvester coefficients must be nonnegative")
        if self.c1 == 0.0 and self.c2 == 0.0:
            raise InvalidParameterError("at least one harvester coefficient must be positive")


@dataclass(frozen=True)
class MiConfig:
    """Settings for the Monte Carlo mutual-information estimator.

    Attributes:
        noise_variance: receiver noise variance (sigma^2), > 0.
        noise_convention: how the effective observation-noise variance is
            formed from noise_variance. "consistent" uses it as is;
            "paper" uses 2 * (1 - rho) * noise_variance, the scaling used
            in the reference figures (the two coincide at rho = 0.5).
        sample_count: number of channel/noise draws to average over.
    """

    noise_variance: float
    noise_convention: str = "consistent"
    sample_count: int = 100_000

    def __post_init__(self) -> None:
        if self.noise_variance <= 0.0:
            raise InvalidParameterError(
                f"noise variance must be positive, got {self.noise_variance}"
            )
        if self.noise_convention not in ("consistent", "paper"):
            raise InvalidParameterError(
                f"unknown noise convention: {self.noise_convention!r}"
            )
        if self.sample_count < 1:
            raise InvalidParameterError("sample_count must be at least 1")


def effective_noise_variance(config: MiConfig, rho: float) -> float:
    """Resolve the observation-noise variance under the configured convention."""
    if config.noise_convention == "paper":
        nu = 2.0 * (1.0 - rho) * config.noise_variance
    else:
        nu = config.noise_variance
    if nu <= 0.0:
        raise InvalidParameterError(
            f"effective noise variance must be positive, got {nu} (rho={rho})"
        )
    return nu


def harvested_power_analytic(
    constellation: Constellation,
    rho: float,
    eh: EhParams = EhParams(),
    channel_second_moment: float = 1.0,
    channel_fourth_moment: float = 2.0,
) -> float:
    """Expected harvested power under the nonlinear harvester model.

    Channel and waveform are independent, so both expectation terms
    factor into channel moments times constellation moments:

        c1*(1-rho)*E|h|^2*E|x|^2
          + c2*(1-rho)^2*E|h|^4*E|x|^4*exp(-(2/3)*span^2)

    The default channel moments are those of unit-mean-square Rayleigh
    fading; pass (1.0, 1.0) for a fixed unit channel.
    """
    if not (0.0 <= rho <= 1.0):
        raise InvalidParameterError(f"power-splitting factor must be in [0, 1], got {rho}")
    s = stats(constellation)
    atten = math.exp(-PHASE_SPAN_SHAPE * s.phase_span**2)
    return (
        eh.c1 * (1.0 - rho) * channel_second_moment * s.avg_energy
        + eh.c2 * (1.0 - rho) ** 2 * channel_fourth_moment * s.fourth_moment * atten
    )


def harvested_power_mc(
    constellation: Constellation,
    rho: float,
    eh: EhParams,
    channels: ChannelBatch,
) -> float:
    """Harvested power with channel moments taken from an empirical batch.

    Every (gain, symbol) pair contributes, which factorizes exactly into
    empirical channel moments times exact constellation moments; no inner
    sampling is needed.
    """
    if not (0.0 <= rho <= 1.0):
        raise InvalidParameterError(f"power-splitting factor must be in [0, 1], got {rho}")
    g2 = np.abs(channels.gains) ** 2
    m2 = float(np.mean(g2))
    m4 = float(np.mean(g2**2))
    return harvested_power_analytic(constellation, rho, eh, m2, m4)


def snr_to_noise_variance(snr_db: float, rho: float) -> float:
    """Noise variance that realizes the given information-branch SNR in dB."""
    if not (0.0 < rho <= 1.0):
        raise InvalidParameterError(f"power-splitting factor must be in (0, 1], got {rho}")
    return rho * 10.0 ** (-snr_db / 10.0)


def _mi_core(
    points: np.ndarray,
    signal_scale: float,
    gains: np.ndarray,
    noise: np.ndarray,
    nu: float,
) -> float:
    """Estimator core over pre-drawn gains and noise.

    Sample j carries symbol k = j mod order. For each sample the log-sum
    over candidate symbols is evaluated with max subtraction; the i = k
    term contributes exactly exp(0), so each log-sum is >= 0 and the
    estimate never exceeds log2(order) before clamping.
    """
    order = points.size
    n = gains.size
    m = math.log2(order)
    kidx = np.arange(n) % order
    sums = np.zeros(order)
    ln2 = math.log(2.0)
    for lo in range(0, n, _BLOCK):
        hi = min(n, lo + _BLOCK)
        h = gains[lo:hi]
        w = noise[lo:hi]
        k = kidx[lo:hi]
        a = signal_scale * h[:, None] * (points[k][:, None] - points[None, :])
        expo = -(np.abs(a) ** 2 + 2.0 * (a * np.conj(w)[:, None]).real) / nu
        mx = expo.max(axis=1)
        lse = mx + np.log(np.exp(expo - mx[:, None]).sum(axis=1))
        sums += np.bincount(k, weights=lse, minlength=order)
    counts = np.bincount(kidx, minlength=order)
    per_symbol = sums / counts / ln2
    value = m - float(np.mean(per_symbol))
    return float(min(max(value, 0.0), m))


def mutual_information_mc(
    constellation: Constellation,
    signal_scale: float,
    channels: ChannelBatch,
    config: MiConfig,
    seed: int,
) -> float:
    """Monte Carlo mutual information of the information branch, in bits.

    The observation is signal_scale * h * x + n with x uniform over the
    constellation and n circular Gaussian at the effective variance from
    `config`. Uses the first config.sample_count gains of `channels` and
    draws matching noise from `seed`. The estimate is clamped to
    [0, log2(order)].

    Raises:
        EmptyBatchError: if the channel batch is shorter than sample_count.
        InvalidParameterError: for a bad scale or a nonpositive effective
            noise variance (e.g. the "paper" convention at rho = 1).
    """
    if not (0.0 <= signal_scale <= 1.0):
        raise InvalidParameterError(f"signal scale must be in [0, 1], got {signal_scale}")
    n = config.sample_count
    if n < constellation.order:
        raise InvalidParameterError(
            f"sample_count {n} is below the constellation order {constellation.order}"
        )
    if len(channels) < n:
        raise EmptyBatchError(
            f"channel batch has {len(channels)} gains, need {n}"
        )
    rho = signal_scale**2
    nu = effective_noise_variance(config, rho)
    noise = sample_noise(n, nu, seed).samples
    return _mi_core(constellation.points, signal_scale, channels.gains[:n], noise, nu)


def ssr_mc(
    constellation: Constellation,
    rho: float,
    noise_variance: float,
    channels: ChannelBatch,
    symbols_per_run: int,
    seed: int,
) -> float:
    """Symbol success rate of a matched minimum-distance detector.

    Transmits symbols_per_run uniformly drawn symbols through known gains,
    adds noise of the given variance, and detects by nearest candidate
    signal point; ties resolve to the lowest symbol index. Returns the
    fraction detected correctly.
    """
    if not (0.0 <= rho <= 1.0):
        raise InvalidParameterError(f"power-splitting factor must be in [0, 1], got {rho}")
    if noise_variance <= 0.0:
        raise InvalidParameterError(f"noise variance must be positive, got {noise_variance}")
    if symbols_per_run < 1:
        raise EmptyBatchError(f"need at least one symbol, got {symbols_per_run}")
    if len(channels) < symbols_per_run:
        raise EmptyBatchError(
            f"channel batch has {len(channels)} gains, need {symbols_per_run}"
        )
    points = constellation.points
    order = points.size
    kidx = philox_stream(derive_seed(seed, "symbols")).integers(0, order, symbols_per_run)
    noise = sample_noise(symbols_per_run, noise_variance, derive_seed(seed, "noise")).samples
    scale = math.sqrt(rho)
    correct = 0
    for lo in range(0, symbols_per_run, _BLOCK):
        hi = min(symbols_per_run, lo + _BLOCK)
        h = channels.gains[lo:hi]
        y = scale * h * points[kidx[lo:hi]] + noise[lo:hi]
        d = np.abs(y[:, None] - scale * h[:, None] * points[None, :])
        correct += int(np.sum(np.argmin(d, axis=1) == kidx[lo:hi]))
    return correct / symbols_per_run
