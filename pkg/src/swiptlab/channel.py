"""Channel and noise sampling plus the received-signal map.

Sampling is counter-based: sample index k lives in chunk k // CHUNK, and
each chunk is drawn from its own Philox stream keyed by (seed, chunk).
The value at a given (seed, index) therefore never depends on the batch
size or on how many workers are drawing other chunks, which is what makes
whole experiment sweeps reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyBatchError, InvalidParameterError
from .seeding import philox_stream

__all__ = [
    "GENERATOR_NAME",
    "CHANNEL_MODELS",
    "ChannelBatch",
    "NoiseBatch",
    "sample_channels",
    "sample_noise",
    "received_info",
]

GENERATOR_NAME = "philox4x64-chunked-v1"

_CHUNK = 1 << 16

# model name -> (E|h|^2, E|h|^4)
CHANNEL_MODELS: dict[str, tuple[float, float]] = {
    "rayleigh-cn01": (1.0, 2.0),
    "fixed-unit": (1.0, 1.0),
}


def _chunked_complex_normal(count: int, seed: int, scale: float) -> np.ndarray:
    """Draw count samples of scale * (a + jb)/sqrt(2), a,b iid N(0,1)."""
    out = np.empty(count, dtype=np.complex128)
    for chunk in range(0, (count + _CHUNK - 1) // _CHUNK):
        lo = chunk * _CHUNK
        hi = min(lo + _CHUNK, count)
        # Draw the full chunk so a partial final chunk still sees the same
        # leading values as any longer batch would.
        raw = philox_stream(seed, chunk).standard_normal(2 * _CHUNK)
        re = raw[0::2][: hi - lo]
        im = raw[1::2][: hi - lo]
        out[lo:hi] = (scale / np.sqrt(2.0)) * (re + 1j * im)
    return out


@dataclass(frozen=True)
class ChannelBatch:
    """A batch of complex channel gains with its provenance."""

    gains: np.ndarray
    seed: int
    model: str

    def __post_init__(self) -> None:
        if self.model not in CHANNEL_MODELS:
            raise InvalidParameterError(f"unknown channel model: {self.model!r}")
        g = np.asarray(self.gains, dtype=np.complex128).reshape(-1)
        if g.size == 0:
            raise EmptyBatchError("channel batch is empty")
        g = g.copy()
        g.flags.writeable = False
        object.__setattr__(self, "gains", g)

    def __len__(self) -> int:
        return int(self.gains.size)


@dataclass(frozen=True)
class NoiseBatch:
    """A batch of complex circular Gaussian noise samples."""

    samples: np.ndarray
    variance: float
    seed: int

    def __post_init__(self) -> None:
        if self.variance <= 0.0:
            raise InvalidParameterError(f"noise variance must be positive, got {self.variance}")
        s = np.asarray(self.samples, dtype=np.complex128).reshape(-1)
        if s.size == 0:
            raise EmptyBatchError("noise batch is empty")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return int(self.samples.size)


def sample_channels(count: int, seed: int, model: str = "rayleigh-cn01") -> ChannelBatch:
    """Sample channel gains for the named model.

    "rayleigh-cn01" draws circularly symmetric complex normal gains with
    unit mean square; "fixed-unit" returns all-ones (no fading).
    """
    if count < 1:
        raise EmptyBatchError(f"need at least one sample, got {count}")
    if model == "rayleigh-cn01":
        gains = _chunked_complex_normal(count, seed, 1.0)
    elif model == "fixed-unit":
        gains = np.ones(count, dtype=np.complex128)
    else:
        raise InvalidParameterError(f"unknown channel model: {model!r}")
    return ChannelBatch(gains, seed, model)


def sample_noise(count: int, variance: float, seed: int) -> NoiseBatch:
    """Sample complex noise with total variance split evenly per component."""
    if count < 1:
        raise EmptyBatchError(f"need at least one sample, got {count}")
    if variance <= 0.0:
        raise InvalidParameterError(f"noise variance must be positive, got {variance}")
    samples = _chunked_complex_normal(count, seed, float(np.sqrt(variance)))
    return NoiseBatch(samples, variance, seed)


def received_info(
    symbols: np.ndarray,
    gains: np.ndarray,
    noise: np.ndarray,
    rho: float,
) -> np.ndarray:
    """Information-branch observation: sqrt(rho) * h * x + n, elementwise."""
    if not (0.0 <= rho <= 1.0):
        raise InvalidParameterError(f"power-splitting factor must be in [0, 1], got {rho}")
    return np.sqrt(rho) * np.asarray(gains) * np.asarray(symbols) + np.asarray(noise)
