"""swiptlab: constellation design and evaluation for joint data/power links.

The package is organized around small, pure building blocks:

* constellation: the point-set type, generators, stats, and text codec.
* channel: reproducible channel/noise sampling and the observation map.
* metrics: harvested power, mutual information, symbol success rate.
* ga: an evolutionary baseline solver for rate/energy design points.
* feedback: device measurements, bit-level encoding, cumulative reward.
* orchestrator: the closed-loop prompt/propose/validate/measure protocol.
* bench: batch experiments behind the `swiptlab` command line tool.
"""

__version__ = "0.1.0"

from .channel import (
    CHANNEL_MODELS,
    GENERATOR_NAME,
    ChannelBatch,
    NoiseBatch,
    received_info,
    sample_channels,
    sample_noise,
)
from .constellation import (
    Constellation,
    ConstellationStats,
    make_apsk,
    make_square_qam,
    normalize,
    parse_complex_array,
    render_complex_array,
    rotate_to_symmetric_span,
    stats,
)
from .feedback import (
    FeedbackCode,
    FeedbackTuple,
    RewardState,
    device_feedback,
    encode_feedback,
    encode_one_bit,
    encode_two_bit,
    update_reward,
)
from .metrics import (
    EhParams,
    MiConfig,
    harvested_power_analytic,
    harvested_power_mc,
    mutual_information_mc,
    snr_to_noise_variance,
    ssr_mc,
)
from .seeding import derive_seed, philox_stream

__all__ = [
    "__version__",
    "CHANNEL_MODELS",
    "GENERATOR_NAME",
    "ChannelBatch",
    "NoiseBatch",
    "received_info",
    "sample_channels",
    "sample_noise",
    "Constellation",
    "ConstellationStats",
    "make_apsk",
    "make_square_qam",
    "normalize",
    "parse_complex_array",
    "render_complex_array",
    "rotate_to_symmetric_span",
    "stats",
    "FeedbackCode",
    "FeedbackTuple",
    "RewardState",
    "device_feedback",
    "encode_feedback",
    "encode_one_bit",
    "encode_two_bit",
    "update_reward",
    "EhParams",
    "MiConfig",
    "harvested_power_analytic",
    "harvested_power_mc",
    "mutual_information_mc",
    "snr_to_noise_variance",
    "ssr_mc",
    "derive_seed",
    "philox_stream",
]
