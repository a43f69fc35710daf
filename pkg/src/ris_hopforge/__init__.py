"""Multi-hop RIS-assisted THz multiuser downlink simulator and DDPG beamformer."""

from .channel import (
    ChannelRealization,
    ThzPhysParams,
    Topology,
    generate_channels,
    los_gain,
    nlos_gain,
    sample_rayleigh,
)
from .signal import (
    NoiseParams,
    PhaseConfig,
    Precoder,
    effective_channel,
    normalize_power,
    project_unit_modulus,
    sinr,
    sum_rate,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelRealization",
    "NoiseParams",
    "PhaseConfig",
    "Precoder",
    "ThzPhysParams",
    "Topology",
    "effective_channel",
    "generate_channels",
    "los_gain",
    "nlos_gain",
    "normalize_power",
    "project_unit_modulus",
    "sample_rayleigh",
    "sinr",
    "sum_rate",
]
