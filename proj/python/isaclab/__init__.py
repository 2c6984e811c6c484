"""Cell-free ISAC beamforming lab (Python front end of the C++ core)."""

from ._isaclab import (
    ChannelSet,
    ConfigError,
    DimensionError,
    Error,
    Model,
    baseline,
    config_hash,
    default_config,
    draw_scenario,
    latency,
    resolve_config,
    sweep,
    version,
    wscsc,
)

__version__ = version()

__all__ = [
    "ChannelSet",
    "ConfigError",
    "DimensionError",
    "Error",
    "Model",
    "baseline",
    "config_hash",
    "default_config",
    "draw_scenario",
    "latency",
    "resolve_config",
    "sweep",
    "version",
    "wscsc",
]
