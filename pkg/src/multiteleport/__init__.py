"""Exact simulation and closed-form analysis of multi-hop teleportation
over partially entangled channels."""

from .channels import Channel, Distortion, channel_from_concurrence, concurrence, correction_kraus
from .protocols import ChainConfig, Protocol, Transcript, run, run_gmtp, run_smtp
from .qcore import BellOutcome, KrausPair, PauliCorrection, PureState, RandomSource

__all__ = [
    "BellOutcome",
    "ChainConfig",
    "Channel",
    "Distortion",
    "KrausPair",
    "PauliCorrection",
    "Protocol",
    "PureState",
    "RandomSource",
    "Transcript",
    "channel_from_concurrence",
    "concurrence",
    "correction_kraus",
    "run",
    "run_gmtp",
    "run_smtp",
]

__version__ = "0.1.0"
