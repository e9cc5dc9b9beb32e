"""airmodem: software-defined data-over-sound modems and evaluation tools."""

from .channel import AmbientSpec, BurstSpec, ChannelConfig, apply_channel, synth_rir, tilt_filter
from .core import (
    AudioSignal,
    BitMessage,
    DecodeOutcome,
    normalize_peak,
    out_of_band_ratio_db,
    read_wav,
    resample,
    write_wav,
)
from .harness import (
    SCHEMES,
    records_from_csv,
    records_to_csv,
    replay_dataset,
    replay_report_csv,
    run_trials,
)
from .lee import lee_decode, lee_encode
from .metrics import (
    SummaryStats,
    TrialRecord,
    compute_ber,
    compute_per,
    compute_ter,
    summarize,
)
from .nearby import nearby_decode, nearby_encode
from .priwhisper import pw_decode, pw_encode

__all__ = [
    "AmbientSpec",
    "AudioSignal",
    "BitMessage",
    "BurstSpec",
    "ChannelConfig",
    "DecodeOutcome",
    "SCHEMES",
    "SummaryStats",
    "TrialRecord",
    "apply_channel",
    "compute_ber",
    "compute_per",
    "compute_ter",
    "lee_decode",
    "lee_encode",
    "nearby_decode",
    "nearby_encode",
    "normalize_peak",
    "out_of_band_ratio_db",
    "pw_decode",
    "pw_encode",
    "read_wav",
    "records_from_csv",
    "records_to_csv",
    "replay_dataset",
    "replay_report_csv",
    "resample",
    "run_trials",
    "summarize",
    "synth_rir",
    "tilt_filter",
    "write_wav",
]

__version__ = "0.1.0"
