"""Chirp binary-orthogonal-keying modem: long chirp preamble + 16 data chirps.

A frame is a 100 ms up-chirp preamble followed by 16 contiguous 62.5 ms data
chirps in the 19.5-22 kHz band (1.1 s per frame, 16 bits -> 14.55 bps net).
Bit 1 is an up-chirp, bit 0 a down-chirp; the pair is maximally
anti-correlated within the band, and the pulse-compression gain of the
chirps provides the multipath tolerance this scheme is known for.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.signal import fftconvolve, find_peaks
from scipy.signal.windows import tukey

from .core import AudioSignal, BitMessage, DecodeOutcome


@dataclass(frozen=True)
class LeeParams:
    f_low_hz: float = 19500.0
    f_high_hz: float = 22000.0
    preamble_s: float = 0.100
    symbol_s: float = 0.0625
    bits_per_frame: int = 16
    sample_rate_hz: int = 48000
    sync_threshold: float = 9.0  # peak vs median absolute correlation
    edge_ramp_s: float = 0.003   # raised-cosine symbol edges, limits splatter

    @property
    def preamble_samples(self) -> int:
        return round(self.preamble_s * self.sample_rate_hz)

    @property
    def symbol_samples(self) -> int:
        return round(self.symbol_s * self.sample_rate_hz)

    @property
    def frame_samples(self) -> int:
        return self.preamble_samples + self.bits_per_frame * self.symbol_samples

    @property
    def frame_s(self) -> float:
        return self.frame_samples / self.sample_rate_hz

    @property
    def net_rate_bps(self) -> float:
        return self.bits_per_frame / self.frame_s

    def _chirp(self, n_samples: int, f_start: float, f_end: float) -> np.ndarray:
        t = np.arange(n_samples) / self.sample_rate_hz
        duration = n_samples / self.sample_rate_hz
        sweep = (f_end - f_start) / duration
        phase = 2 * np.pi * (f_start * t + 0.5 * sweep * t * t)
        win = tukey(n_samples, alpha=2 * self.edge_ramp_s / (n_samples / self.sample_rate_hz))
        return np.sin(phase) * win

    @cached_property
    def preamble_template(self) -> np.ndarray:
        return self._chirp(self.preamble_samples, self.f_low_hz, self.f_high_hz)

    @cached_property
    def up_template(self) -> np.ndarray:
        return self._chirp(self.symbol_samples, self.f_low_hz, self.f_high_hz)

    @cached_property
    def down_template(self) -> np.ndarray:
        return self._chirp(self.symbol_samples, self.f_high_hz, self.f_low_hz)


DEFAULT_PARAMS = LeeParams()


def lee_capacity_bits(n_bits: int, params: LeeParams = DEFAULT_PARAMS) -> int:
    """Padded message size: messages are zero-padded to whole 16-bit frames."""
    if n_bits <= 0:
        raise ValueError("message must be non-empty")
    bpf = params.bits_per_frame
    return ((n_bits + bpf - 1) // bpf) * bpf


def lee_encode(msg: BitMessage, params: LeeParams = DEFAULT_PARAMS) -> AudioSignal:
    """Modulate a bit message into frames of preamble + 16 chirp symbols."""
    if len(msg) == 0:
        raise ValueError("message must be non-empty")
    padded = np.zeros(lee_capacity_bits(len(msg), params), dtype=np.uint8)
    padded[: len(msg)] = msg.bits

    out = []
    for start in range(0, padded.size, params.bits_per_frame):
        out.append(params.preamble_template)
        for bit in padded[start : start + params.bits_per_frame]:
            out.append(params.up_template if bit else params.down_template)
    return AudioSignal(np.concatenate(out), params.sample_rate_hz)


def _preamble_correlation(signal: np.ndarray, params: LeeParams) -> np.ndarray:
    tpl = params.preamble_template
    return np.abs(fftconvolve(signal, tpl[::-1], mode="valid"))


def lee_sync(signal: AudioSignal, params: LeeParams = DEFAULT_PARAMS):
    """Locate the first frame preamble by matched filtering.

    Returns the sample offset of the preamble start, or a SyncFailure outcome
    when no correlation peak clears the threshold.
    """
    if signal.sample_rate_hz != params.sample_rate_hz:
        raise ValueError("resample the signal to the scheme rate first")
    x = signal.samples
    if x.size < params.preamble_samples:
        return DecodeOutcome.sync_failure("signal shorter than the preamble")
    # Zero-pad so a transmission starting at sample 0 still yields an interior
    # correlation peak (find_peaks cannot report endpoint maxima).
    pad = params.symbol_samples
    corr = _preamble_correlation(np.concatenate([np.zeros(pad), x, np.zeros(pad)]), params)
    med = np.median(corr)
    peak = float(np.max(corr))
    if med == 0.0 or peak < params.sync_threshold * med:
        return DecodeOutcome.sync_failure("no correlation peak above threshold")
    # Among near-maximal local peaks, take the earliest so that echoes never
    # pull sync onto a later propagation path.
    candidates, _ = find_peaks(corr, height=0.8 * peak, distance=params.symbol_samples)
    if candidates.size == 0:
        candidates = np.array([np.argmax(corr)])
    return int(candidates[0]) - pad


def lee_decode(
    signal: AudioSignal,
    params: LeeParams = DEFAULT_PARAMS,
    expected_bits: int = 16,
) -> DecodeOutcome:
    """Demodulate: per-symbol argmax of |up-correlation| vs |down-correlation|."""
    if expected_bits <= 0:
        raise ValueError("expected_bits must be positive")
    sync = lee_sync(signal, params)
    if isinstance(sync, DecodeOutcome):
        return sync

    x = signal.samples
    n_frames = lee_capacity_bits(expected_bits, params) // params.bits_per_frame
    up, down = params.up_template, params.down_template
    bits = []
    frame_start = sync
    for frame in range(n_frames):
        if frame > 0:
            # Re-acquire within a small window around the nominal frame stride.
            expect = sync + frame * params.frame_samples
            lo = max(0, expect - 480)
            hi = min(x.size, expect + 480 + params.preamble_samples)
            window = x[lo:hi]
            if window.size >= params.preamble_samples:
                corr = _preamble_correlation(window, params)
                frame_start = lo + int(np.argmax(corr))
            else:
                frame_start = expect
        sym_start = frame_start + params.preamble_samples
        for k in range(params.bits_per_frame):
            seg = x[sym_start + k * params.symbol_samples :][: params.symbol_samples]
            if seg.size < params.symbol_samples:
                seg = np.pad(seg, (0, params.symbol_samples - seg.size))
            r_up = abs(np.dot(seg, up))
            r_down = abs(np.dot(seg, down))
            bits.append(1 if r_up >= r_down else 0)
    bits = np.array(bits[:expected_bits], dtype=np.uint8)
    return DecodeOutcome.decoded(BitMessage(bits))
