"""MFSK modem with all-tones sync/calibration symbol and BCH-coded payload.

Eight tones at 9-16 kHz (1 kHz spacing), 2 ms symbols (integer cycles of
separation, so the tones are orthogonal over a symbol). Each coded block is
a 10 ms sync preamble (the sum of all tone waveforms) followed by 85 data
symbols carrying 255 BCH-encoded bits: 170 ms of data plus 10 ms sync per
180 ms block, i.e. 771 bps gross and 729 bps net.

The FEC chain is seeded random interleaving of the payload, a CRC-16
checksum appended inside the code's protection, then BCH(255,131) per
block. Demodulation correlates each symbol window against every tone and
weights the magnitudes with per-tone calibration factors derived from the
preamble, which cancels any frequency tilt the channel applies to both.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.signal import fftconvolve, find_peaks

from .bch import K as BCH_K
from .bch import N as BCH_N
from .bch import bch_decode, bch_encode
from .core import AudioSignal, BitMessage, DecodeOutcome


@dataclass(frozen=True)
class PriWhisperParams:
    tone_count: int = 8            # M
    f_carrier_hz: float = 9000.0   # f_c
    tone_spacing_hz: float = 1000.0  # delta f
    symbol_s: float = 0.002        # T
    sample_rate_hz: int = 48000
    sync_symbols: int = 5          # 10 ms all-tones preamble per block
    interleaver_seed: int = 0xA11CE
    crc_poly: int = 0x1021         # CRC-16/CCITT
    crc_init: int = 0xFFFF
    sync_threshold: float = 0.35   # minimum normalized correlation coefficient

    @property
    def symbol_samples(self) -> int:
        return round(self.symbol_s * self.sample_rate_hz)

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.tone_count))

    @property
    def data_symbols_per_block(self) -> int:
        return BCH_N // self.bits_per_symbol  # 85

    @property
    def block_samples(self) -> int:
        return (self.sync_symbols + self.data_symbols_per_block) * self.symbol_samples

    @property
    def block_s(self) -> float:
        return self.block_samples / self.sample_rate_hz

    @property
    def gross_rate_bps(self) -> float:
        raw_bps = self.bits_per_symbol / self.symbol_s
        return raw_bps / BCH_N * BCH_K

    @property
    def net_rate_bps(self) -> float:
        return BCH_K / self.block_s

    def tone_hz(self, index: int) -> float:
        return self.f_carrier_hz + index * self.tone_spacing_hz

    @cached_property
    def tone_waveforms(self) -> np.ndarray:
        """Rectangular tone bursts, one row per tone index.

        Each tone spans an integer number of cycles per symbol, so the
        bursts are exactly orthogonal over a symbol window.
        """
        n = np.arange(self.symbol_samples)
        rows = [
            np.sin(2 * np.pi * self.tone_hz(m) * n / self.sample_rate_hz)
            for m in range(self.tone_count)
        ]
        return np.array(rows)

    @cached_property
    def demod_exponentials(self) -> np.ndarray:
        """Complex exponentials for one symbol window, one row per tone."""
        n = np.arange(self.symbol_samples)
        return np.array(
            [
                np.exp(-2j * np.pi * self.tone_hz(m) * n / self.sample_rate_hz)
                for m in range(self.tone_count)
            ]
        )

    @cached_property
    def sync_template(self) -> np.ndarray:
        """All-tones preamble: sum of every data waveform, peak-normalized."""
        n = np.arange(self.sync_symbols * self.symbol_samples)
        wave = np.zeros(n.size)
        for m in range(self.tone_count):
            wave += np.sin(2 * np.pi * self.tone_hz(m) * n / self.sample_rate_hz)
        return wave / np.max(np.abs(wave))


DEFAULT_PARAMS = PriWhisperParams()


@dataclass(frozen=True)
class CalibrationTable:
    """Per-tone baseline correlations from the sync symbol and the factors
    max(baseline)/baseline used to weight demodulation."""

    baseline: np.ndarray
    factor: np.ndarray


class FecDecodeError(Exception):
    """Uncorrectable block or checksum mismatch."""


def _crc16(bits: np.ndarray, params: PriWhisperParams) -> np.ndarray:
    reg = params.crc_init
    for bit in bits:
        top = (reg >> 15) & 1
        reg = ((reg << 1) & 0xFFFF) | 0
        if top ^ int(bit):
            reg ^= params.crc_poly
    return np.array([(reg >> i) & 1 for i in range(15, -1, -1)], dtype=np.uint8)


def pw_block_count(n_payload_bits: int) -> int:
    if n_payload_bits <= 0:
        raise ValueError("payload must be non-empty")
    return -(-(n_payload_bits + 16) // BCH_K)


def pw_capacity_bits(n_payload_bits: int) -> int:
    """Payload capacity of the block count this payload occupies (CRC excluded)."""
    return pw_block_count(n_payload_bits) * BCH_K - 16


def _interleaver(n: int, params: PriWhisperParams) -> np.ndarray:
    return np.random.default_rng(params.interleaver_seed).permutation(n)


def pw_fec_encode(
    payload: BitMessage, params: PriWhisperParams = DEFAULT_PARAMS
) -> np.ndarray:
    """interleave -> append CRC-16 -> split into 131-bit blocks -> BCH."""
    if len(payload) == 0:
        raise ValueError("payload must be non-empty")
    cap = pw_capacity_bits(len(payload))
    padded = np.zeros(cap, dtype=np.uint8)
    padded[: len(payload)] = payload.bits
    interleaved = padded[_interleaver(cap, params)]
    stream = np.concatenate([interleaved, _crc16(interleaved, params)])
    blocks = [
        bch_encode(stream[i : i + BCH_K]) for i in range(0, stream.size, BCH_K)
    ]
    return np.concatenate(blocks)


def pw_fec_decode(
    coded: np.ndarray, params: PriWhisperParams = DEFAULT_PARAMS
) -> BitMessage:
    """Inverse pipeline; raises FecDecodeError on uncorrectable blocks or
    checksum mismatch."""
    coded = np.asarray(coded, dtype=np.uint8)
    if coded.size == 0 or coded.size % BCH_N:
        raise ValueError(f"coded length must be a positive multiple of {BCH_N}")
    chunks = []
    for i in range(0, coded.size, BCH_N):
        msg = bch_decode(coded[i : i + BCH_N])
        if msg is None:
            raise FecDecodeError(f"block {i // BCH_N}: uncorrectable")
        chunks.append(msg)
    stream = np.concatenate(chunks)
    interleaved, crc = stream[:-16], stream[-16:]
    if not np.array_equal(_crc16(interleaved, params), crc):
        raise FecDecodeError("checksum mismatch")
    perm = _interleaver(interleaved.size, params)
    payload = np.empty_like(interleaved)
    payload[perm] = interleaved
    return BitMessage(payload)


def pw_encode(msg: BitMessage, params: PriWhisperParams = DEFAULT_PARAMS) -> AudioSignal:
    """FEC-encode and modulate into per-block [sync preamble][85 symbols]."""
    if len(msg) == 0:
        raise ValueError("message must be non-empty")
    coded = pw_fec_encode(msg, params)
    waveforms = params.tone_waveforms
    bps = params.bits_per_symbol
    weights = 1 << np.arange(bps - 1, -1, -1)
    pieces = []
    for i in range(0, coded.size, BCH_N):
        block = coded[i : i + BCH_N]
        symbols = block.reshape(-1, bps) @ weights
        pieces.append(params.sync_template)
        # confine each data segment's keying splatter to the tone band;
        # the preamble stays untouched so per-tone calibration baselines
        # remain exactly equal on a clean signal
        pieces.append(_band_confine(waveforms[symbols].reshape(-1), params))
    out = np.concatenate(pieces)
    return AudioSignal(out / np.max(np.abs(out)), params.sample_rate_hz)


def _band_confine(x: np.ndarray, params: PriWhisperParams) -> np.ndarray:
    """Zero-phase bandpass that strips symbol-edge splatter far outside the
    tone band while leaving the tones' main spectral lobes untouched."""
    lo = params.tone_hz(0) - 600.0
    hi = params.tone_hz(params.tone_count - 1) + 600.0
    edge = 100.0
    spec = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(x.size, d=1.0 / params.sample_rate_hz)
    gain = np.zeros_like(freqs)
    gain[(freqs >= lo) & (freqs <= hi)] = 1.0
    rise = (freqs >= lo - edge) & (freqs < lo)
    gain[rise] = 0.5 * (1 + np.cos(np.pi * (lo - freqs[rise]) / edge))
    fall = (freqs > hi) & (freqs <= hi + edge)
    gain[fall] = 0.5 * (1 + np.cos(np.pi * (freqs[fall] - hi) / edge))
    return np.fft.irfft(spec * gain, n=x.size)


def pw_sync(signal: AudioSignal, params: PriWhisperParams = DEFAULT_PARAMS):
    """Start of the first sync preamble via cross-correlation with the
    known all-tones template."""
    tpl = params.sync_template
    if signal.samples.size < tpl.size:
        return DecodeOutcome.sync_failure("signal shorter than the sync symbol")
    pad = tpl.size
    x = np.pad(signal.samples, (pad, pad))
    corr = np.abs(fftconvolve(x, tpl[::-1], mode="valid"))
    energy = fftconvolve(x * x, np.ones(tpl.size), mode="valid")
    denom = np.sqrt(np.maximum(energy, 0.0)) * np.linalg.norm(tpl) + 1e-12
    coeff = corr / denom
    top = float(np.max(coeff))
    if top < params.sync_threshold:
        return DecodeOutcome.sync_failure("no correlation peak above threshold")
    # every block starts with the same preamble, so take the earliest
    # near-maximal peak rather than the global argmax; the preamble is
    # periodic at the symbol length, which makes partial overlaps one
    # symbol early score about 0.89, hence the tight 0.95 gate
    peaks, _ = find_peaks(
        coeff, height=max(params.sync_threshold, 0.95 * top),
        distance=params.symbol_samples,
    )
    peaks = peaks[peaks >= pad]
    if peaks.size == 0:
        return DecodeOutcome.sync_failure("no correlation peak above threshold")
    return int(peaks[0]) - pad


def pw_calibrate(
    signal: AudioSignal,
    sync_offset: int,
    params: PriWhisperParams = DEFAULT_PARAMS,
) -> CalibrationTable:
    """Per-tone baselines over the sync preamble and factors
    max(baseline)/baseline."""
    n = params.sync_symbols * params.symbol_samples
    seg = signal.samples[sync_offset : sync_offset + n]
    if seg.size < n:
        seg = np.pad(seg, (0, n - seg.size))
    t = np.arange(n)
    baseline = np.array(
        [
            np.abs(
                np.dot(
                    seg,
                    np.exp(-2j * np.pi * params.tone_hz(m) * t / params.sample_rate_hz),
                )
            )
            for m in range(params.tone_count)
        ]
    )
    if np.any(baseline == 0.0):
        raise ValueError("degenerate recording: zero baseline correlation")
    return CalibrationTable(baseline=baseline, factor=np.max(baseline) / baseline)


def pw_demod_symbol(
    segment: np.ndarray,
    calib: CalibrationTable,
    params: PriWhisperParams = DEFAULT_PARAMS,
) -> int:
    """argmax over tones of calibration-weighted correlation magnitude."""
    seg = np.asarray(segment, dtype=np.float64)
    if seg.size != params.symbol_samples:
        raise ValueError("segment must be exactly one symbol long")
    mags = np.abs(params.demod_exponentials @ seg)
    return int(np.argmax(calib.factor * mags))


def pw_decode(
    signal: AudioSignal,
    params: PriWhisperParams = DEFAULT_PARAMS,
    expected_bits: int = BCH_K - 16,
) -> DecodeOutcome:
    """sync -> calibrate -> demodulate blocks -> FEC decode -> payload."""
    if expected_bits <= 0:
        raise ValueError("expected_bits must be positive")
    offset = pw_sync(signal, params)
    if isinstance(offset, DecodeOutcome):
        return offset

    n_blocks = pw_block_count(expected_bits)
    x = signal.samples
    sym = params.symbol_samples
    need = offset + n_blocks * params.block_samples
    if need > x.size + sym // 2:
        return DecodeOutcome.frame_failure(
            f"recording truncated: {n_blocks} blocks need {need} samples"
        )

    bps = params.bits_per_symbol
    coded = np.empty(n_blocks * BCH_N, dtype=np.uint8)
    pos = 0
    for b in range(n_blocks):
        block_start = offset + b * params.block_samples
        calib = pw_calibrate(signal, block_start, params)
        data_start = block_start + params.sync_symbols * sym
        for s in range(params.data_symbols_per_block):
            seg = x[data_start + s * sym :][:sym]
            if seg.size < sym:
                seg = np.pad(seg, (0, sym - seg.size))
            value = pw_demod_symbol(seg, calib, params)
            for k in range(bps - 1, -1, -1):
                coded[pos] = (value >> k) & 1
                pos += 1
    try:
        payload = pw_fec_decode(coded, params)
    except FecDecodeError as exc:
        return DecodeOutcome.frame_failure(str(exc))
    return DecodeOutcome.decoded(BitMessage(payload.bits[:expected_bits]))
