"""DSSS-spread MFSK modem in the 18.5-20 kHz band with token framing.

Each symbol is one period of a fixed spreading code multiplied by one of 16
MFSK tones (4 bits/symbol) and placed in the near-ultrasonic band. A token is
[spacer][16 data symbols][parity], so the net/gross throughput ratio is 16/18
(94.49 bps gross, 84 bps net). Acquisition correlates every sample offset of
the recording with one code period per tone ("raw acquisition scores"), then
energy-normalizes the scores with a fixed lag of 215 samples, which removes
exactly 215 leading rows from the matrix.

The spreading code is a maximal-length binary sequence stored at a 12 kHz
code rate and sinc-interpolated to the 48 kHz output rate. The stored code is
band-limited so that spread symbols stay inside the band; despreading and
tone detection use the identical band-limited waveforms as matched filters.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.signal import fftconvolve, find_peaks

from .core import AudioSignal, BitMessage, DecodeOutcome


@dataclass(frozen=True)
class NearbyParams:
    band_low_hz: float = 18500.0
    tone_spacing_hz: float = 100.0
    tone_count: int = 16           # M
    bits_per_symbol: int = 4
    code_rate_hz: int = 12000      # F_b
    code_period: int = 508         # M_p, code samples per symbol
    sample_rate_hz: int = 48000
    norm_lag: int = 215            # d, rows dropped by score normalization
    noise_floor: float = 1.0       # eta, guard scaling of the suppression band
    data_symbols_per_token: int = 16
    spacer_tone_hz: float = 20050.0  # reserved 17th tone, outside the alphabet
    code_seed: int = 0x1A5          # LFSR start state for the spreading code
    code_bandwidth_hz: float = 200.0
    sync_peak_ratio: float = 4.0

    @property
    def upsample(self) -> int:
        return self.sample_rate_hz // self.code_rate_hz

    @property
    def symbol_samples(self) -> int:
        return self.code_period * self.upsample

    @property
    def symbols_per_token(self) -> int:
        return self.data_symbols_per_token + 2  # spacer + data + parity

    @property
    def bits_per_token(self) -> int:
        return self.data_symbols_per_token * self.bits_per_symbol

    @property
    def gross_rate_bps(self) -> float:
        return self.bits_per_symbol * self.code_rate_hz / self.code_period

    @property
    def net_rate_bps(self) -> float:
        return self.gross_rate_bps * self.data_symbols_per_token / self.symbols_per_token

    def tone_hz(self, index: int) -> float:
        if index == self.tone_count:
            return self.spacer_tone_hz
        return self.band_low_hz + index * self.tone_spacing_hz

    @cached_property
    def code_at_code_rate(self) -> np.ndarray:
        """One period of the band-limited spreading code at 12 kHz."""
        chips = _msequence(self.code_seed, self.code_period)
        # Band-limit the period circularly so every period is identical and
        # the spread symbols stay inside the emission band.
        spec = np.fft.rfft(chips)
        freqs = np.fft.rfftfreq(self.code_period, d=1.0 / self.code_rate_hz)
        spec[freqs > self.code_bandwidth_hz] = 0.0
        spec[0] = 0.0
        code = np.fft.irfft(spec, n=self.code_period)
        return code / np.sqrt(np.mean(code**2))

    @cached_property
    def code_interpolated(self) -> np.ndarray:
        """The code period sinc-interpolated from 12 kHz to the output rate."""
        spec = np.fft.rfft(self.code_at_code_rate)
        n_out = self.symbol_samples
        # Exact periodic sinc interpolation: zero-pad the spectrum.
        out = np.fft.irfft(spec, n=n_out) * self.upsample
        return out

    @cached_property
    def symbol_templates(self) -> np.ndarray:
        """Analytic symbol waveforms, one row per tone index (16 data + spacer)."""
        n = np.arange(self.symbol_samples)
        rows = []
        for idx in range(self.tone_count + 1):
            carrier = np.exp(2j * np.pi * self.tone_hz(idx) * n / self.sample_rate_hz)
            rows.append(self.code_interpolated * carrier)
        return np.array(rows)


DEFAULT_PARAMS = NearbyParams()


@dataclass(frozen=True)
class AcquisitionMatrix:
    """Raw and energy-normalized acquisition scores, (sample offset, tone).

    window_rms carries the RMS of each correlation window so normalization
    can form proper correlation coefficients without re-reading the signal.
    """

    raw: np.ndarray
    window_rms: np.ndarray
    template_norm: float
    normalized: np.ndarray | None = None


def _msequence(start_state: int, length: int) -> np.ndarray:
    """±1 chips from a degree-9 maximal LFSR (x^9 + x^5 + 1), truncated."""
    state = start_state & 0x1FF
    if state == 0:
        raise ValueError("LFSR state must be nonzero")
    chips = np.empty(length)
    for i in range(length):
        bit = state & 1
        chips[i] = 1.0 if bit else -1.0
        fb = ((state >> 0) ^ (state >> 4)) & 1
        state = (state >> 1) | (fb << 8)
    return chips


def nearby_capacity_bits(n_bits: int, params: NearbyParams = DEFAULT_PARAMS) -> int:
    """Padded message size: zero-padded to whole tokens of 64 data bits."""
    if n_bits <= 0:
        raise ValueError("message must be non-empty")
    bpt = params.bits_per_token
    return ((n_bits + bpt - 1) // bpt) * bpt


def nearby_interpolate_code(
    code: np.ndarray, k: int, m: int, params: NearbyParams = DEFAULT_PARAMS
) -> float:
    """Index the interpolated code at (k*M_p + m)/F_b seconds.

    The stored code is a discrete sequence at the output rate, so the time
    index is converted to samples by multiplying with the output rate: for the
    12 kHz -> 48 kHz ratio this is 4*(k*M_p + m).
    """
    idx = (k * params.code_period + m) * params.sample_rate_hz // params.code_rate_hz
    if idx >= len(code) or idx < 0:
        raise IndexError(f"interpolated code index {idx} out of range")
    return float(code[idx])


def nearby_encode(msg: BitMessage, params: NearbyParams = DEFAULT_PARAMS) -> AudioSignal:
    """Modulate bits into spread-MFSK tokens ([spacer][16 data][parity])."""
    if len(msg) == 0:
        raise ValueError("message must be non-empty")
    padded = np.zeros(nearby_capacity_bits(len(msg), params), dtype=np.uint8)
    padded[: len(msg)] = msg.bits

    symbols = []
    groups = padded.reshape(-1, params.bits_per_symbol)
    values = groups @ (1 << np.arange(params.bits_per_symbol - 1, -1, -1))
    for start in range(0, values.size, params.data_symbols_per_token):
        data = values[start : start + params.data_symbols_per_token]
        parity = int(np.bitwise_xor.reduce(data))
        symbols.append(params.tone_count)  # spacer
        symbols.extend(int(v) for v in data)
        symbols.append(parity)

    waves = params.symbol_templates.real
    out = np.concatenate([waves[s] for s in symbols])
    # Symbol boundaries are discontinuous; confine the splatter to the band.
    out = _band_confine(out, params)
    return AudioSignal(out / np.max(np.abs(out)), params.sample_rate_hz)


def _band_confine(x: np.ndarray, params: NearbyParams) -> np.ndarray:
    """Zero-phase bandpass with raised-cosine edges just inside the guard."""
    # Transition bands sit entirely inside the 300 Hz guard around the band.
    edge = 60.0
    lo = params.band_low_hz - 300.0 + edge
    hi = params.band_low_hz + (params.tone_count - 1) * params.tone_spacing_hz + 300.0 - edge
    spec = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(x.size, d=1.0 / params.sample_rate_hz)
    gain = np.zeros_like(freqs)
    inside = (freqs >= lo) & (freqs <= hi)
    gain[inside] = 1.0
    rise = (freqs >= lo - edge) & (freqs < lo)
    gain[rise] = 0.5 * (1 + np.cos(np.pi * (lo - freqs[rise]) / edge))
    fall = (freqs > hi) & (freqs <= hi + edge)
    gain[fall] = 0.5 * (1 + np.cos(np.pi * (freqs[fall] - hi) / edge))
    return np.fft.irfft(spec * gain, n=x.size)


def nearby_raw_scores(
    signal: AudioSignal, params: NearbyParams = DEFAULT_PARAMS
) -> AcquisitionMatrix:
    """Raw acquisition scores: one row per sample offset where a full code
    period fits, one column per tone."""
    x = signal.samples
    L = params.symbol_samples
    if x.size < L:
        raise ValueError("signal shorter than one code period")
    n_rows = x.size - L + 1
    raw = np.empty((n_rows, params.tone_count + 1))
    for idx in range(params.tone_count + 1):
        tpl = params.symbol_templates[idx]
        raw[:, idx] = np.abs(fftconvolve(x, np.conj(tpl[::-1]), mode="valid"))
    window_energy = fftconvolve(x * x, np.ones(L), mode="valid")
    window_rms = np.sqrt(np.maximum(window_energy, 0.0) / L)
    tpl_norm = float(np.linalg.norm(params.symbol_templates[0]))
    return AcquisitionMatrix(raw=raw, window_rms=window_rms, template_norm=tpl_norm)


def nearby_normalize_scores(
    acq: AcquisitionMatrix, params: NearbyParams = DEFAULT_PARAMS
) -> AcquisitionMatrix:
    """Turn raw scores into energy-normalized correlation coefficients.

    Each score is divided by the energy of its correlation window, which
    compensates level differences (and the energy shifts of Doppler-squeezed
    playback) and makes the argmax invariant under uniform scaling of the
    input. Rows whose lagged index n-d would be negative are omitted, so the
    output has exactly d fewer rows than the input.
    """
    d = params.norm_lag
    raw = acq.raw
    if raw.shape[0] <= d:
        raise ValueError(f"raw matrix needs more than {d} rows")
    L = params.symbol_samples
    denom = acq.window_rms[d:] * np.sqrt(L) * acq.template_norm
    eps = 1e-12 + 0.01 * float(np.mean(denom))
    normalized = raw[d:] / (denom + eps)[:, None]
    return AcquisitionMatrix(
        raw=raw,
        window_rms=acq.window_rms,
        template_norm=acq.template_norm,
        normalized=normalized,
    )


def _sync_from_scores(normalized: np.ndarray, params: NearbyParams, n_symbols: int):
    row_score = np.max(normalized, axis=1)
    med = float(np.median(row_score))
    if med <= 0.0:
        return DecodeOutcome.sync_failure("no signal energy")
    peaks, _ = find_peaks(
        row_score,
        height=params.sync_peak_ratio * med,
        distance=params.symbol_samples // 2,
    )
    if peaks.size < n_symbols:
        return DecodeOutcome.sync_failure(
            f"only {peaks.size} acquisition peaks above threshold"
        )
    top = peaks[np.argsort(row_score[peaks])[-n_symbols:]]
    # Per-symbol peaks can jitter by a sample because the band-limited
    # code's correlation envelope is nearly flat around alignment; snap
    # the earliest peak to the median alignment across all top peaks.
    period = params.symbol_samples
    ref = int(top[np.argmax(row_score[top])])
    dev = ((top - ref + period // 2) % period) - period // 2
    residual = (ref + int(np.round(np.median(dev)))) % period
    earliest = int(np.min(top))
    k = int(np.round((earliest - residual) / period))
    return residual + k * period + params.norm_lag


def nearby_sync(
    signal: AudioSignal,
    params: NearbyParams = DEFAULT_PARAMS,
    n_symbols: int | None = None,
):
    """Locate the transmission start: earliest of the n highest normalized
    acquisition peaks (n = symbols per message)."""
    if n_symbols is None:
        n_symbols = params.symbols_per_token
    # Zero-pad the front so starts earlier than the normalization lag and
    # endpoint peaks remain detectable.
    pad = params.symbol_samples
    x = np.concatenate([np.zeros(pad), signal.samples, np.zeros(pad)])
    acq = nearby_raw_scores(AudioSignal(x, signal.sample_rate_hz), params)
    acq = nearby_normalize_scores(acq, params)
    res = _sync_from_scores(acq.normalized, params, n_symbols)
    if isinstance(res, DecodeOutcome):
        return res
    return res - pad


def nearby_noise_suppress(
    signal: AudioSignal, params: NearbyParams = DEFAULT_PARAMS
) -> AudioSignal:
    """Zero-phase bandpass around the scheme band; the noise-floor parameter
    scales the 300 Hz transition guard on each side."""
    guard = 300.0 * params.noise_floor
    f_lo = params.band_low_hz - guard
    f_hi = params.band_low_hz + (params.tone_count - 1) * params.tone_spacing_hz + guard
    spec = np.fft.rfft(signal.samples)
    freqs = np.fft.rfftfreq(signal.samples.size, d=1.0 / signal.sample_rate_hz)
    mask = ((freqs >= f_lo) & (freqs <= f_hi)).astype(float)
    out = np.fft.irfft(spec * mask, n=signal.samples.size)
    return AudioSignal(out, signal.sample_rate_hz)


def nearby_decode(
    signal: AudioSignal,
    params: NearbyParams = DEFAULT_PARAMS,
    expected_bits: int = 64,
) -> DecodeOutcome:
    """Despread and demodulate tokens, strip spacers and verify parity."""
    if expected_bits <= 0:
        raise ValueError("expected_bits must be positive")
    n_tokens = nearby_capacity_bits(expected_bits, params) // params.bits_per_token
    n_symbols = n_tokens * params.symbols_per_token

    offset = nearby_sync(signal, params, n_symbols=n_symbols)
    if isinstance(offset, DecodeOutcome):
        return offset
    offset = max(0, offset)

    x = signal.samples
    L = params.symbol_samples
    templates = params.symbol_templates
    values = []
    for s in range(n_symbols):
        start = offset + s * L
        seg = x[start : start + L]
        if seg.size < L:
            seg = np.pad(seg, (0, L - seg.size))
        scores = np.abs(templates @ np.asarray(seg, dtype=complex).conj())
        values.append(int(np.argmax(scores)))

    bits = []
    for tok in range(n_tokens):
        sym = values[tok * params.symbols_per_token : (tok + 1) * params.symbols_per_token]
        spacer, data, parity = sym[0], sym[1:-1], sym[-1]
        if spacer != params.tone_count:
            return DecodeOutcome.frame_failure(f"token {tok}: spacer not found")
        if any(v >= params.tone_count for v in data) or parity >= params.tone_count:
            return DecodeOutcome.frame_failure(f"token {tok}: symbol outside alphabet")
        if int(np.bitwise_xor.reduce(np.array(data))) != parity:
            return DecodeOutcome.frame_failure(f"token {tok}: parity mismatch")
        for v in data:
            for b in range(params.bits_per_symbol - 1, -1, -1):
                bits.append((v >> b) & 1)
    bits = np.array(bits[:expected_bits], dtype=np.uint8)
    return DecodeOutcome.decoded(BitMessage(bits))
