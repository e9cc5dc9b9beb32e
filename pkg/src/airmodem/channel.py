"""Deterministic, seedable acoustic channel impairments.

Stages compose in the physical speaker-to-microphone order: room multipath
(impulse-response convolution), device frequency tilt, clipping, additive
burst noise and optional ambient mixing, then AWGN at a requested
post-impairment SNR. Identical (input, config, seed) produce bit-identical
output.

Configs serialize to a plain-text key-value format::

    # one key per line, '#' starts a comment
    snr_db = 20
    seed = 42
    rir_taps = 0.0:1.0, 6.5:-0.31, 20.0:0.1      # delay_ms:gain
    rir_synth = 20, 12                           # delay_spread_ms, density
    tilt = 9000:0, 16000:-12                     # freq_hz:gain_db
    clip_level = 0.5
    bursts = 2.0, 0.1, -6                        # period_s, duration_s, level_dbfs
    ambient = noise.wav, -30                     # wav path, level_dbfs

`rir_synth` is a parse-time convenience expanded into explicit taps with
the config seed. Levels are relative dBFS (RMS); absolute sound-pressure
levels have no digital equivalent and are not modeled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .core import AudioSignal, read_wav


@dataclass(frozen=True)
class BurstSpec:
    period_s: float
    duration_s: float
    level_dbfs: float


@dataclass(frozen=True)
class AmbientSpec:
    wav_path: str
    level_dbfs: float


@dataclass(frozen=True)
class ChannelConfig:
    snr_db: float | None = None
    rir: tuple[tuple[float, float], ...] | None = None  # (delay_ms, gain)
    tilt: tuple[tuple[float, float], ...] | None = None  # (freq_hz, gain_db)
    clip_level: float | None = None
    bursts: BurstSpec | None = None
    ambient: AmbientSpec | None = None
    seed: int = 0

    def __post_init__(self):
        if self.rir is not None:
            delays = [d for d, _ in self.rir]
            if delays != sorted(delays):
                raise ValueError("rir taps must be sorted by delay")
            if delays[0] != 0.0 or self.rir[0][1] != 1.0:
                raise ValueError("first rir tap must be at 0 ms with gain 1")
        if self.clip_level is not None and not 0.0 < self.clip_level <= 1.0:
            raise ValueError("clip_level must be in (0, 1]")

    def to_text(self) -> str:
        lines = [f"seed = {self.seed}"]
        if self.snr_db is not None:
            lines.append(f"snr_db = {self.snr_db:g}")
        if self.rir is not None:
            taps = ", ".join(f"{d:g}:{g:.10g}" for d, g in self.rir)
            lines.append(f"rir_taps = {taps}")
        if self.tilt is not None:
            pts = ", ".join(f"{f:g}:{g:g}" for f, g in self.tilt)
            lines.append(f"tilt = {pts}")
        if self.clip_level is not None:
            lines.append(f"clip_level = {self.clip_level:g}")
        if self.bursts is not None:
            b = self.bursts
            lines.append(f"bursts = {b.period_s:g}, {b.duration_s:g}, {b.level_dbfs:g}")
        if self.ambient is not None:
            a = self.ambient
            lines.append(f"ambient = {a.wav_path}, {a.level_dbfs:g}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "ChannelConfig":
        entries = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in entries:
                raise ValueError(f"line {lineno}: duplicate key {key!r}")
            entries[key] = value
        known = {
            "seed", "snr_db", "rir_taps", "rir_synth", "tilt",
            "clip_level", "bursts", "ambient",
        }
        unknown = set(entries) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")

        seed = int(entries.get("seed", "0"))
        kwargs = {"seed": seed}
        if "snr_db" in entries:
            kwargs["snr_db"] = float(entries["snr_db"])
        if "rir_taps" in entries and "rir_synth" in entries:
            raise ValueError("rir_taps and rir_synth are mutually exclusive")
        if "rir_taps" in entries:
            kwargs["rir"] = tuple(
                _parse_pair(item) for item in entries["rir_taps"].split(",")
            )
        if "rir_synth" in entries:
            spread, density = (s.strip() for s in entries["rir_synth"].split(","))
            kwargs["rir"] = synth_rir(float(spread), int(density), seed)
        if "tilt" in entries:
            kwargs["tilt"] = tuple(
                _parse_pair(item) for item in entries["tilt"].split(",")
            )
        if "clip_level" in entries:
            kwargs["clip_level"] = float(entries["clip_level"])
        if "bursts" in entries:
            p, d, level = (float(s) for s in entries["bursts"].split(","))
            kwargs["bursts"] = BurstSpec(p, d, level)
        if "ambient" in entries:
            path, level = (s.strip() for s in entries["ambient"].rsplit(",", 1))
            kwargs["ambient"] = AmbientSpec(path, float(level))
        return ChannelConfig(**kwargs)


def _parse_pair(item: str) -> tuple[float, float]:
    a, b = (s.strip() for s in item.split(":"))
    return float(a), float(b)


IDENTITY = ChannelConfig()


def synth_rir(
    delay_spread_ms: float, density: int, seed: int
) -> tuple[tuple[float, float], ...]:
    """Random exponentially decaying impulse response.

    The direct path is a unit tap at 0 ms; reflections get random delays
    up to the spread, random signs, and magnitudes on a decay envelope
    that reaches -20 dB at exactly delay_spread_ms.
    """
    if delay_spread_ms < 0:
        raise ValueError("delay_spread_ms must be non-negative")
    if density < 1:
        raise ValueError("density must be at least 1 tap")
    if delay_spread_ms == 0 or density == 1:
        # degenerate spread collapses to the identity response
        return ((0.0, 1.0),)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5151]))
    inner = np.sort(rng.uniform(0.0, delay_spread_ms, density - 2))
    delays = np.concatenate([inner, [delay_spread_ms]])
    signs = rng.choice([-1.0, 1.0], size=delays.size)
    gains = signs * 10 ** (-delays / delay_spread_ms)  # -20 dB at the spread
    taps = [(0.0, 1.0)] + [(float(d), float(g)) for d, g in zip(delays, gains)]
    return tuple(taps)


def _rir_kernel(rir, sample_rate_hz: int) -> np.ndarray:
    last_ms = rir[-1][0]
    kernel = np.zeros(int(round(last_ms / 1000 * sample_rate_hz)) + 1)
    for delay_ms, gain in rir:
        kernel[int(round(delay_ms / 1000 * sample_rate_hz))] += gain
    return kernel


def tilt_filter(
    signal: AudioSignal, curve: tuple[tuple[float, float], ...]
) -> AudioSignal:
    """Zero-phase per-frequency gain, linear in log-frequency between the
    curve's (freq_hz, gain_db) points and flat beyond its endpoints."""
    pts = sorted(curve)
    gains_db = np.array([g for _, g in pts])
    if np.any(gains_db > 20.0):
        raise ValueError("tilt gain above +20 dB refused")
    freqs_pts = np.array([f for f, _ in pts])
    if np.any(freqs_pts <= 0):
        raise ValueError("tilt curve frequencies must be positive")
    spec = np.fft.rfft(signal.samples)
    freqs = np.fft.rfftfreq(signal.samples.size, 1.0 / signal.sample_rate_hz)
    log_f = np.log(np.maximum(freqs, freqs_pts[0] / 2))
    gain_db = np.interp(log_f, np.log(freqs_pts), gains_db)
    out = np.fft.irfft(spec * 10 ** (gain_db / 20), n=signal.samples.size)
    return AudioSignal(out, signal.sample_rate_hz)


def _make_burst(n: int, level_dbfs: float, rate: int, rng) -> np.ndarray:
    """Band-limited noise burst with 5 ms raised-cosine edges at a given
    RMS level."""
    noise = rng.normal(0.0, 1.0, n)
    spec = np.fft.rfft(noise)
    freqs = np.fft.rfftfreq(n, 1.0 / rate)
    spec[(freqs < 200.0) | (freqs > 20000.0)] = 0.0
    noise = np.fft.irfft(spec, n=n)
    edge = min(int(round(0.005 * rate)), n // 2)
    if edge > 0:
        ramp = 0.5 * (1 - np.cos(np.pi * np.arange(edge) / edge))
        noise[:edge] *= ramp
        noise[-edge:] *= ramp[::-1]
    rms = np.sqrt(np.mean(noise**2))
    return noise * (10 ** (level_dbfs / 20) / rms)


def apply_channel(signal: AudioSignal, config: ChannelConfig) -> AudioSignal:
    """Compose the configured impairments in fixed stage order.

    AWGN power is set against the signal power measured after RIR, tilt
    and clipping, so the requested SNR is the one seen at the receiver.
    """
    if _is_identity(config):
        return AudioSignal(signal.samples.copy(), signal.sample_rate_hz)
    x = signal.samples.copy()
    rate = signal.sample_rate_hz
    ss = np.random.SeedSequence([int(config.seed), 0xC4A7])
    burst_rng, awgn_rng = (np.random.default_rng(c) for c in ss.spawn(2))

    if config.rir is not None:
        x = fftconvolve(x, _rir_kernel(config.rir, rate))
    if config.tilt is not None:
        x = tilt_filter(AudioSignal(x, rate), config.tilt).samples
    if config.clip_level is not None:
        x = np.clip(x, -config.clip_level, config.clip_level)

    signal_power = float(np.mean(x**2))

    if config.bursts is not None:
        b = config.bursts
        period = int(round(b.period_s * rate))
        length = int(round(b.duration_s * rate))
        for start in range(0, x.size, period):
            n = min(length, x.size - start)
            x[start : start + n] += _make_burst(n, b.level_dbfs, rate, burst_rng)
    if config.ambient is not None:
        wav = read_wav(config.ambient.wav_path)
        if wav.sample_rate_hz != rate:
            raise ValueError("ambient wav sample rate must match the signal")
        amb = np.tile(wav.samples, -(-x.size // wav.samples.size))[: x.size]
        rms = np.sqrt(np.mean(amb**2))
        if rms > 0:
            x = x + amb * (10 ** (config.ambient.level_dbfs / 20) / rms)
    if config.snr_db is not None:
        noise_power = signal_power / 10 ** (config.snr_db / 10)
        x = x + awgn_rng.normal(0.0, np.sqrt(noise_power), x.size)

    return AudioSignal(np.clip(x, -1.0, 1.0), rate)


def _is_identity(config: ChannelConfig) -> bool:
    return (
        config.snr_db is None
        and config.rir is None
        and config.tilt is None
        and config.clip_level is None
        and config.bursts is None
        and config.ambient is None
    )
