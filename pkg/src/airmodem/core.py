"""Shared audio/data types, WAV file I/O, level measurement and peak normalization.

Everything here is plain numpy: an AudioSignal is a mono float array plus a
sample rate, a BitMessage is an array of 0/1 values. All scheme encoders and
decoders, the channel simulator and the evaluation harness build on these.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import resample_poly


class WavError(Exception):
    """Base class for WAV container problems."""


class UnsupportedEncodingError(WavError):
    """Format tag / bit depth combination we do not handle."""


class MultiChannelError(WavError):
    """File has more than one channel."""


class SampleRateError(WavError):
    """Sample rate below the supported minimum (44.1 kHz)."""


class TruncatedWavError(WavError):
    """Container ends before the declared chunk data."""


@dataclass(frozen=True)
class BitMessage:
    """An ordered sequence of payload bits."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if arr.size and not np.all((arr == 0) | (arr == 1)):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits", arr)

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMessage):
            return NotImplemented
        return len(self) == len(other) and bool(np.all(self.bits == other.bits))

    @staticmethod
    def random(n_bits: int, rng: np.random.Generator) -> "BitMessage":
        if n_bits <= 0:
            raise ValueError("n_bits must be positive")
        return BitMessage(rng.integers(0, 2, size=n_bits, dtype=np.uint8))

    @staticmethod
    def from_hex(text: str, bit_count: Optional[int] = None) -> "BitMessage":
        """Parse hex text, most-significant-bit-first within each byte."""
        clean = "".join(text.split())
        if len(clean) % 2:
            clean = clean + "0"
        data = bytes.fromhex(clean)
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        if bit_count is not None:
            if bit_count > bits.size:
                raise ValueError("bit_count exceeds available bits")
            bits = bits[:bit_count]
        return BitMessage(bits)

    def to_hex(self) -> str:
        padded = np.zeros((-len(self)) % 8 + len(self), dtype=np.uint8)
        padded[: len(self)] = self.bits
        return bytes(np.packbits(padded)).hex()


@dataclass(frozen=True)
class AudioSignal:
    """Mono sample sequence (amplitudes in [-1, 1]) with a sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("samples must be mono (one-dimensional)")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", arr)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def peak(self) -> float:
        return float(np.max(np.abs(self.samples))) if self.samples.size else 0.0

    def peak_dbfs(self) -> float:
        p = self.peak()
        return -math.inf if p == 0.0 else 20.0 * math.log10(p)


@dataclass(frozen=True)
class DecodeOutcome:
    """Either recovered bits or a typed failure (sync-not-found, frame-invalid)."""

    kind: str  # "decoded" | "sync_failure" | "frame_failure"
    bits: Optional[BitMessage] = None
    diagnostics: str = ""

    KINDS = ("decoded", "sync_failure", "frame_failure")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown outcome kind {self.kind!r}")
        if self.kind == "decoded":
            if self.bits is None or len(self.bits) == 0:
                raise ValueError("decoded outcome must carry at least one bit")
        elif self.bits is not None:
            raise ValueError("failure outcomes carry no bits")

    @property
    def ok(self) -> bool:
        return self.kind == "decoded"

    @staticmethod
    def decoded(bits: BitMessage, diagnostics: str = "") -> "DecodeOutcome":
        return DecodeOutcome("decoded", bits=bits, diagnostics=diagnostics)

    @staticmethod
    def sync_failure(diagnostics: str = "") -> "DecodeOutcome":
        return DecodeOutcome("sync_failure", diagnostics=diagnostics)

    @staticmethod
    def frame_failure(diagnostics: str = "") -> "DecodeOutcome":
        return DecodeOutcome("frame_failure", diagnostics=diagnostics)


# --------------------------------------------------------------------------
# WAV I/O
#
# Hand-rolled RIFF parser/writer: the stdlib wave module does not handle
# 32-bit float WAV (format tag 3), and we want precise, distinct errors for
# unsupported content. Supported: mono PCM16, PCM24 and FLOAT32.
# --------------------------------------------------------------------------

_FMT_PCM = 1
_FMT_FLOAT = 3
_FMT_EXTENSIBLE = 0xFFFE

ENCODINGS = ("pcm16", "pcm24", "float32")


def read_wav(path) -> AudioSignal:
    """Read a mono WAV file into an AudioSignal with samples in [-1, 1]."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise TruncatedWavError(f"{path}: not a RIFF/WAVE container")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        cid = raw[pos : pos + 4]
        (size,) = struct.unpack("<I", raw[pos + 4 : pos + 8])
        body = raw[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise TruncatedWavError(f"{path}: chunk {cid!r} truncated")
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            data = body
        pos += 8 + size + (size & 1)

    if fmt is None or data is None:
        raise TruncatedWavError(f"{path}: missing fmt/data chunk")
    if len(fmt) < 16:
        raise TruncatedWavError(f"{path}: fmt chunk too short")
    tag, channels, rate, _, _, bits = struct.unpack("<HHIIHH", fmt[:16])
    if tag == _FMT_EXTENSIBLE and len(fmt) >= 26:
        (tag,) = struct.unpack("<H", fmt[24:26])

    if channels != 1:
        raise MultiChannelError(f"{path}: {channels} channels, expected mono")
    if rate < 44100:
        raise SampleRateError(f"{path}: {rate} Hz below the 44.1 kHz minimum")

    if tag == _FMT_PCM and bits == 16:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 2**15
    elif tag == _FMT_PCM and bits == 24:
        b = np.frombuffer(data, dtype=np.uint8)
        b = b[: (b.size // 3) * 3].reshape(-1, 3)
        ints = (
            b[:, 0].astype(np.int32)
            | (b[:, 1].astype(np.int32) << 8)
            | (b[:, 2].astype(np.int32) << 16)
        )
        ints = np.where(ints >= 2**23, ints - 2**24, ints)
        samples = ints.astype(np.float64) / 2**23
    elif tag == _FMT_FLOAT and bits == 32:
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedEncodingError(
            f"{path}: format tag {tag}, {bits}-bit not supported"
        )
    # Clamp at +1.0: symmetric integer mapping loses one positive code.
    samples = np.clip(samples, -1.0, 1.0)
    return AudioSignal(samples, int(rate))


def write_wav(signal: AudioSignal, path, encoding: str = "pcm16") -> None:
    """Write an AudioSignal as mono RIFF/WAVE in the requested encoding."""
    if encoding not in ENCODINGS:
        raise ValueError(f"encoding must be one of {ENCODINGS}, got {encoding!r}")
    s = signal.samples
    if s.size and (np.max(s) > 1.0 or np.min(s) < -1.0):
        raise ValueError("samples outside [-1, 1]")

    if encoding == "pcm16":
        tag, bits = _FMT_PCM, 16
        ints = np.clip(np.rint(s * 2**15), -(2**15), 2**15 - 1).astype("<i2")
        payload = ints.tobytes()
    elif encoding == "pcm24":
        tag, bits = _FMT_PCM, 24
        ints = np.clip(np.rint(s * 2**23), -(2**23), 2**23 - 1).astype(np.int64)
        u = (ints & 0xFFFFFF).astype(np.uint32)
        b = np.empty((u.size, 3), dtype=np.uint8)
        b[:, 0] = u & 0xFF
        b[:, 1] = (u >> 8) & 0xFF
        b[:, 2] = (u >> 16) & 0xFF
        payload = b.tobytes()
    else:
        tag, bits = _FMT_FLOAT, 32
        payload = s.astype("<f4").tobytes()

    rate = signal.sample_rate_hz
    block = bits // 8
    fmt = struct.pack("<HHIIHH", tag, 1, rate, rate * block, block, bits)
    chunks = b"".join(
        [
            b"fmt ",
            struct.pack("<I", len(fmt)),
            fmt,
            b"data",
            struct.pack("<I", len(payload)),
            payload,
            b"\x00" if len(payload) & 1 else b"",
        ]
    )
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks)


def normalize_peak(signal: AudioSignal, target_dbfs: float = -3.0) -> AudioSignal:
    """Uniformly scale so the peak hits the target level (default -3 dBFS)."""
    peak = signal.peak()
    if peak == 0.0:
        raise ValueError("cannot normalize an all-zero signal")
    target = 10.0 ** (target_dbfs / 20.0)
    return AudioSignal(signal.samples * (target / peak), signal.sample_rate_hz)


def out_of_band_ratio_db(signal: AudioSignal, f_low_hz: float, f_high_hz: float) -> float:
    """Energy outside [f_low, f_high] relative to in-band energy, in dB."""
    spec = np.abs(np.fft.rfft(signal.samples)) ** 2
    freqs = np.fft.rfftfreq(signal.samples.size, d=1.0 / signal.sample_rate_hz)
    in_band = (freqs >= f_low_hz) & (freqs <= f_high_hz)
    e_in = float(np.sum(spec[in_band]))
    e_out = float(np.sum(spec[~in_band]))
    if e_in == 0.0:
        return math.inf
    if e_out == 0.0:
        return -math.inf
    return 10.0 * math.log10(e_out / e_in)


def resample(signal: AudioSignal, new_rate_hz: int) -> AudioSignal:
    """Polyphase windowed-sinc resampling between sample rates."""
    if new_rate_hz <= 0:
        raise ValueError("new_rate_hz must be positive")
    if new_rate_hz == signal.sample_rate_hz:
        return signal
    g = math.gcd(new_rate_hz, signal.sample_rate_hz)
    up, down = new_rate_hz // g, signal.sample_rate_hz // g
    out = resample_poly(signal.samples, up, down)
    return AudioSignal(np.clip(out, -1.0, 1.0), int(new_rate_hz))
