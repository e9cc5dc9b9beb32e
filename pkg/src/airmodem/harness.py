"""Seeded trial harness: run scheme transmissions through the channel
simulator, score them, export/ingest CSV, and replay recorded datasets.

CSV schema (one row per trial, header mandatory, UTF-8, '.' decimals):
scheme, <condition keys...>, n_bits, ber, ter, outcome_kind, seed.
Floats print with %.10g so identical runs export byte-identical files.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelConfig, apply_channel
from .core import AudioSignal, BitMessage, DecodeOutcome, normalize_peak, read_wav, resample
from .lee import lee_capacity_bits, lee_decode, lee_encode
from .metrics import TrialRecord, compute_ber, compute_ter
from .nearby import nearby_capacity_bits, nearby_decode, nearby_encode
from .priwhisper import pw_capacity_bits, pw_decode, pw_encode


@dataclass(frozen=True)
class Scheme:
    """Uniform facade over one modem: encode, decode, padded capacity."""

    name: str
    sample_rate_hz: int
    default_trials: int

    def capacity_bits(self, n_bits: int) -> int:
        raise NotImplementedError

    def encode(self, msg: BitMessage) -> AudioSignal:
        raise NotImplementedError

    def decode(self, signal: AudioSignal, expected_bits: int) -> DecodeOutcome:
        raise NotImplementedError


class _LeeScheme(Scheme):
    def capacity_bits(self, n_bits):
        return lee_capacity_bits(n_bits)

    def encode(self, msg):
        return lee_encode(msg)

    def decode(self, signal, expected_bits):
        return lee_decode(signal, expected_bits=expected_bits)


class _NearbyScheme(Scheme):
    def capacity_bits(self, n_bits):
        return nearby_capacity_bits(n_bits)

    def encode(self, msg):
        return nearby_encode(msg)

    def decode(self, signal, expected_bits):
        return nearby_decode(signal, expected_bits=expected_bits)


class _PriWhisperScheme(Scheme):
    def capacity_bits(self, n_bits):
        return pw_capacity_bits(n_bits)

    def encode(self, msg):
        return pw_encode(msg)

    def decode(self, signal, expected_bits):
        return pw_decode(signal, expected_bits=expected_bits)


SCHEMES: dict[str, Scheme] = {
    "lee": _LeeScheme("lee", 48000, default_trials=100),
    "nearby": _NearbyScheme("nearby", 48000, default_trials=20),
    "priwhisper": _PriWhisperScheme("priwhisper", 48000, default_trials=20),
}

# scenario payload sizes in bits (near / medium / far distance classes)
PAYLOAD_NEAR = 4096
PAYLOAD_MEDIUM = 128
PAYLOAD_FAR = 16


def _run_one(scheme_name, channel, payload_bits, master_seed, index, condition):
    scheme = SCHEMES[scheme_name]
    n_bits = scheme.capacity_bits(payload_bits)
    trial_seed = int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])
    rng = np.random.default_rng(trial_seed)
    payload = BitMessage.random(n_bits, rng)
    tx = normalize_peak(scheme.encode(payload))
    rx = apply_channel(tx, replace(channel, seed=trial_seed))
    outcome = scheme.decode(rx, expected_bits=n_bits)
    ter = compute_ter(payload, outcome)
    ber = compute_ber(payload, outcome.bits) if outcome.ok else None
    return TrialRecord(
        scheme=scheme_name,
        trial_index=index,
        n_bits=n_bits,
        ber=ber,
        ter=ter,
        outcome_kind=outcome.kind,
        seed=trial_seed,
        condition=condition,
    )


def run_trials(
    scheme_name: str,
    channel: ChannelConfig,
    payload_bits: int,
    master_seed: int,
    n: int | None = None,
    condition: tuple[tuple[str, str], ...] = (),
    workers: int = 1,
) -> list[TrialRecord]:
    """n independent trials with fresh random payloads, each fully derived
    from (master_seed, trial index); records come back in trial order
    regardless of worker count."""
    if scheme_name not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme_name!r}")
    if n is None:
        n = SCHEMES[scheme_name].default_trials
    if n < 1:
        raise ValueError("n must be at least 1")
    args = [
        (scheme_name, channel, payload_bits, master_seed, i, condition)
        for i in range(n)
    ]
    if workers <= 1:
        return [_run_one(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, *zip(*args)))


def _format_float(value) -> str:
    return "" if value is None else "%.10g" % value


def records_to_csv(records) -> str:
    """Byte-deterministic CSV text for a record list sharing one condition
    key set."""
    records = list(records)
    if not records:
        raise ValueError("records must be non-empty")
    cond_keys = [k for k, _ in records[0].condition]
    header = ["scheme", *cond_keys, "n_bits", "ber", "ter", "outcome_kind", "seed"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in records:
        cond = dict(r.condition)
        if [k for k, _ in r.condition] != cond_keys:
            raise ValueError("records must share identical condition keys")
        writer.writerow(
            [
                r.scheme,
                *[cond[k] for k in cond_keys],
                r.n_bits,
                _format_float(r.ber),
                _format_float(r.ter),
                r.outcome_kind,
                r.seed,
            ]
        )
    return buf.getvalue()


def records_from_csv(text: str) -> list[TrialRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    fixed_tail = ["n_bits", "ber", "ter", "outcome_kind", "seed"]
    if header[0] != "scheme" or header[-5:] != fixed_tail:
        raise ValueError("unrecognized CSV header")
    cond_keys = header[1:-5]
    records = []
    for index, row in enumerate(reader):
        cond = tuple(zip(cond_keys, row[1 : 1 + len(cond_keys)]))
        n_bits, ber, ter, kind, seed = row[-5:]
        records.append(
            TrialRecord(
                scheme=row[0],
                trial_index=index,
                n_bits=int(n_bits),
                ber=float(ber) if ber else None,
                ter=float(ter),
                outcome_kind=kind,
                seed=int(seed),
                condition=cond,
            )
        )
    return records


MANIFEST_COLUMNS = ("wav", "scheme", "bits_hex", "n_bits", "ber")


def _load_column_map(path) -> dict[str, str]:
    mapping = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            ours, theirs = (s.strip() for s in line.split("=", 1))
            if ours not in MANIFEST_COLUMNS:
                raise ValueError(f"unknown manifest column {ours!r}")
            mapping[ours] = theirs
    return mapping


@dataclass(frozen=True)
class ReplayRow:
    """Per-recording replay result; delta is measured BER minus the
    manifest's reference BER, None when the file could not be scored."""

    wav: str
    scheme: str
    n_bits: int
    status: str  # "ok" | "missing" | "error"
    ber: float | None
    ter: float | None
    outcome_kind: str | None
    ref_ber: float | None
    delta: float | None


def replay_dataset(manifest_path, column_map_path=None) -> list[ReplayRow]:
    """Decode every recording named by the manifest and report deltas
    against its reference BER; unreadable rows are reported, not fatal.

    The manifest is CSV with columns wav, scheme, bits_hex, n_bits, ber
    (reference); a column-mapping file with `ours = theirs` lines adapts
    foreign header names.
    """
    mapping = _load_column_map(column_map_path) if column_map_path else {}
    with open(manifest_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    report = []
    for row in rows:
        get = lambda key: row.get(mapping.get(key, key))
        wav, scheme_name = get("wav"), get("scheme")
        n_bits = int(get("n_bits"))
        ref_ber = float(get("ber")) if get("ber") not in (None, "") else None
        tx = BitMessage.from_hex(get("bits_hex"), bit_count=n_bits)
        if scheme_name not in SCHEMES:
            report.append(
                ReplayRow(wav, scheme_name, n_bits, "error", None, None, None, ref_ber, None)
            )
            continue
        scheme = SCHEMES[scheme_name]
        try:
            signal = read_wav(wav)
        except OSError:
            report.append(
                ReplayRow(wav, scheme_name, n_bits, "missing", None, None, None, ref_ber, None)
            )
            continue
        if signal.sample_rate_hz != scheme.sample_rate_hz:
            signal = resample(signal, scheme.sample_rate_hz)
        outcome = scheme.decode(signal, expected_bits=n_bits)
        ter = compute_ter(tx, outcome)
        ber = compute_ber(tx, outcome.bits) if outcome.ok else None
        delta = None if ref_ber is None or ber is None else ber - ref_ber
        report.append(
            ReplayRow(wav, scheme_name, n_bits, "ok", ber, ter, outcome.kind, ref_ber, delta)
        )
    return report


def replay_report_csv(report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["wav", "scheme", "n_bits", "status", "ber", "ter", "outcome_kind", "ref_ber", "delta"]
    )
    for r in report:
        writer.writerow(
            [
                r.wav,
                r.scheme,
                r.n_bits,
                r.status,
                _format_float(r.ber),
                _format_float(r.ter),
                r.outcome_kind or "",
                _format_float(r.ref_ber),
                _format_float(r.delta),
            ]
        )
    return buf.getvalue()
