"""Reliability metrics: BER with the truncate/pad rule, TER with the
100-percent-on-failure rule, PER, and grouped summary statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BitMessage, DecodeOutcome


@dataclass(frozen=True)
class TrialRecord:
    """One simulated or replayed transmission and its scored outcome.

    ber is None for failure outcomes; ter is always defined and equals
    1.0 on any failure. condition holds ordered (key, value) labels such
    as the channel id or distance class.
    """

    scheme: str
    trial_index: int
    n_bits: int
    ber: float | None
    ter: float
    outcome_kind: str
    seed: int
    condition: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.ter <= 1.0:
            raise ValueError("ter must lie in [0, 1]")
        if self.outcome_kind != "decoded" and self.ter != 1.0:
            raise ValueError("failure outcomes must carry ter = 1")
        if self.outcome_kind != "decoded" and self.ber is not None:
            raise ValueError("ber is defined only for decoded outcomes")


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    stderr: float
    median: float
    p25: float
    p75: float
    count: int


def compute_ber(tx: BitMessage, rx: BitMessage) -> float:
    """Bit error rate against the transmitted reference.

    A longer decode is truncated to the reference length; a shorter one
    counts every missing position as an error.
    """
    if len(tx) == 0:
        raise ValueError("reference message must be non-empty")
    n = len(tx)
    common = min(n, len(rx))
    errors = int(np.sum(tx.bits[:common] != rx.bits[:common])) + (n - common)
    return errors / n


def compute_ter(tx: BitMessage, outcome: DecodeOutcome) -> float:
    """Transmission error rate: BER of a decode, 1.0 on any failure."""
    if len(tx) == 0:
        raise ValueError("reference message must be non-empty")
    if not outcome.ok:
        return 1.0
    return compute_ber(tx, outcome.bits)


def compute_per(records) -> float:
    """Packet error rate: fraction of records with any error at all."""
    records = list(records)
    if not records:
        raise ValueError("records must be non-empty")
    return sum(1 for r in records if r.ter > 0) / len(records)


def _group_key(record: TrialRecord, keys):
    condition = dict(record.condition)
    parts = []
    for key in keys:
        if hasattr(record, key):
            parts.append(str(getattr(record, key)))
        elif key in condition:
            parts.append(condition[key])
        else:
            raise KeyError(f"unknown group key {key!r}")
    return tuple(parts)


def summarize(records, keys=("scheme",)) -> dict[tuple, SummaryStats]:
    """Per-group TER statistics.

    Quantiles use linear interpolation between order statistics; the
    standard error is the sample standard deviation (ddof 1) over sqrt(n),
    zero for singleton groups.
    """
    records = list(records)
    if not records:
        raise ValueError("records must be non-empty")
    groups: dict[tuple, list[float]] = {}
    for record in records:
        groups.setdefault(_group_key(record, keys), []).append(record.ter)
    out = {}
    for key, ters in groups.items():
        arr = np.array(ters)
        stderr = 0.0 if arr.size < 2 else float(np.std(arr, ddof=1) / np.sqrt(arr.size))
        out[key] = SummaryStats(
            mean=float(np.mean(arr)),
            stderr=stderr,
            median=float(np.median(arr)),
            p25=float(np.percentile(arr, 25)),
            p75=float(np.percentile(arr, 75)),
            count=int(arr.size),
        )
    return out
