"""Command-line front door: encode, decode, simulate, replay.

Bits on disk are hexadecimal text, most-significant-bit-first within each
byte; pass an explicit bit count when the payload is not byte-aligned.
Exit codes: 0 success, 1 decode failure (sync or frame), 2 usage or I/O
error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .channel import ChannelConfig
from .core import BitMessage, WavError, normalize_peak, read_wav, resample, write_wav
from .harness import (
    SCHEMES,
    records_to_csv,
    replay_dataset,
    replay_report_csv,
    run_trials,
)
from .metrics import compute_ber, compute_ter


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airmodem", description="Data-over-sound modems and evaluation tools."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    scheme_kwargs = dict(choices=sorted(SCHEMES), required=True)

    enc = sub.add_parser("encode", help="modulate bits into a WAV file")
    enc.add_argument("--scheme", **scheme_kwargs)
    src = enc.add_mutually_exclusive_group(required=True)
    src.add_argument("--bits-hex", help="hex text file with the payload bits")
    src.add_argument("--random", type=int, metavar="N", help="N random payload bits")
    enc.add_argument("--seed", type=int, default=0, help="seed for --random")
    enc.add_argument("--bit-count", type=int, help="payload bit count for --bits-hex")
    enc.add_argument("--out", required=True, help="output WAV path")
    enc.add_argument("--normalize-dbfs", type=float, default=-3.0)

    dec = sub.add_parser("decode", help="demodulate a WAV file")
    dec.add_argument("--scheme", **scheme_kwargs)
    dec.add_argument("--in", dest="infile", required=True, help="input WAV path")
    dec.add_argument("--expected-bits", type=int, required=True)
    dec.add_argument("--bits-hex", help="reference hex file; prints BER/TER")

    sim = sub.add_parser("simulate", help="run seeded channel trials to CSV")
    sim.add_argument("--scheme", **scheme_kwargs)
    sim.add_argument("--channel", required=True, help="channel config text file")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--trials", type=int, default=None)
    sim.add_argument("--payload-bits", type=int, required=True)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", required=True, help="output CSV path")

    rep = sub.add_parser("replay", help="rescore recordings from a manifest")
    rep.add_argument("--manifest", required=True, help="manifest CSV path")
    rep.add_argument("--column-map", help="ours = theirs header mapping file")
    rep.add_argument("--out", required=True, help="report CSV path")
    return parser


def _read_bits_file(path, bit_count) -> BitMessage:
    with open(path, encoding="utf-8") as fh:
        return BitMessage.from_hex(fh.read(), bit_count=bit_count)


def _cmd_encode(args) -> int:
    if args.random is not None:
        rng = np.random.default_rng(args.seed)
        msg = BitMessage.random(args.random, rng)
    else:
        msg = _read_bits_file(args.bits_hex, args.bit_count)
    scheme = SCHEMES[args.scheme]
    signal = normalize_peak(scheme.encode(msg), args.normalize_dbfs)
    write_wav(signal, args.out, encoding="float32")
    print(f"wrote {args.out}: {signal.duration_s:.3f} s, {len(msg)} bits")
    return 0


def _cmd_decode(args) -> int:
    scheme = SCHEMES[args.scheme]
    signal = read_wav(args.infile)
    if signal.sample_rate_hz != scheme.sample_rate_hz:
        signal = resample(signal, scheme.sample_rate_hz)
    outcome = scheme.decode(signal, expected_bits=args.expected_bits)
    if args.bits_hex:
        reference = _read_bits_file(args.bits_hex, args.expected_bits)
        ter = compute_ter(reference, outcome)
        if outcome.ok:
            print(f"BER {compute_ber(reference, outcome.bits):.4f}")
        print(f"TER {ter:.4f}")
    elif outcome.ok:
        print(outcome.bits.to_hex())
    if not outcome.ok:
        print(
            f"{outcome.kind.replace('_', ' ')}: {outcome.diagnostics}",
            file=sys.stderr,
        )
        return 1
    return 0


def _cmd_simulate(args) -> int:
    with open(args.channel, encoding="utf-8") as fh:
        config = ChannelConfig.from_text(fh.read())
    records = run_trials(
        args.scheme,
        config,
        payload_bits=args.payload_bits,
        master_seed=args.seed,
        n=args.trials,
        workers=args.workers,
    )
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records))
    mean_ter = float(np.mean([r.ter for r in records]))
    print(f"wrote {args.out}: {len(records)} trials, mean TER {mean_ter:.4f}")
    return 0


def _cmd_replay(args) -> int:
    report = replay_dataset(args.manifest, column_map_path=args.column_map)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(replay_report_csv(report))
    scored = sum(1 for r in report if r.status == "ok")
    print(f"wrote {args.out}: {scored}/{len(report)} recordings scored")
    return 0


_COMMANDS = {
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "simulate": _cmd_simulate,
    "replay": _cmd_replay,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError, WavError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
