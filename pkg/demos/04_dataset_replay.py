"""Rescoring a recorded dataset from a manifest.

replay_dataset takes a CSV manifest naming WAV recordings with their
transmitted bits (hex) and a reference BER, decodes each recording with
the named scheme, and reports the delta between the measured and the
reference BER. Missing files are flagged per row instead of aborting.

Here the "dataset" is generated locally: clean and noisy recordings plus
one deliberately missing file.
"""

import csv
import pathlib
import tempfile

import numpy as np

from airmodem import (
    SCHEMES,
    BitMessage,
    ChannelConfig,
    apply_channel,
    normalize_peak,
    replay_dataset,
    replay_report_csv,
    write_wav,
)

with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    rows = []
    for seed, (name, snr_db) in enumerate(
        [("lee", None), ("lee", 5.0), ("nearby", 25.0), ("priwhisper", 30.0)]
    ):
        scheme = SCHEMES[name]
        rng = np.random.default_rng(seed)
        n_bits = scheme.capacity_bits(16)
        message = BitMessage.random(n_bits, rng)
        tx = normalize_peak(scheme.encode(message))
        rx = apply_channel(tx, ChannelConfig(snr_db=snr_db, seed=seed))
        wav = tmp / f"rec_{seed}.wav"
        write_wav(rx, str(wav), encoding="float32")
        rows.append(
            {"wav": str(wav), "scheme": name, "bits_hex": message.to_hex(),
             "n_bits": n_bits, "ber": "0"}
        )
    rows.append(
        {"wav": str(tmp / "lost.wav"), "scheme": "lee",
         "bits_hex": "beef", "n_bits": 16, "ber": "0.1"}
    )

    manifest = tmp / "manifest.csv"
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["wav", "scheme", "bits_hex", "n_bits", "ber"]
        )
        writer.writeheader()
        writer.writerows(rows)

    report = replay_dataset(manifest)
    print(replay_report_csv(report))
    ok = sum(1 for r in report if r.status == "ok")
    print(f"scored {ok}/{len(report)} recordings")
