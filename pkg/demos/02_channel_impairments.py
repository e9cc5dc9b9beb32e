"""What an indoor acoustic channel does to a transmission.

The channel simulator composes impairments in the physical order a
signal meets them: room echoes (impulse-response convolution), the
speaker/microphone frequency tilt, clipping, clap-like noise bursts, and
stationary noise at a chosen SNR. Everything is seeded, so a run is
exactly repeatable.

This script sends one message per scheme through increasingly hostile
channels and prints the decode outcome for each.
"""

import numpy as np

from airmodem import (
    SCHEMES,
    BitMessage,
    BurstSpec,
    ChannelConfig,
    apply_channel,
    normalize_peak,
    synth_rir,
)

conditions = {
    "identity": ChannelConfig(),
    "30 dB noise": ChannelConfig(snr_db=30.0),
    "10 dB noise": ChannelConfig(snr_db=10.0),
    "20 ms echoes + 20 dB": ChannelConfig(snr_db=20.0, rir=synth_rir(20.0, 12, 99)),
    "tilted speaker -12 dB": ChannelConfig(tilt=((9000.0, 0.0), (20000.0, -12.0))),
    "clipping at 0.3": ChannelConfig(clip_level=0.3),
    "claps every 0.5 s": ChannelConfig(
        snr_db=25.0, bursts=BurstSpec(0.5, 0.05, -8.0)
    ),
}

rng = np.random.default_rng(11)
print(f"{'channel':24s}" + "".join(f"{n:>14s}" for n in SCHEMES))
for label, config in conditions.items():
    row = []
    for name, scheme in SCHEMES.items():
        n_bits = scheme.capacity_bits(16)
        message = BitMessage.random(n_bits, rng)
        tx = normalize_peak(scheme.encode(message))
        rx = apply_channel(tx, config)
        outcome = scheme.decode(rx, expected_bits=n_bits)
        if outcome.ok:
            errors = int(np.sum(outcome.bits.bits != message.bits))
            row.append("exact" if errors == 0 else f"{errors} bit err")
        else:
            row.append(outcome.kind)
    print(f"{label:24s}" + "".join(f"{c:>14s}" for c in row))
