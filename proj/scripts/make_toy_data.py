#!/usr/bin/env python3
"""Generate the bundled toy corpus under data/toy.

Twelve short mono clips (three of them marked as multi-event), a JSONL
manifest, and a synthetic HRIR set with interaural time and level
differences. Output is deterministic.
"""

import argparse
import json
from pathlib import Path

import numpy as np
from scipy.io import wavfile

RATE = 16000
LABELS = [
    "dog barking", "car engine", "footsteps", "bird chirping", "door knock", "speech",
    "siren", "telephone ringing", "cat meowing", "water running", "helicopter", "bell ringing",
]


def event_signal(rng, label_index, n):
    t = np.arange(n) / RATE
    f0 = 220.0 * 2 ** (label_index / 6)
    tone = np.sin(2 * np.pi * f0 * t + 0.5 * np.sin(2 * np.pi * 3 * t))
    noise = rng.standard_normal(n)
    noise = np.convolve(noise, np.ones(8) / 8, mode="same")
    pulses = 0.5 + 0.5 * np.sign(np.sin(2 * np.pi * (2 + label_index % 4) * t))
    return 0.6 * tone * pulses + 0.2 * noise


def write_clips(out, rng):
    rows = []
    for i in range(12):
        duration = 2.0 + 0.5 * (i % 4)
        n = int(round(duration * RATE))
        onset = round(0.1 * (i % 5), 2)
        offset = round(duration - 0.2 * (i % 3), 2)
        audio = 0.01 * rng.standard_normal(n)
        a, b = int(onset * RATE), int(offset * RATE)
        audio[a:b] += event_signal(rng, i, b - a)
        multi = i in (2, 6, 10)
        if multi:
            c = (a + b) // 2
            audio[c:b] += 0.5 * event_signal(rng, (i + 5) % 12, b - c)
        pcm = np.clip(audio * 0.7, -1, 1)
        name = f"clips/toy_{i:02d}.wav"
        wavfile.write(out / name, RATE, (pcm * 32767).astype(np.int16))
        rows.append({
            "id": f"toy_{i:02d}",
            "audio": name,
            "label": LABELS[i],
            "onset_s": onset,
            "offset_s": offset,
            "num_events": 2 if multi else 1,
        })
    with open(out / "manifest.jsonl", "w") as f:
        for row in rows:
            f.write(json.dumps(row) + "\n")


def hrir_pair(az, el, taps):
    lateral = np.sin(np.radians(az)) * np.cos(np.radians(el))
    far_delay = int(round(abs(lateral) * 0.00066 * RATE))
    near_gain, far_gain = 1.0 + 0.3 * abs(lateral), 1.0 - 0.5 * abs(lateral)
    tail = 0.6 ** np.arange(taps) * np.where(np.arange(taps) % 2, -0.3, 1.0)
    # Elevation tilts the spectrum slightly so that up and down differ.
    tail = tail * (1.0 + 0.2 * np.sin(np.radians(el)) * np.cos(np.arange(taps)))

    def place(delay, gain):
        ir = np.zeros(taps)
        ir[delay:] = gain * tail[: taps - delay]
        return ir

    if lateral >= 0:  # source on the right: left ear is the far ear
        return place(far_delay, far_gain), place(0, near_gain)
    return place(0, near_gain), place(far_delay, far_gain)


def write_hrirs(out, taps):
    irs = []
    grid = [(az, el) for el in (-60, -30, 0, 30, 60) for az in range(-180, 180, 30)]
    grid += [(0, 90), (0, -90)]
    for i, (az, el) in enumerate(grid):
        left, right = hrir_pair(az, el, taps)
        name = f"ir_{i:03d}.wav"
        wavfile.write(out / name, RATE, np.stack([left, right], axis=1).astype(np.float32))
        irs.append({"azimuth_deg": az, "elevation_deg": el, "file": name})
    with open(out / "manifest.json", "w") as f:
        json.dump({"sample_rate_hz": RATE, "irs": irs}, f, indent=2)
        f.write("\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "toy")
    parser.add_argument("--taps", type=int, default=64)
    parser.add_argument("--seed", type=int, default=2025)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    (args.out / "clips").mkdir(parents=True, exist_ok=True)
    (args.out / "hrir").mkdir(parents=True, exist_ok=True)
    write_clips(args.out, rng)
    write_hrirs(args.out / "hrir", args.taps)


if __name__ == "__main__":
    main()
