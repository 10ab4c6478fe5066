"""Render the four audio cues to WAV files and describe them.

Run:  python demos/02_cues.py   (writes ./cues/*.wav)
"""

from pathlib import Path

import numpy as np

from amico import default_cues, synthesize, write_wav

out_dir = Path("cues")
out_dir.mkdir(exist_ok=True)

for name, cue in default_cues().items():
    buf = synthesize(cue)
    contour = " -> ".join(f"{f:.0f}Hz/{d}ms" if f else f"rest/{d}ms" for f, d in cue.segments)
    peak = int(np.abs(buf.samples).max())
    path = out_dir / f"{name}.wav"
    write_wav(buf, path)
    print(f"{name:>12}: {contour}")
    print(f"{'':>12}  {len(buf)} samples @ {buf.sample_rate_hz} Hz, peak {peak} "
          f"({peak / 32767:.0%} full scale) -> {path}")

print("\nAll cues sit at 30% amplitude with 10 ms attack/release ramps,")
print("soft enough to live next to an operator all day.")
