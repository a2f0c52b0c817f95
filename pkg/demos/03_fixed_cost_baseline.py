"""
Fixed per-stream cost baseline
==============================

Charging a constant cost per created stream puts the optimum at
sqrt(sum / tau), which overshoots badly for this pipeline.
"""

from streamcount import PUBLISHED_BUNDLE, gomez_luna_optimum, recommend
from streamcount.dataset import TABLE1, TAU_MS

print("      size        sum  baseline  fitted  measured")
for row in TABLE1:
    size = row.timings.slae_size
    base = gomez_luna_optimum(row.sum_ms, TAU_MS)
    print(f"{size:10d} {row.sum_ms:10.6f} {base:9.1f} {recommend(PUBLISHED_BUNDLE, size).chosen:7d} "
          f"{row.actual_streams:9d}")
