"""
Stream counts from the published RTX 2080 Ti models
===================================================

Walks through the benefit table behind each recommendation.
"""

from streamcount import PUBLISHED_BUNDLE, recommend, recommend_fp32
from streamcount.dataset import TABLE4

# One size in detail. The saving of n streams is the part of the overlapped
# work that streaming hides, (n - 1) / n * sum, minus the stream overhead.
rec = recommend(PUBLISHED_BUNDLE, 10**6)
print(f"size {rec.slae_size}, {rec.model_used} overhead model")
print("   n        sum   overhead    benefit")
for r in rec.rows:
    print(f"{r.n:4d} {r.predicted_sum:10.6f} {r.predicted_overhead:10.6f} {r.benefit:10.6f}")
print("chosen:", rec.chosen)

# Every reference size, next to the measured optimum.
print("\n      size  measured  fp64  fp32")
for row in TABLE4:
    fp64 = recommend(PUBLISHED_BUNDLE, row.slae_size).chosen
    fp32 = recommend_fp32(PUBLISHED_BUNDLE, row.slae_size)
    flag = "" if fp64 == row.n_actual else "  <- differs from measurement"
    print(f"{row.slae_size:10d} {row.n_actual:9d} {fp64:5d} {fp32:5d}{flag}")
