"""
Fitting the models from timing tables
=====================================

Builds a noisy synthetic measurement grid, writes it in the two CSV formats,
fits the sum and overhead models and compares the recommendations.
"""

import tempfile
from pathlib import Path

import numpy as np

from streamcount import PUBLISHED_BUNDLE, cli, recommend
from streamcount.predictor import ModelBundle, predict_overhead, predict_sum

rng = np.random.default_rng(0)
sizes = [int(m * 10**e) for e in range(3, 8) for m in (1, 2.5, 4, 5, 7.5, 8)]

# Stage timings: split the published sum prediction across the four overlapped
# operations and add the non-overlapped ones.
stage_lines = ["slae_size,t1_h2d,t1_comp,t1_d2h,t2_comp,t3_h2d,t3_comp,t3_d2h"]
run_lines = ["slae_size,num_streams,t_str"]
for size in sizes:
    s = predict_sum(PUBLISHED_BUNDLE, size) * float(rng.normal(1, 0.01))
    parts = [float(p) for p in np.array([0.25, 0.40, 0.10, 0.25]) * s]
    t1_h2d, t2, t3_d2h = 0.45 * s, 0.05 * s + 0.2, 0.45 * s
    stage_lines.append(",".join(map(repr, [size, t1_h2d, *parts[:2], t2, *parts[2:], t3_d2h])))
    t_non = t1_h2d + t2 + t3_d2h + sum(parts)
    for n in (1, 2, 4, 8, 16, 32):
        ov = 0.0 if n == 1 else predict_overhead(PUBLISHED_BUNDLE, size, n) + float(rng.normal(0, 0.02))
        run_lines.append(f"{size},{n},{t_non - (n - 1) / n * sum(parts) + ov!r}")

work = Path(tempfile.mkdtemp())
(work / "stage.csv").write_text("\n".join(stage_lines) + "\n")
(work / "runs.csv").write_text("\n".join(run_lines) + "\n")

outcome = cli.cmd_fit(work / "stage.csv", work / "runs.csv", seed=42, out_model_path=work / "model.json")
print(outcome.text)

fitted = ModelBundle.loads((work / "model.json").read_text())
print("\n      size  published  fitted")
for size in (10**4, 10**5, 5 * 10**5, 10**6, 10**7):
    print(f"{size:10d} {recommend(PUBLISHED_BUNDLE, size).chosen:10d} {recommend(fitted, size).chosen:7d}")
