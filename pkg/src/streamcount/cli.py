"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 computation failure (including a
reference report with failing cells).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import dataset, predictor, regression, simulator
from .errors import ComputationError, TooFewObservationsError, ValidationError
from .timing import STREAM_COUNTS, overlap_sum, streamed_lower_bound, total_unstreamed

OK, INVALID, FAILED = 0, 1, 2

# tolerances for the reference report
GOMEZ_LUNA_ATOL = 0.05
TABLE_ATOL_MS = 1e-6


@dataclass
class CommandOutcome:
    exit_code: int
    text: str = ""
    document: dict | list | None = None
    errors: list[str] = field(default_factory=list)


def _ms(x: float) -> str:
    return f"{x:.6f}"


def _load_bundle(model_path: str | None) -> predictor.ModelBundle:
    if model_path is None:
        return predictor.PUBLISHED_BUNDLE
    try:
        text = Path(model_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read model bundle {model_path}: {exc.strerror}") from exc
    return predictor.ModelBundle.loads(text)


def _read(reader, path):
    try:
        return reader(path)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc


def _parse_sizes(values) -> list[int]:
    sizes = []
    for v in values:
        for part in str(v).split(","):
            part = part.strip()
            if not part:
                continue
            try:
                f = float(part)
            except ValueError:
                raise ValidationError(f"not a size: {part!r}") from None
            if not f.is_integer() or f < 1:
                raise ValidationError(f"size must be a positive integer, got {part!r}")
            sizes.append(int(f))
    return sizes


# -- commands ---------------------------------------------------------------

def cmd_fit(stage_csv, runs_csv, seed=regression.DEFAULT_SEED, out_model_path=None) -> CommandOutcome:
    stage = _read(dataset.read_stage_timings, stage_csv)
    runs = _read(dataset.read_streamed_runs, runs_csv)
    cfg = regression.SplitConfig(seed=seed)
    threshold = 10**6
    overhead = dataset.derive_overhead_rows(stage, runs)
    if not overhead:
        raise TooFewObservationsError("no runs with num_streams >= 2; nothing to fit the overhead models on")
    small = [r for r in overhead if r[0] <= threshold]
    big = [r for r in overhead if r[0] > threshold]
    fits = {
        "sum": regression.fit_sum_model(dataset.sum_rows(stage), cfg),
        "overhead_small": regression.fit_overhead_small(small, cfg),
        "overhead_big": regression.fit_overhead_big(big, cfg),
    }
    bundle = predictor.ModelBundle.from_fits(
        fits["sum"], fits["overhead_small"], fits["overhead_big"],
        size_threshold=threshold,
        provenance={
            "fitted_on": {"stage_csv": str(stage_csv), "runs_csv": str(runs_csv)},
            "seed": seed,
            "metrics": {k: {"train": f.train_metrics._asdict(), "test": f.test_metrics._asdict()}
                        for k, f in fits.items()},
        },
    )
    if out_model_path is not None:
        Path(out_model_path).write_text(bundle.dumps() + "\n", encoding="utf-8")

    lines = []
    for f in fits.values():
        coefs = ", ".join(f"{k} = {v:.16g}" for k, v in f.coefficients.items())
        lines.append(f"{f.model}: {coefs}  (train {f.n_train}, test {f.n_test}, seed {f.seed})")
        for split, m in (("train", f.train_metrics), ("test", f.test_metrics)):
            r2 = "undefined" if m.r_squared is None else f"{m.r_squared:.16f}"
            lines.append(f"  {split:5s} R^2 {r2}  MSE {m.mse:.16f}  RMSE {m.rmse:.16f}")
    if out_model_path is not None:
        lines.append(f"model written to {out_model_path}")
    doc = {"fits": [f.to_dict() for f in fits.values()], "bundle": bundle.to_document()}
    return CommandOutcome(OK, "\n".join(lines), doc)


def cmd_predict(model_path, sizes, precision="fp64") -> CommandOutcome:
    bundle = _load_bundle(model_path)
    sizes = _parse_sizes(sizes)
    if precision not in ("fp64", "fp32"):
        raise ValidationError(f"precision must be fp64 or fp32, got {precision!r}")
    lines, docs = [], []
    for size in sizes:
        rec = predictor.recommend(bundle, size)
        chosen = rec.chosen if precision == "fp64" else max(1, rec.chosen // 2)
        lines.append(f"size {size} ({rec.model_used} overhead model)")
        lines.append("      n         sum    overhead     benefit")
        for r in rec.rows:
            lines.append(f"  {r.n:5d} {_ms(r.predicted_sum):>11s} {_ms(r.predicted_overhead):>11s} {_ms(r.benefit):>11s}")
        note = "" if precision == "fp64" else f" (fp32: half of fp64 choice {rec.chosen})"
        lines.append(f"  chosen streams: {chosen}{note}")
        docs.append({**rec.to_dict(), "precision": precision, "recommended": chosen})
    return CommandOutcome(OK, "\n".join(lines), docs)


def cmd_baseline(stage_csv, tau=predictor.TAU_RTX2080TI_MS, model_path=None) -> CommandOutcome:
    stage = _read(dataset.read_stage_timings, stage_csv)
    bundle = _load_bundle(model_path)
    if not tau > 0:
        raise predictor.NonPositiveTauError(f"tau must be > 0, got {tau}")
    lines = [f"{'size':>10s} {'sum':>11s} {'baseline':>9s} {'recommended':>11s}"]
    docs = []
    for st in stage:
        s = overlap_sum(st)
        gl = predictor.gomez_luna_optimum(s, tau)
        rec = predictor.recommend(bundle, st.slae_size).chosen
        lines.append(f"{st.slae_size:>10d} {_ms(s):>11s} {gl:>9.1f} {rec:>11d}")
        docs.append({"slae_size": st.slae_size, "sum": s, "gomez_luna": gl, "recommended": rec})
    return CommandOutcome(OK, "\n".join(lines), docs)


def cmd_simulate(stage1, cpu_ms, stage3, num_streams, tau=0.0, hw_queues=simulator.HW_QUEUES,
                 trace_path=None) -> CommandOutcome:
    if num_streams not in STREAM_COUNTS:
        raise ValidationError(f"invalid stream count {num_streams}; expected one of {STREAM_COUNTS}")
    spec = simulator.PipelineSpec(tuple(stage1), cpu_ms, tuple(stage3), num_streams, tau, hw_queues)
    res = simulator.simulate(spec)
    t = spec.timings()
    bound = streamed_lower_bound(t, num_streams, num_streams * tau)
    if trace_path is not None:
        Path(trace_path).write_text(res.trace_csv(), encoding="utf-8")
    lines = [
        f"stage 1 makespan:    {_ms(res.stage1_makespan_ms)}",
        f"stage 3 makespan:    {_ms(res.stage3_makespan_ms)}",
        f"simulated total:     {_ms(res.total_ms)}",
        f"streamed model:      {_ms(bound)}",
        f"unstreamed total:    {_ms(total_unstreamed(t))}",
        f"dominance regime:    {'yes' if simulator.dominance_holds(spec) else 'no'}",
    ]
    if trace_path is not None:
        lines.append(f"trace written to {trace_path}")
    doc = {
        "total_ms": res.total_ms,
        "stage1_makespan_ms": res.stage1_makespan_ms,
        "stage3_makespan_ms": res.stage3_makespan_ms,
        "streamed_model_ms": bound,
        "unstreamed_ms": total_unstreamed(t),
        "dominance": simulator.dominance_holds(spec),
    }
    return CommandOutcome(OK, "\n".join(lines), doc)


def _cell(label, got, want, ok, cells, note=""):
    cells.append({"cell": label, "got": got, "expected": want, "status": ok})
    return f"{ok:9s} {label}: got {got}, expected {want}{note}"


def _report_table1(bundle, cells):
    lines = []
    for r in dataset.REFERENCE.table1:
        size = r.timings.slae_size
        s = overlap_sum(r.timings)
        ok = "PASS" if abs(s - r.sum_ms) <= TABLE_ATOL_MS else "FAIL"
        lines.append(_cell(f"{size} sum", _ms(s), _ms(r.sum_ms), ok, cells))
        gl = predictor.gomez_luna_optimum(s, dataset.REFERENCE.tau)
        ok = "PASS" if abs(gl - r.gomez_luna_streams) <= GOMEZ_LUNA_ATOL else "FAIL"
        lines.append(_cell(f"{size} baseline optimum", f"{gl:.3f}", f"{r.gomez_luna_streams:.1f}", ok, cells))
    return lines


def _report_table2(bundle, cells):
    lines = []
    rows = dataset.table2_rows_recomputed()
    for got, want in zip(rows, dataset.REFERENCE.table2):
        for col in ("t_overhead", "benefit"):
            g, w = getattr(got, col), getattr(want, col)
            ok = "PASS" if abs(g - w) <= TABLE_ATOL_MS else "FAIL"
            lines.append(_cell(f"n={want.num_streams} {col}", _ms(g), _ms(w), ok, cells))
    best = max(rows, key=lambda r: r.benefit).num_streams
    ok = "PASS" if best == dataset.TABLE2_BEST_STREAMS else "FAIL"
    lines.append(_cell("argmax benefit", best, dataset.TABLE2_BEST_STREAMS, ok, cells))
    return lines


def _report_table4(bundle, cells):
    lines = []
    for r in dataset.REFERENCE.table4:
        got = predictor.recommend(bundle, r.slae_size).chosen
        ok = "PASS" if got == r.n_predicted else "FAIL"
        lines.append(_cell(f"{r.slae_size} N_pre", got, r.n_predicted, ok, cells))
    return lines


def _report_table5(bundle, cells):
    lines = []
    for r in dataset.REFERENCE.table5:
        size = 10**5 if r.slae_size == "<=100000" else r.slae_size
        fp64 = predictor.recommend(bundle, size).chosen
        fp32 = max(1, fp64 // 2)
        label = f"{r.slae_size} fp32"
        if r.comparison == "same":
            status = "PASS" if fp32 == r.n_fp32 else "DEVIATION"
            lines.append(_cell(label, fp32, r.n_fp32, status, cells, "  (halving rule vs measured 'same' row)"))
        elif fp64 != r.n_fp64:
            lines.append(_cell(label, fp32, r.n_fp32, "SKIP", cells,
                               f"  (bundle picks {fp64} for fp64, measured {r.n_fp64})"))
        else:
            lines.append(_cell(label, fp32, r.n_fp32, "PASS" if fp32 == r.n_fp32 else "FAIL", cells))
    return lines


REPORTS = {
    "table1": _report_table1,
    "table2": _report_table2,
    "table4": _report_table4,
    "table5": _report_table5,
}


def cmd_report(model_path, reference) -> CommandOutcome:
    bundle = _load_bundle(model_path)
    if reference not in REPORTS:
        raise ValidationError(f"unknown reference table {reference!r}; choose from {sorted(REPORTS)}")
    cells: list[dict] = []
    lines = REPORTS[reference](bundle, cells)
    counts = {}
    for c in cells:
        counts[c["status"]] = counts.get(c["status"], 0) + 1
    n_pass, n_fail = counts.get("PASS", 0), counts.get("FAIL", 0)
    lines.append(f"{reference}: {n_pass}/{n_pass + n_fail} PASS"
                 + "".join(f", {v} {k}" for k, v in sorted(counts.items()) if k not in ("PASS", "FAIL")))
    code = FAILED if n_fail else OK
    return CommandOutcome(code, "\n".join(lines), {"reference": reference, "cells": cells, "counts": counts})


def cmd_dump_reference(out_dir=None) -> CommandOutcome:
    doc = dataset.REFERENCE.to_document()
    doc["checksum"] = dataset.REFERENCE.checksum()
    if out_dir is None:
        return CommandOutcome(OK, json.dumps(doc, indent=2), doc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "reference.json": json.dumps(doc, indent=2) + "\n",
        "table1_stage.csv": dataset.dump_stage_timings(dataset.table1_stage_table()),
        "table2_stage.csv": dataset.dump_stage_timings(
            dataset.StageTimingsTable((dataset.table2_stage_timings(),))),
        "table2_runs.csv": dataset.dump_streamed_runs(dataset.table2_runs()),
    }
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
    return CommandOutcome(OK, "\n".join(f"wrote {out / n}" for n in files), {"files": sorted(files)})


# -- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="streamcount", description="Pick the number of CUDA streams from fitted timing models.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_json(sp):
        sp.add_argument("--json", action="store_true", help="print machine-readable JSON instead of text")

    sp = sub.add_parser("fit", help="fit the sum and overhead models from timing CSVs")
    sp.add_argument("--stage-csv", required=True)
    sp.add_argument("--runs-csv", required=True)
    sp.add_argument("--seed", type=int, default=regression.DEFAULT_SEED)
    sp.add_argument("--out", help="where to write the model bundle (JSON)")
    add_json(sp)

    sp = sub.add_parser("predict", help="recommend stream counts for problem sizes")
    sp.add_argument("--model", help="model bundle; defaults to the built-in published coefficients")
    sp.add_argument("--sizes", nargs="+", required=True, help="sizes, space or comma separated")
    sp.add_argument("--precision", choices=("fp64", "fp32"), default="fp64")
    add_json(sp)

    sp = sub.add_parser("baseline", help="fixed per-stream cost baseline next to the fitted recommendation")
    sp.add_argument("--stage-csv", required=True)
    sp.add_argument("--tau", type=float, default=predictor.TAU_RTX2080TI_MS)
    sp.add_argument("--model")
    add_json(sp)

    sp = sub.add_parser("simulate", help="discrete-event run of the streamed pipeline")
    sp.add_argument("--stage1", type=float, nargs=3, metavar=("H2D", "COMP", "D2H"), required=True)
    sp.add_argument("--cpu-ms", type=float, default=0.0)
    sp.add_argument("--stage3", type=float, nargs=3, metavar=("H2D", "COMP", "D2H"), required=True)
    sp.add_argument("--num-streams", type=int, default=1)
    sp.add_argument("--tau", type=float, default=0.0)
    sp.add_argument("--hw-queues", type=int, default=simulator.HW_QUEUES)
    sp.add_argument("--out", help="write the engine trace CSV here")
    add_json(sp)

    sp = sub.add_parser("report", help="regenerate a reference table and diff it")
    sp.add_argument("--model")
    sp.add_argument("--reference", choices=sorted(REPORTS), required=True)
    add_json(sp)

    sp = sub.add_parser("dump-reference", help="print or write the embedded reference data")
    sp.add_argument("--out", help="directory for reference.json and fixture CSVs")
    add_json(sp)
    return p


def run(args: argparse.Namespace) -> CommandOutcome:
    if args.command == "fit":
        return cmd_fit(args.stage_csv, args.runs_csv, args.seed, args.out)
    if args.command == "predict":
        return cmd_predict(args.model, args.sizes, args.precision)
    if args.command == "baseline":
        return cmd_baseline(args.stage_csv, args.tau, args.model)
    if args.command == "simulate":
        return cmd_simulate(args.stage1, args.cpu_ms, args.stage3, args.num_streams, args.tau,
                            args.hw_queues, args.out)
    if args.command == "report":
        return cmd_report(args.model, args.reference)
    if args.command == "dump-reference":
        return cmd_dump_reference(args.out)
    raise ValidationError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        outcome = run(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INVALID
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILED
    if args.json:
        print(json.dumps(outcome.document, indent=2))
    elif outcome.text:
        print(outcome.text)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
