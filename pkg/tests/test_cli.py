import json
from dataclasses import replace

import pytest

from streamcount import cli, dataset, predictor, regression
from streamcount.timing import STREAM_COUNTS

SUM = (2.5e-6, 0.12)
SMALL = (2.0e-7, 0.55, -0.05)
BIG = (4.0e-8, 0.06, 0.4)
SMALL_SIZES = [1_000, 4_000, 10_000, 40_000, 100_000, 250_000, 400_000, 700_000, 1_000_000]
BIG_SIZES = [2_000_000, 4_000_000, 8_000_000, 10_000_000, 25_000_000, 50_000_000, 80_000_000, 100_000_000]


def synthetic_csvs(tmp_path, streams=STREAM_COUNTS):
    """Noiseless stage and run tables generated forward from known coefficients."""
    stage_rows, run_rows = [], []
    for size in SMALL_SIZES + BIG_SIZES:
        s = regression.sum_model(size, *SUM)
        t1_h2d, t2, t3_d2h = 0.4 * s, 0.1 * s + 0.3, 0.35 * s
        st = (size, t1_h2d, 0.3 * s, 0.2 * s, t2, 0.1 * s, 0.4 * s, t3_d2h)
        stage_rows.append(st)
        t_non = sum(st[1:])
        s_fields = 0.3 * s + 0.2 * s + 0.1 * s + 0.4 * s
        for n in streams:
            if n == 1:
                ov = 0.0
            elif size <= 10**6:
                ov = regression.overhead_small_model(size, n, *SMALL)
            else:
                ov = regression.overhead_big_model(size, n, *BIG)
            run_rows.append((size, n, t_non - (n - 1) / n * s_fields + ov))
    stage = tmp_path / "stage.csv"
    runs = tmp_path / "runs.csv"
    stage.write_text(",".join(dataset.STAGE_HEADER) + "\n"
                     + "".join(",".join(repr(v) for v in r) + "\n" for r in stage_rows))
    runs.write_text("slae_size,num_streams,t_str\n" + "".join(f"{a},{b},{c!r}\n" for a, b, c in run_rows))
    return stage, runs


def test_fit_recovers_generator(tmp_path, capsys):
    stage, runs = synthetic_csvs(tmp_path)
    out = tmp_path / "model.json"
    assert cli.main(["fit", "--stage-csv", str(stage), "--runs-csv", str(runs), "--out", str(out)]) == 0
    bundle = predictor.ModelBundle.loads(out.read_text())
    got = (bundle.sum_a, bundle.sum_b, bundle.small_a, bundle.small_b, bundle.small_c,
           bundle.big_a, bundle.big_b, bundle.big_c)
    for g, w in zip(got, SUM + SMALL + BIG):
        assert g == pytest.approx(w, rel=1e-9)
    assert bundle.provenance["seed"] == 42
    assert set(bundle.provenance["metrics"]) == {"sum", "overhead_small", "overhead_big"}
    text = capsys.readouterr().out
    assert "overhead_small" in text and "R^2" in text


def test_fit_seed_recorded(tmp_path):
    stage, runs = synthetic_csvs(tmp_path)
    outcome = cli.cmd_fit(stage, runs, seed=7)
    assert all(f["seed"] == 7 for f in outcome.document["fits"])


def test_fit_missing_file(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert cli.main(["fit", "--stage-csv", str(missing), "--runs-csv", str(missing)]) == 1
    assert str(missing) in capsys.readouterr().err


def test_fit_single_stream_only(tmp_path):
    stage, runs = synthetic_csvs(tmp_path, streams=(1,))
    assert cli.main(["fit", "--stage-csv", str(stage), "--runs-csv", str(runs)]) == 2


def test_fit_invalid_csv(tmp_path):
    stage, runs = synthetic_csvs(tmp_path)
    runs.write_text("slae_size,num_streams,t_str\n1000,3,1.0\n")
    assert cli.main(["fit", "--stage-csv", str(stage), "--runs-csv", str(runs)]) == 1


def test_predict_matches_library(capsys):
    sizes = [r.slae_size for r in dataset.TABLE4]
    assert cli.main(["predict", "--sizes", ",".join(map(str, sizes)), "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [d["recommended"] for d in doc] == [predictor.recommend(predictor.PUBLISHED_BUNDLE, s).chosen
                                              for s in sizes]


def test_predict_fp32_and_small(capsys):
    assert cli.main(["predict", "--sizes", "1e6", "--precision", "fp32", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["recommended"] == 4
    assert cli.main(["predict", "--sizes", "1000"]) == 0
    assert "chosen streams: 1" in capsys.readouterr().out


def test_predict_json_values_bit_identical(capsys):
    cli.main(["predict", "--sizes", "1000000", "--json"])
    doc = json.loads(capsys.readouterr().out)[0]
    rec = predictor.recommend(predictor.PUBLISHED_BUNDLE, 10**6)
    assert [r["benefit"] for r in doc["rows"]] == [r.benefit for r in rec.rows]


def test_predict_malformed_bundle(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"sum": 3}')
    assert cli.main(["predict", "--model", str(bad), "--sizes", "1000"]) == 1


def test_predict_uses_bundle_file(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text(replace(predictor.PUBLISHED_BUNDLE, candidates=(2, 4)).dumps())
    cli.main(["predict", "--model", str(path), "--sizes", "10000000", "--json"])
    assert json.loads(capsys.readouterr().out)[0]["recommended"] == 4


def test_baseline_table1(tmp_path, capsys):
    path = tmp_path / "t1.csv"
    path.write_text(dataset.dump_stage_timings(dataset.table1_stage_table()))
    assert cli.main(["baseline", "--stage-csv", str(path), "--tau", "0.004448", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [d["gomez_luna"] for d in doc] == pytest.approx([7.8, 8.6, 15.8, 45.0, 139.8], abs=0.05)
    assert cli.main(["baseline", "--stage-csv", str(path)]) == 0
    assert "139.8" in capsys.readouterr().out


def test_baseline_zero_tau(tmp_path):
    path = tmp_path / "t1.csv"
    path.write_text(dataset.dump_stage_timings(dataset.table1_stage_table()))
    assert cli.main(["baseline", "--stage-csv", str(path), "--tau", "0"]) == 2


def test_baseline_empty(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text(",".join(dataset.STAGE_HEADER) + "\n")
    assert cli.main(["baseline", "--stage-csv", str(path), "--json"]) == 0
    assert json.loads(capsys.readouterr().out) == []


def test_simulate_single_stream(capsys):
    args = ["simulate", "--stage1", "1", "2", "3", "--cpu-ms", "4", "--stage3", "5", "6", "7", "--json"]
    assert cli.main(args) == 0
    assert json.loads(capsys.readouterr().out)["total_ms"] == pytest.approx(28.0)


def test_simulate_dominance_matches_model(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    args = ["simulate", "--stage1", "3", "1", "0.5", "--cpu-ms", "2", "--stage3", "0.2", "1", "3",
            "--num-streams", "8", "--out", str(trace), "--json"]
    assert cli.main(args) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["dominance"] is True
    assert doc["total_ms"] == pytest.approx(doc["streamed_model_ms"], rel=1e-12)
    assert trace.read_text().startswith("engine,stream,start_ms,end_ms")


def test_simulate_bad_streams():
    assert cli.main(["simulate", "--stage1", "1", "1", "1", "--stage3", "1", "1", "1", "--num-streams", "3"]) == 1


def test_report_table2(capsys):
    assert cli.main(["report", "--reference", "table2"]) == 0
    assert "table2: 11/11 PASS" in capsys.readouterr().out


def test_report_table1(capsys):
    assert cli.main(["report", "--reference", "table1"]) == 0
    assert "table1: 10/10 PASS" in capsys.readouterr().out


def test_report_table4_published(capsys):
    # published coefficients disagree with the transcribed N_pre only at 8e4
    code = cli.main(["report", "--reference", "table4", "--json"])
    doc = json.loads(capsys.readouterr().out)
    failing = [c["cell"] for c in doc["cells"] if c["status"] == "FAIL"]
    assert failing == ["80000 N_pre"]
    assert code == 2


def test_report_table4_perturbed(tmp_path, capsys):
    path = tmp_path / "m.json"
    b = predictor.PUBLISHED_BUNDLE
    path.write_text(replace(b, sum_b=b.sum_b + 1.0).dumps())
    assert cli.main(["report", "--model", str(path), "--reference", "table4"]) == 2
    out = capsys.readouterr().out
    assert out.count("FAIL") > 1


def test_report_table5_measured_bundle(tmp_path, capsys, measured_fp64_bundle):
    path = tmp_path / "m.json"
    path.write_text(measured_fp64_bundle.dumps())
    assert cli.main(["report", "--model", str(path), "--reference", "table5", "--json"]) == 0
    counts = json.loads(capsys.readouterr().out)["counts"]
    assert counts["PASS"] == 8 and counts["DEVIATION"] == 9 and "FAIL" not in counts


def test_dump_reference(tmp_path, capsys):
    assert cli.main(["dump-reference", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["checksum"] == dataset.REFERENCE.checksum()
    assert cli.main(["dump-reference", "--out", str(tmp_path)]) == 0
    stage = dataset.read_stage_timings(tmp_path / "table2_stage.csv")
    runs = dataset.read_streamed_runs(tmp_path / "table2_runs.csv")
    ov = [r[2] for r in dataset.derive_overhead_rows(stage, runs)]
    assert ov == pytest.approx([r.t_overhead for r in dataset.TABLE2], abs=1e-6)
    assert len(dataset.read_stage_timings(tmp_path / "table1_stage.csv")) == 5
