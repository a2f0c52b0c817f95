import io

import pytest
from hypothesis import given, settings, strategies as st

from streamcount import dataset as D
from streamcount.errors import (
    DuplicateSizeError,
    InvalidStreamCountError,
    MalformedRowError,
    MissingStageTimingsError,
    NegativeDurationError,
)
from streamcount.timing import STAGE_FIELDS, StageTimings, StreamedRun

STAGE_HDR = "slae_size,t1_h2d,t1_comp,t1_d2h,t2_comp,t3_h2d,t3_comp,t3_d2h\n"
RUNS_HDR = "slae_size,num_streams,t_str\n"

# sha256 of the canonical JSON of the embedded reference tables, pinned at transcription
REFERENCE_SHA256 = "deea9967d81a7e267493314b1e5d4437c815c15ac73cdf09435ca695b13e93f6"


def test_reference_checksum():
    assert D.REFERENCE.checksum() == REFERENCE_SHA256


def test_reference_shapes():
    ref = D.REFERENCE
    assert len(ref.table1) == 5 and len(ref.table2) == 5
    assert len(ref.table4) == 25 and len(ref.table5) == 17
    assert ref.tau == 0.004448
    assert [r.slae_size for r in ref.table4] == sorted(r.slae_size for r in ref.table4)


def test_load_one_row():
    table = D.load_stage_timings((STAGE_HDR + "1000,1,2,3,4,5,6,7\n").encode())
    assert len(table) == 1
    assert table.rows[0] == StageTimings(1000, 1, 2, 3, 4, 5, 6, 7)


def test_load_sorts_and_handles_crlf_and_bom():
    text = "\ufeff" + STAGE_HDR.replace("\n", "\r\n") + "2000,1,1,1,1,1,1,1\r\n1000,0,0,0,0,0,0,0\r\n"
    table = D.load_stage_timings(text.encode("utf-8"))
    assert [r.slae_size for r in table] == [1000, 2000]


def test_duplicate_size():
    src = STAGE_HDR + "1000,1,2,3,4,5,6,7\n1000,1,2,3,4,5,6,7\n"
    with pytest.raises(DuplicateSizeError, match="1000"):
        D.load_stage_timings(src.encode())


def test_negative_duration():
    src = STAGE_HDR + "1000,1,-1.0,3,4,5,6,7\n"
    with pytest.raises(NegativeDurationError) as exc:
        D.load_stage_timings(src.encode())
    assert exc.value.field == "t1_comp" and exc.value.line == 2


@pytest.mark.parametrize(
    "body, column",
    [("1000,1,x,3,4,5,6,7\n", "t1_comp"), ("1000,1,2\n", "*"), ("abc,1,2,3,4,5,6,7\n", "slae_size")],
)
def test_malformed_rows(body, column):
    with pytest.raises(MalformedRowError) as exc:
        D.load_stage_timings((STAGE_HDR + body).encode())
    assert exc.value.line == 2 and exc.value.column == column


def test_bad_header():
    with pytest.raises(MalformedRowError) as exc:
        D.load_stage_timings(b"size,a,b\n")
    assert exc.value.line == 1


def test_runs_invalid_stream_count():
    with pytest.raises(InvalidStreamCountError) as exc:
        D.load_streamed_runs((RUNS_HDR + "1000,3,1.0\n").encode())
    assert exc.value.n == 3 and exc.value.line == 2


def test_runs_table2():
    table = D.load_streamed_runs(D.dump_streamed_runs(D.table2_runs()).encode())
    assert len(table) == 5


def test_runs_empty_body():
    assert len(D.load_streamed_runs(RUNS_HDR.encode())) == 0


def test_runs_malformed_and_duplicate():
    with pytest.raises(MalformedRowError):
        D.load_streamed_runs((RUNS_HDR + "1000,two,1.0\n").encode())
    with pytest.raises(DuplicateSizeError):
        D.load_streamed_runs((RUNS_HDR + "1000,2,1.0\n1000,2,1.5\n").encode())


def test_reads_from_file_objects(tmp_path):
    p = tmp_path / "stage.csv"
    p.write_text(STAGE_HDR + "1000,1,2,3,4,5,6,7\n")
    assert len(D.read_stage_timings(p)) == 1
    with open(p, "rb") as fh:
        assert len(D.load_stage_timings(fh)) == 1
    assert len(D.load_stage_timings(io.BytesIO(p.read_bytes()))) == 1


durations = st.floats(min_value=0, max_value=1e6, allow_nan=False)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(1, 10**9), *[durations] * 7), max_size=20, unique_by=lambda r: r[0]))
def test_stage_round_trip(rows):
    table = D.StageTimingsTable(tuple(StageTimings(*r) for r in rows))
    again = D.load_stage_timings(D.dump_stage_timings(table).encode())
    assert again == table


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(1, 10**9), st.sampled_from([1, 2, 4, 8, 16, 32]), durations),
                max_size=20, unique_by=lambda r: r[:2]))
def test_runs_round_trip(rows):
    table = D.StreamedRunTable(tuple(StreamedRun(*r) for r in rows))
    assert D.load_streamed_runs(D.dump_streamed_runs(table).encode()) == table


def test_derive_overhead_rows_table2():
    stage = D.StageTimingsTable((D.table2_stage_timings(),))
    rows = D.derive_overhead_rows(stage, D.table2_runs())
    assert [r[1] for r in rows] == [2, 4, 8, 16, 32]
    assert [r[2] for r in rows] == pytest.approx([0.398480, 0.540984, 0.713404, 0.909982, 1.140047], abs=1e-6)


def test_derive_overhead_missing_size():
    stage = D.StageTimingsTable((D.table2_stage_timings(),))
    runs = D.StreamedRunTable((StreamedRun(5, 2, 1.0),))
    with pytest.raises(MissingStageTimingsError, match="5"):
        D.derive_overhead_rows(stage, runs)


def test_derive_overhead_skips_single_stream():
    st_ = D.table2_stage_timings()
    stage = D.StageTimingsTable((st_,))
    runs = D.StreamedRunTable(D.table2_runs().rows + (StreamedRun(st_.slae_size, 1, 8.8),))
    assert len(D.derive_overhead_rows(stage, runs)) == 5
    assert D.unstreamed_consistency(stage, runs) == [(st_.slae_size, 8.8, pytest.approx(8.817440))]


def test_table1_stage_table_zero_fills_unpublished():
    table = D.table1_stage_table()
    assert [r.slae_size for r in table] == [4000, 40000, 400000, 4000000, 40000000]
    assert all(r.t1_h2d == r.t2_comp == r.t3_d2h == 0.0 for r in table)


def test_table2_recomputed_matches_transcription():
    for got, want in zip(D.table2_rows_recomputed(), D.TABLE2):
        assert got.t_overhead == pytest.approx(want.t_overhead, abs=1e-6)
        assert got.benefit == pytest.approx(want.benefit, abs=1e-6)


def test_stage_fields_order():
    assert D.STAGE_HEADER[1:] == STAGE_FIELDS
