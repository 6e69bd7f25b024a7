from conftest import line_config
from icnsim.metrics import (
    StorageParams,
    compute_metrics,
    pit_storage_bytes,
    storage_estimate,
    summary_row,
    timeseries_rows,
)
from icnsim.model import MS
from icnsim.simulator import run
from icnsim.trace import TraceLog, TraceRecord


def _config():
    return line_config("sifah", hops=1, mil=1000 * MS, duration=2_000 * MS)


def _entry_records(node, name, create, delete, reason):
    return [
        TraceRecord(create, node, "recv", name, (("from", "cons"), ("msg", "I"), ("hop", "255"))),
        TraceRecord(create, node, "pit_new", name, (("in", "cons"), ("hop_in", "255"), ("hop_out", "1"), ("out", "prod"))),
        TraceRecord(delete, node, "pit_del", name, (("reason", reason),)),
    ]


def test_pending_time_from_creation_to_deletion():
    trace = TraceLog(_entry_records("r0", "/c/seq/0", 0, 60 * MS, "ndo"))
    report = compute_metrics(trace, _config())
    assert report.avg_pit_pending_ms == 60.0
    assert report.per_router_pending_ms == {"r0": 60.0}


def test_pending_time_expiry_equals_lifetime():
    trace = TraceLog(_entry_records("r0", "/c/seq/0", 0, 1000 * MS, "expired"))
    report = compute_metrics(trace, _config())
    assert report.avg_pit_pending_ms == 1000.0
    assert report.expired_entries == 1


def test_empty_trace_has_no_averages():
    report = compute_metrics(TraceLog(), _config())
    assert report.avg_pit_pending_ms is None
    assert report.avg_pit_size is None
    assert report.rtt.avg_ms is None
    assert report.interests_generated == 0
    assert not report.partial


def test_pit_size_sampling_counts_live_entries():
    trace = TraceLog(_entry_records("r0", "/c/seq/0", 0, 250 * MS, "ndo"))
    report = compute_metrics(trace, _config())
    points = dict(report.pit_size_series["r0"])
    assert points[0] == 1 and points[100] == 1 and points[200] == 1
    assert points[300] == 0
    assert report.in_flow_routers == ["r0"]


def test_rtt_measured_from_first_emission():
    records = [
        TraceRecord(0, "cons", "gen", "/c/seq/0", (("seq", "0"), ("retx", "0"), ("msg", "I"), ("hop", "255"))),
        TraceRecord(50 * MS, "cons", "gen", "/c/seq/0", (("seq", "0"), ("retx", "1"), ("msg", "I"), ("hop", "255"))),
        TraceRecord(80 * MS, "cons", "recv", "/c/seq/0", (("from", "r0"), ("msg", "N"), ("code", "loop"))),
    ]
    report = compute_metrics(TraceLog(records), _config())
    assert report.rtt.avg_ms == 80.0
    assert report.nack_delivered["loop"] == 1


def test_live_entry_within_lifetime_is_not_partial():
    # created 1.5 s into a 2 s run: still pending at the end, trace complete
    trace = TraceLog(
        [
            TraceRecord(1_500 * MS, "r0", "recv", "/c/seq/9", (("from", "cons"), ("msg", "I"), ("hop", "255"))),
            TraceRecord(1_500 * MS, "r0", "pit_new", "/c/seq/9", (("in", "cons"), ("hop_in", "255"), ("hop_out", "1"), ("out", "prod"))),
        ]
    )
    report = compute_metrics(trace, _config())
    assert report.live_pit_entries == 1
    assert not report.partial


def test_truncated_trace_is_flagged_partial():
    result = run(_config())
    cut = TraceLog(result.trace.records[: len(result.trace.records) // 2])
    report = compute_metrics(cut, result.config)
    assert report.partial


def test_deletion_without_creation_is_partial():
    trace = TraceLog([TraceRecord(10, "r0", "pit_del", "/c/seq/0", (("reason", "ndo"),))])
    assert compute_metrics(trace, _config()).partial


def test_every_creation_matched_in_real_run():
    result = run(line_config("sifah", hops=3, rate=20.0, stop=400 * MS, duration=2_000 * MS))
    opened = closed = 0
    for rec in result.trace:
        if rec.kind == "pit_new":
            opened += 1
        elif rec.kind == "pit_del":
            closed += 1
    assert opened == closed + result.metrics.live_pit_entries


# -- Storage estimators --------------------------------------------------------


def test_per_entry_overhead_matches_savings_expression():
    params = StorageParams(int_bytes=32, id_bits=32, mh_bits=8, neighbor_count=4)
    estimate = storage_estimate(1.0, "ndn", params)
    assert estimate.savings_bytes == (32 * 4 - 8) / 8 == 15.0


def test_storage_formulas_at_thousand_entries():
    params = StorageParams(int_bytes=32, id_bits=32, mh_bits=8, neighbor_count=4)
    estimate = storage_estimate(1000.0, "ndn", params)
    assert estimate.pit_bytes_nonce == (32 + 4 * 4) * 1000 == 48_000
    assert estimate.pit_bytes_hop == (32 + 1) * 1000 == 33_000
    assert estimate.pit_bytes == estimate.pit_bytes_nonce
    assert storage_estimate(1000.0, "sifah", params).pit_bytes == 33_000


def test_storage_zero_entries():
    params = StorageParams()
    estimate = storage_estimate(0.0, "ndn", params)
    assert estimate.pit_bytes_nonce == 0 and estimate.pit_bytes_hop == 0


def test_storage_single_neighbor_equal_widths():
    params = StorageParams(int_bytes=32, id_bits=8, mh_bits=8, neighbor_count=1)
    assert pit_storage_bytes(10, "ndn", params) == pit_storage_bytes(10, "sifah", params)


def test_storage_scales_linearly():
    params = StorageParams(neighbor_count=3)
    one = storage_estimate(1.0, "ndn", params)
    many = storage_estimate(500.0, "ndn", params)
    assert many.pit_bytes == 500 * one.pit_bytes
    assert many.savings_bytes == 500 * one.savings_bytes


def test_fib_overhead_counts_hop_columns():
    params = StorageParams(mh_bits=8)
    estimate = storage_estimate(1.0, "sifah", params, fib_entry_faces=24)
    assert estimate.fib_overhead_bytes == 24.0


# -- CSV rows --------------------------------------------------------------------


def test_summary_row_is_complete_and_stable():
    from icnsim.metrics import SUMMARY_COLUMNS

    result = run(_config())
    row = summary_row(result.metrics, result.config)
    assert list(row.keys()) == SUMMARY_COLUMNS
    assert row["scenario"] == "line"
    assert row["strategy"] == "sifah"
    again = summary_row(run(_config()).metrics, result.config)
    assert row == again


def test_timeseries_rows_cover_every_sample():
    result = run(_config())
    rows = timeseries_rows(result.metrics, result.config)
    expected = sum(len(p) for p in result.metrics.pit_size_series.values())
    assert len(rows) == expected
