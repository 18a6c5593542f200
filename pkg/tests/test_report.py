import csv
import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ilprefine import RunRecord, report_performance
from ilprefine.report import (
    TIMED_OUT_RATIO,
    geometric_mean,
    read_records_jsonl,
    records_to_csv,
    write_records_jsonl,
)


def rec(instance, strategy, time_s, cut=10.0, status="Optimal", k=2, eps=0.0):
    return RunRecord(instance, k, eps, strategy, cut + 1, cut, True, status, time_s, 1)


def test_single_strategy_all_ones():
    report = report_performance([rec("a", "s", 3.0), rec("b", "s", 0.2, cut=4)])
    assert report.time_ratios == {"s": [1.0, 1.0]}
    assert report.cut_ratios == {"s": [1.0, 1.0]}


def test_two_strategies():
    report = report_performance([rec("a", "fast", 1.0), rec("a", "slow", 2.0)])
    assert report.time_ratios["fast"] == [1.0]
    assert report.time_ratios["slow"] == [0.5]


def test_timeout_is_negative():
    records = [rec("a", "x", 1.0), rec("a", "y", 60.0, status="FeasibleTimeLimit")]
    report = report_performance(records)
    assert report.time_ratios["y"] == [TIMED_OUT_RATIO] == [-1.0]
    assert report.time_ratios["x"] == [1.0]
    rows = list(csv.DictReader(io.StringIO(report.to_csv())))
    assert {"strategy": "y", "metric": "time_ratio", "rank": "0", "value": "-1.0"} in rows


def test_cut_ratios_and_zero_cuts():
    records = [rec("a", "x", 1.0, cut=8), rec("a", "y", 1.0, cut=10), rec("b", "x", 1.0, cut=0), rec("b", "y", 1.0, cut=0)]
    report = report_performance(records)
    assert report.cut_ratios["y"] == [0.8, 1.0]
    assert report.cut_ratios["x"] == [1.0, 1.0]
    assert report.geomean_cut["x"] == 0.0


def test_geometric_mean_hand_values():
    assert abs(geometric_mean([1.0, 2.0, 4.0]) - 2.0) <= 1e-12
    assert abs(geometric_mean([2.0, 8.0]) - 4.0) <= 1e-12
    assert abs(geometric_mean([3.0]) - 3.0) <= 1e-12
    assert geometric_mean([5.0, 0.0]) == 0.0
    with pytest.raises(ValueError):
        geometric_mean([])


def test_geomeans_in_report():
    records = [rec("a", "s", 1.0, cut=2), rec("b", "s", 4.0, cut=8)]
    report = report_performance(records)
    assert abs(report.geomean_time["s"] - 2.0) <= 1e-12
    assert abs(report.geomean_cut["s"] - 4.0) <= 1e-12


def test_repeated_runs_are_averaged():
    records = [rec("a", "x", 1.0), rec("a", "x", 3.0), rec("a", "y", 4.0)]
    report = report_performance(records)
    assert report.time_ratios["x"] == [1.0]
    assert report.time_ratios["y"] == [0.5]


def test_instances_distinguished_by_k_and_eps():
    records = [rec("a", "x", 1.0, k=2), rec("a", "y", 2.0, k=4), rec("a", "x", 1.0, eps=0.03)]
    report = report_performance(records)
    assert report.time_ratios["x"] == [1.0, 1.0]
    assert report.time_ratios["y"] == [1.0]


@given(st.lists(st.tuples(st.integers(0, 5), st.sampled_from("xyz"), st.floats(0.01, 100)), min_size=1, max_size=40))
@settings(max_examples=80, deadline=None)
def test_ratios_sorted_and_bounded(entries):
    report = report_performance([rec(f"i{i}", s, t) for i, s, t in entries])
    for values in report.time_ratios.values():
        assert values == sorted(values)
        assert all(0 < v <= 1.0 + 1e-12 for v in values)
        assert any(math.isclose(v, 1.0) for v in values) or len(report.time_ratios) > 1


def test_record_files(tmp_path):
    path = tmp_path / "runs.jsonl"
    records = [rec("a", "x", 1.0), rec("b", "y", 2.0, status="Skipped")]
    write_records_jsonl(records[:1], path)
    write_records_jsonl(records[1:], path)
    assert read_records_jsonl(path) == records
    text = records_to_csv(records)
    assert text.splitlines()[0] == "instance,k,eps,strategy,input_cut,output_cut,improved,status,time_s,nodes"
    assert len(text.splitlines()) == 3
