import numpy as np
import pytest

from sage.core.errors import SageError, all_error_classes
from sage.core.intervals import labels_to_segments, merge_intervals, rasterize
from sage.core.types import (AnomalyFamily, AnomalyRecord, AnomalyType, Dataset, Interval, Series,
                             family_types, sort_records)


def test_taxonomy_families():
    assert len(AnomalyFamily) == 4
    assert family_types(AnomalyFamily.POINT) == (AnomalyType.GLOBAL_POINT, AnomalyType.CONTEXTUAL_POINT)
    assert family_types(AnomalyFamily.SEASONAL) == (AnomalyType.AMPLITUDE_CHANGE, AnomalyType.SEASONALITY_ANOMALY)
    assert family_types(AnomalyFamily.STRUCTURAL) == (
        AnomalyType.TREND_CHANGE, AnomalyType.MEAN_CHANGE_POINT, AnomalyType.VARIANCE_CHANGE)
    assert family_types(AnomalyFamily.PATTERN) == (AnomalyType.PATTERN_SHIFT, AnomalyType.WAVEFORM_DISTORTION)


@pytest.mark.parametrize('intervals, gap, expected', [
    ([], 2, []),
    ([(3, 5), (7, 9)], 2, [(3, 9)]),
    ([(0, 0), (10, 12), (13, 13)], 0, [(0, 0), (10, 13)]),
    ([(7, 9), (3, 5)], 1, [(3, 5), (7, 9)]),
    ([(0, 10), (2, 3)], 0, [(0, 10)]),
])
def test_merge_intervals(intervals, gap, expected):
    assert merge_intervals(intervals, gap) == [Interval(*e) for e in expected]


def test_merge_intervals_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(100):
        gap = int(rng.integers(0, 4))
        raw = [tuple(sorted(rng.integers(0, 60, 2))) for _ in range(rng.integers(0, 8))]
        merged = merge_intervals(raw, gap)
        assert merge_intervals(merged, gap) == merged
        covered = rasterize(raw, 60)
        # bridging only ever adds points, and never between intervals farther apart than gap
        assert np.all(rasterize(merged, 60) >= covered)
        for a, b in zip(merged, merged[1:]):
            assert b.start - a.end - 1 > gap


@pytest.mark.parametrize('labels, expected', [
    ([0, 0, 0], []),
    ([1, 1, 0, 1], [(0, 1), (3, 3)]),
    ([1] * 5, [(0, 4)]),
])
def test_labels_to_segments(labels, expected):
    segments = labels_to_segments(labels)
    assert segments == [Interval(*e) for e in expected]
    assert rasterize(segments, len(labels)).tolist() == labels


def test_series_is_read_only_and_validated():
    s = Series(values=[1.0, 2.0, 3.0], labels=[0, 1, 0], id='s')
    with pytest.raises(ValueError):
        s.values[0] = 5.0
    with pytest.raises(AssertionError):
        Series(values=[1.0, 2.0], labels=[0, 2])
    with pytest.raises(AssertionError):
        Series(values=[1.0, 2.0], timestamps=[1])
    part = s.slice(1, 3)
    assert part.values.tolist() == [2.0, 3.0]
    assert part.labels.tolist() == [1, 0]


def test_dataset_rejects_duplicate_ids():
    with pytest.raises(AssertionError):
        Dataset(name='d', series=(Series(values=[1.0], id='a'), Series(values=[2.0], id='a')))


def test_record_json_round_trip_and_confidence():
    record = AnomalyRecord(start=10, end=12, raw_score=80, types=(6, 7), evidence='shift')
    assert record.confidence == 0.8
    assert record.families == (AnomalyFamily.STRUCTURAL,)
    data = record.to_json()
    assert data['index'] == 10 and data['end_index'] == 12 and data['types'] == [6, 7]
    assert AnomalyRecord.from_json(data) == record


def test_record_invariants():
    with pytest.raises(AssertionError):
        AnomalyRecord(start=5, end=4, raw_score=60, types=(1,))
    with pytest.raises(AssertionError):
        AnomalyRecord(start=0, end=4, raw_score=101, types=(1,))
    with pytest.raises(AssertionError):
        AnomalyRecord(start=0, end=4, raw_score=60, types=())


def test_sort_records():
    a = AnomalyRecord(start=5, end=6, raw_score=60, types=(1,))
    b = AnomalyRecord(start=1, end=2, raw_score=70, types=(2,))
    assert sort_records([a, b]) == [b, a]


def test_error_exit_codes_are_distinct():
    classes = all_error_classes()
    assert classes[0] is SageError
    codes = [c.exit_code for c in classes]
    assert len(codes) == len(set(codes))
    assert 0 not in codes
