import json
from types import SimpleNamespace

import numpy as np
import pytest

from sage.core.errors import LengthMismatch, NoGroundTruthEvents
from sage.core.types import AnomalyFamily, AnomalyRecord, AnomalyType, Interval
from sage.detector import threshold
from sage.metrics import (affiliation_f1, best_f1_search, delayed_f1, evaluate_dataset, pa_f1, point_f1, prf,
                          threshold_comparison, type_eval)


# ---- brute-force references ------------------------------------------------------------

def _segments(gt):
    segs, start = [], None
    for i, v in enumerate(list(gt) + [0]):
        if v and start is None:
            start = i
        elif not v and start is not None:
            segs.append((start, i - 1))
            start = None
    return segs


def _f1_from(pred, gt):
    tp = sum(1 for p, g in zip(pred, gt) if p and g)
    fp = sum(1 for p, g in zip(pred, gt) if p and not g)
    fn = sum(1 for p, g in zip(pred, gt) if not p and g)
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return (tp, fp, fn, 2 * p * r / (p + r) if p + r else 0.0)


def _oracle_pa(pred, gt, k=None):
    adjusted = list(pred)
    for s, e in _segments(gt):
        first = next((i for i in range(s, e + 1) if pred[i]), None)
        credited = first is not None and (k is None or first - s <= k)
        for i in range(s, e + 1):
            adjusted[i] = 1 if credited else 0
    return _f1_from(adjusted, gt)


def _oracle_affiliation(pred, gt):
    """Zone survival computed position by position."""
    n = len(gt)
    events = _segments(gt)

    def dist(i, s, e):
        return max(0, s - i, i - e)

    owner = []
    for i in range(n):
        ds = [dist(i, s, e) for s, e in events]
        owner.append(ds.index(min(ds)))
    precisions, recalls = [], []
    for j, (s, e) in enumerate(events):
        zone = [i for i in range(n) if owner[i] == j]
        preds = [i for i in zone if pred[i]]
        if not preds:
            recalls.append(0.0)
            continue
        precisions.append(np.mean([sum(dist(q, s, e) >= dist(p, s, e) for q in zone) / len(zone) for p in preds]))
        rec = []
        for y in range(s, e + 1):
            d = min(abs(y - p) for p in preds)
            rec.append(sum(abs(q - y) >= d for q in zone) / len(zone))
        recalls.append(np.mean(rec))
    p = float(np.mean(precisions)) if precisions else 0.0
    r = float(np.mean(recalls))
    return p, r


def _random_pair(rng, n=None):
    n = n or int(rng.integers(2, 51))
    gt = (rng.random(n) < rng.uniform(0.05, 0.4)).astype(np.int8)
    pred = (rng.random(n) < rng.uniform(0.05, 0.4)).astype(np.int8)
    return pred, gt


def _record(start, end, score, t=AnomalyType.MEAN_CHANGE_POINT):
    return AnomalyRecord(start=start, end=end, raw_score=score, types=(t,))


# ---- point / pa / delayed ----------------------------------------------------------------

def test_point_f1_examples():
    assert point_f1([1, 1, 0, 0], [1, 0, 1, 0])[:3] == (0.5, 0.5, 0.5)
    assert point_f1([0, 1, 1], [0, 1, 1]).f1 == 1.0
    none = point_f1([0, 0, 0], [0, 1, 1])
    assert none.recall == 0.0 and none.f1 == 0.0
    assert prf(0, 0, 0) == (0.0, 0.0, 0.0, 0, 0, 0)
    with pytest.raises(LengthMismatch):
        point_f1([1, 0], [1, 0, 0])


def test_pa_and_delayed_examples():
    gt = np.zeros(40, dtype=np.int8)
    gt[10:20] = 1
    pred = np.zeros(40, dtype=np.int8)
    pred[15] = 1
    assert pa_f1(pred, gt)[3:] == (10, 0, 0)
    pred[30] = 1
    assert pa_f1(pred, gt).fp == 1
    early = np.zeros(40, dtype=np.int8)
    early[12] = 1
    assert delayed_f1(early, gt, 3)[3:] == (10, 0, 0)
    late = np.zeros(40, dtype=np.int8)
    late[15] = 1
    assert delayed_f1(late, gt, 3)[3:] == (0, 0, 10)


def test_metrics_match_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(500):
        pred, gt = _random_pair(rng)
        k = int(rng.integers(0, 6))
        point, pa, delayed = point_f1(pred, gt), pa_f1(pred, gt), delayed_f1(pred, gt, k)
        assert (point.tp, point.fp, point.fn) == _f1_from(pred, gt)[:3]
        assert point.f1 == pytest.approx(_f1_from(pred, gt)[3], abs=1e-12)
        assert (pa.tp, pa.fp, pa.fn) == _oracle_pa(pred, gt)[:3]
        assert (delayed.tp, delayed.fp, delayed.fn) == _oracle_pa(pred, gt, k)[:3]


def test_pa_dominates_point_and_delayed_limit():
    rng = np.random.default_rng(1)
    for _ in range(200):
        pred, gt = _random_pair(rng)
        assert pa_f1(pred, gt).f1 >= point_f1(pred, gt).f1
        assert delayed_f1(pred, gt, len(gt)) == pa_f1(pred, gt)


# ---- affiliation -------------------------------------------------------------------------

def test_affiliation_perfect_and_empty():
    gt = np.zeros(60, dtype=np.int8)
    gt[[5, 6, 30, 31, 32, 50]] = 1
    assert affiliation_f1(gt, gt).f1 == pytest.approx(1.0, abs=1e-12)
    empty = affiliation_f1(np.zeros(60), gt)
    assert empty.recall == 0.0 and empty.f1 == 0.0 and empty.fn == 3
    with pytest.raises(NoGroundTruthEvents):
        affiliation_f1(np.zeros(10), np.zeros(10))


def test_affiliation_matches_zone_oracle():
    rng = np.random.default_rng(2)
    checked = 0
    while checked < 200:
        pred, gt = _random_pair(rng)
        if not gt.any():
            continue
        score = affiliation_f1(pred, gt)
        p, r = _oracle_affiliation(pred, gt)
        assert score.precision == pytest.approx(p, abs=1e-12)
        assert score.recall == pytest.approx(r, abs=1e-12)
        checked += 1


def test_affiliation_prefers_nearer_prediction():
    gt = np.zeros(100, dtype=np.int8)
    gt[40:45] = 1
    scores = []
    for d in range(1, 40):
        pred = np.zeros(100, dtype=np.int8)
        pred[44 + d] = 1
        scores.append(affiliation_f1(pred, gt).f1)
    assert all(a > b for a, b in zip(scores, scores[1:]))


# ---- best-F1 search ------------------------------------------------------------------------

def test_best_f1_single_perfect_record():
    gt = np.zeros(50, dtype=np.int8)
    gt[10:13] = 1
    tau, score = best_f1_search([_record(10, 12, 64)], gt)
    assert tau == pytest.approx(0.64) and score.f1 == 1.0


def test_best_f1_drops_false_record():
    gt = np.zeros(50, dtype=np.int8)
    gt[10:13] = 1
    tau, score = best_f1_search([_record(10, 12, 90), _record(30, 40, 60)], gt)
    assert tau == pytest.approx(0.9) and score.f1 == 1.0
    assert best_f1_search([], gt) == (1.01, point_f1(np.zeros(50), gt))


def test_best_f1_beats_fixed_thresholds():
    rng = np.random.default_rng(3)
    for case in range(200):
        n = 120
        gt = np.zeros(n, dtype=np.int8)
        for s in rng.integers(0, n - 10, size=int(rng.integers(1, 4))):
            gt[s:s + int(rng.integers(1, 10))] = 1
        records = []
        for _ in range(int(rng.integers(0, 6))):
            s = int(rng.integers(0, n - 5))
            records.append(_record(s, s + int(rng.integers(0, 5)), int(rng.integers(30, 101))))
        for metric in ('point', 'pa', 'delayed', 'affiliation'):
            _, best = best_f1_search(records, gt, metric)
            grid = [0.5, 0.8] if case % 20 else np.linspace(0, 1, 101)
            for tau in grid:
                fixed = {'point': point_f1, 'pa': pa_f1, 'delayed': delayed_f1,
                         'affiliation': affiliation_f1}[metric](threshold(records, float(tau), n), gt)
                assert best.f1 >= fixed.f1 - 1e-12


def test_threshold_comparison_shape():
    gt = np.zeros(50, dtype=np.int8)
    gt[10:13] = 1
    table = threshold_comparison([_record(10, 12, 60), _record(30, 31, 85)], gt, ('point', 'pa'))
    assert set(table) == {'point', 'pa'} and list(table['point']) == ['0.5', '0.8', 'best']
    assert table['point']['0.8'][1].f1 == 0.0
    assert table['point']['best'][1].f1 == pytest.approx(0.75)


# ---- dataset level -----------------------------------------------------------------------

def _dataset():
    gt_a = np.zeros(40, dtype=np.int8)
    gt_a[5:8] = 1
    gt_b = np.zeros(30, dtype=np.int8)
    gt_b[20] = 1
    return {'a': gt_a, 'b': gt_b}


def test_evaluate_dataset_perfect_and_empty():
    gts = _dataset()
    perfect = {'a': [_record(5, 7, 80)], 'b': [_record(20, 20, 70)]}
    report = evaluate_dataset(perfect, gts)
    assert all(p.f1 == pytest.approx(1.0) for p in report.metrics.values())
    empty = evaluate_dataset({}, gts, threshold_mode=0.5)
    assert all(p.recall == 0.0 for p in empty.metrics.values())
    assert set(report.per_series) == {'a', 'b'}
    json.dumps(report.to_json())
    table = report.render_table()
    assert 'Pt' in table and 'Aff' in table and 'dataset' in table


def test_evaluate_dataset_is_order_free():
    gts = _dataset()
    records = {'a': [_record(5, 9, 80), _record(30, 31, 55)], 'b': [_record(18, 20, 65)]}
    forward = evaluate_dataset(records, gts).to_json()
    backward = evaluate_dataset(dict(reversed(list(records.items()))), dict(reversed(list(gts.items())))).to_json()
    assert forward == backward


def test_evaluate_dataset_compare_mode():
    gts = _dataset()
    records = {'a': [_record(5, 7, 60)], 'b': [_record(20, 20, 90), _record(3, 4, 55)]}
    report = evaluate_dataset(records, gts, metrics=('point', 'affiliation'), threshold_mode='compare')
    for row in report.comparison.values():
        assert row['best'][1].f1 >= max(row['0.5'][1].f1, row['0.8'][1].f1)
    assert 'F1@best' in report.render_table()
    no_events = {'a': np.zeros(40, dtype=np.int8), 'b': gts['b']}
    assert evaluate_dataset(records, no_events, metrics=('affiliation',)).per_series['a']['affiliation'] is None


# ---- type evaluation -----------------------------------------------------------------------

def _injection(t, start, end):
    return SimpleNamespace(type=t, ground_truth=(Interval(start, end),))


def test_type_eval_protocol():
    results = [
        ('s0', [_record(200, 399, 90, AnomalyType.MEAN_CHANGE_POINT), _record(210, 220, 60, AnomalyType.TREND_CHANGE)],
         _injection(AnomalyType.MEAN_CHANGE_POINT, 200, 399)),
        ('s1', [_record(10, 12, 80, AnomalyType.GLOBAL_POINT)], _injection(AnomalyType.GLOBAL_POINT, 11, 11)),
        ('s2', [], _injection(AnomalyType.GLOBAL_POINT, 50, 50)),
        ('s3', [_record(100, 120, 70, AnomalyType.AMPLITUDE_CHANGE)], _injection(AnomalyType.CONTEXTUAL_POINT, 110, 110)),
    ]
    report = type_eval(results)
    assert report.recall[AnomalyFamily.STRUCTURAL] == 1.0 and report.agreement[AnomalyFamily.STRUCTURAL] == 1.0
    assert report.recall[AnomalyFamily.POINT] == pytest.approx(1 / 3)
    assert report.agreement[AnomalyFamily.POINT] == 1.0
    assert report.recall[AnomalyFamily.SEASONAL] is None
    assert report.per_type[AnomalyType.GLOBAL_POINT] == (2, 1, 1)
    assert 'detection recall' in report.render_table()
    json.dumps(report.to_json())
