import dataclasses
import json

import numpy as np
import pytest

from conftest import make_noise, make_sine
from sage.analyzers import (ANALYZERS, EvidenceBundle, Candidate, merge_candidates, pattern_analyze, point_analyze,
                            run_all, season_analyze, struct_analyze)
from sage.analyzers import pattern as pattern_module
from sage.analyzers.pattern import unexplained_breaks
from sage.core.errors import TooShort
from sage.core.types import FAMILY_ORDER, AnomalyFamily, AnomalyType, Interval, Series, family_types
from sage.tools import recurrence, sax


def _series(values, id='w'):
    return Series(values=values, id=id)


def _typed(bundle, anomaly_type):
    return [c for c in bundle.candidates if anomaly_type in c.types]


# ---- evidence bundle ---------------------------------------------------------------------

def test_bundle_rejects_foreign_types():
    with pytest.raises(AssertionError):
        EvidenceBundle(family=AnomalyFamily.POINT,
                       candidates=[Candidate(Interval(0, 1), (AnomalyType.MEAN_CHANGE_POINT,), 1.0)])


def test_merge_candidates_keeps_strongest_first():
    merged = merge_candidates([Candidate(Interval(10, 10), (AnomalyType.CONTEXTUAL_POINT,), 2.6, 'a'),
                               Candidate(Interval(12, 12), (AnomalyType.GLOBAL_POINT,), 4.0, 'b'),
                               Candidate(Interval(30, 30), (AnomalyType.GLOBAL_POINT,), 3.1)], gap=2)
    assert [tuple(c.interval) for c in merged] == [(10, 12), (30, 30)]
    assert merged[0].types == (AnomalyType.GLOBAL_POINT, AnomalyType.CONTEXTUAL_POINT)
    assert merged[0].strength == 4.0 and merged[0].note == 'b; a'


# ---- point -------------------------------------------------------------------------------

def test_point_constant_window():
    bundle = point_analyze(_series(np.full(100, 2.0)))
    assert bundle.candidates == ()
    assert {'statistics', 'detect_outliers', 'rolling_statistics'} <= set(bundle.tool_summaries)


def test_point_global_spike():
    x = make_sine(400, period=50)
    x[50] += 5 * x.std()
    bundle = point_analyze(_series(x))
    assert len(bundle.candidates) == 1
    spike = bundle.candidates[0]
    assert tuple(spike.interval) == (50, 50)
    assert spike.types == (AnomalyType.GLOBAL_POINT,)
    assert spike.strength > 4.5


def test_point_contextual_bump():
    x = make_sine(400, period=50)
    x[112] += 0.7
    bundle = point_analyze(_series(x))
    hits = [c for c in bundle.candidates if c.interval.start <= 112 <= c.interval.end]
    assert len(hits) == 1
    assert AnomalyType.CONTEXTUAL_POINT in hits[0].types
    assert AnomalyType.GLOBAL_POINT not in hits[0].types


def test_point_too_short():
    with pytest.raises(TooShort):
        point_analyze(_series([1.0, 2.0, 3.0]))


# ---- structural --------------------------------------------------------------------------

def test_struct_mean_shift():
    found = 0
    for seed in range(10):
        x = make_noise(400, seed=seed)
        x[200:] += 1.5 * x.std()
        bundle = struct_analyze(_series(x))
        found += any(abs(c.interval.start - 200) <= 15 and c.interval.end >= 390
                     for c in _typed(bundle, AnomalyType.MEAN_CHANGE_POINT))
    assert found >= 8


def test_struct_variance_change():
    found = 0
    for seed in range(10):
        x = make_noise(400, seed=100 + seed)
        m = x[200:].mean()
        x[200:] = m + 2.5 * (x[200:] - m)
        bundle = struct_analyze(_series(x))
        found += any(c.interval.overlaps(Interval(200, 399)) for c in _typed(bundle, AnomalyType.VARIANCE_CHANGE))
    assert found >= 7


def test_struct_quiet_on_noise():
    quiet = sum(struct_analyze(_series(make_noise(400, seed=seed))).candidates == () for seed in range(20))
    assert quiet >= 17


def test_struct_summaries_and_short_window():
    bundle = struct_analyze(_series(make_noise(100, seed=3)))
    assert {'decompose', 'change_points', 'compare_segments'} <= set(bundle.tool_summaries)
    with pytest.raises(TooShort):
        struct_analyze(_series(np.zeros(19)))


# ---- seasonal ----------------------------------------------------------------------------

def test_season_amplitude_change():
    x = make_sine(400, period=20, phase=0.3)
    m = x[200:].mean()
    x[200:] = m + 2.0 * (x[200:] - m)
    bundle = season_analyze(_series(x))
    hits = _typed(bundle, AnomalyType.AMPLITUDE_CHANGE)
    assert hits and hits[0].interval == Interval(200, 399)
    assert hits[0].strength == pytest.approx(1.0, abs=0.1)


def test_season_frequency_change():
    t = np.arange(400, dtype=np.float64)
    phase = 2 * np.pi * t / 40
    phase[200:] = phase[199] + 2.5 * (phase[200:] - phase[199])
    bundle = season_analyze(_series(np.sin(phase)))
    hits = _typed(bundle, AnomalyType.SEASONALITY_ANOMALY)
    assert hits and hits[0].interval.end == 399 and hits[0].interval.start <= 200


def test_season_no_seasonality_on_noise():
    soft = 0
    for seed in range(10):
        bundle = season_analyze(_series(make_noise(400, seed=seed)))
        if bundle.soft_failure is not None:
            assert bundle.soft_failure.startswith('NoSeasonality')
            assert bundle.candidates == () and 'fft_spectrum' in bundle.tool_summaries
            soft += 1
    assert soft >= 5


def test_season_steady_sine_is_quiet():
    assert season_analyze(_series(make_sine(400, period=16))).candidates == ()


# ---- pattern -----------------------------------------------------------------------------

def test_pattern_quarter_shift():
    x = make_sine(400, period=20, phase=0.3)
    x[200:] = np.roll(x[200:], 5)
    bundle = pattern_analyze(_series(x))
    hits = _typed(bundle, AnomalyType.PATTERN_SHIFT)
    assert len(hits) == 1 and hits[0].interval == Interval(200, 399)
    assert hits[0].strength > 1


def test_pattern_clip(noisy_sine):
    x = noisy_sine.copy()
    segment = x[160:281]
    mu, s = segment.mean(), segment.std()
    x[160:281] = np.clip(segment, mu - 0.5 * s, mu + 0.5 * s)
    bundle = pattern_analyze(_series(x))
    assert any(c.interval.overlaps(Interval(160, 280)) for c in _typed(bundle, AnomalyType.WAVEFORM_DISTORTION))


def test_pattern_quiet_on_periodic():
    quiet = 0
    for seed in range(20):
        x = make_sine(400, period=25, phase=0.3) + make_noise(400, seed=seed, scale=0.1)
        quiet += pattern_analyze(_series(x), use_vision=False).candidates == ()
    assert quiet >= 17


def test_pattern_images():
    bundle = pattern_analyze(_series(make_sine(200, period=20)))
    assert [image.kind for image in bundle.images] == ['GAF', 'MTF', 'Recurrence']
    assert pattern_analyze(_series(make_sine(200, period=20)), use_vision=False).images == ()
    with pytest.raises(TooShort):
        pattern_analyze(_series(np.zeros(39)))


def _square_with_plateau():
    t = np.arange(400)
    x = np.where((t // 20) % 2 == 0, 1.0, -1.0)
    x[220:240] = 0.2
    return x


def test_unexplained_sax_breaks():
    x = _square_with_plateau()
    word = sax(x, 20)
    assert len(word.breaks) > 10
    assert unexplained_breaks(x, word, 40) == [(Interval(200, 239), 4), (Interval(220, 259), 4)]
    clean = np.where((np.arange(400) // 20) % 2 == 0, 1.0, -1.0)
    assert unexplained_breaks(clean, sax(clean, 20), 40) == []
    shifted = clean.copy()
    shifted[200:] += 1.0
    assert unexplained_breaks(shifted, sax(shifted, 20), 40) == [(Interval(180, 219), 3)]


def test_pattern_sax_break_candidate():
    bundle = pattern_analyze(_series(_square_with_plateau()), use_vision=False)
    hits = [c for c in bundle.candidates if 'SAX break' in c.note]
    assert hits and any(c.interval.overlaps(Interval(220, 239)) for c in hits)
    assert 'sax_breaks' in bundle.tool_summaries


def test_pattern_determinism_drop_with_collapse(noisy_sine, monkeypatch):
    x = noisy_sine.copy()
    segment = x[160:281]
    x[160:281] = np.clip(segment, segment.mean() - 0.5 * segment.std(), segment.mean() + 0.5 * segment.std())
    calls = []

    def halved_second(values, **kwargs):
        report = recurrence(values, **kwargs)
        calls.append(len(values))
        if len(calls) == 3:
            report = dataclasses.replace(report, determinism=0.1 * report.determinism)
        return report

    monkeypatch.setattr(pattern_module, 'recurrence', halved_second)
    bundle = pattern_analyze(_series(x), use_vision=False)
    notes = ' '.join(c.note for c in _typed(bundle, AnomalyType.WAVEFORM_DISTORTION))
    assert 'spread collapse' in notes and 'recurrence determinism' in notes
    assert any(c.interval.end == 399 for c in _typed(bundle, AnomalyType.WAVEFORM_DISTORTION))


# ---- run_all -----------------------------------------------------------------------------

def _scenarios():
    spike = make_noise(400, seed=4)
    spike[100] += 8
    step = make_noise(400, seed=5)
    step[220:] += 3
    return [spike, step, make_sine(400, period=20), make_noise(400, seed=6)]


def test_run_all_order_and_scope():
    for x in _scenarios():
        bundles = run_all(_series(x), use_vision=False)
        assert tuple(b.family for b in bundles) == FAMILY_ORDER
        for bundle in bundles:
            allowed = set(family_types(bundle.family))
            assert all(set(c.types) <= allowed for c in bundle.candidates)
            assert all(0 <= c.interval.start <= c.interval.end < 400 for c in bundle.candidates)


def test_run_all_short_window_is_soft():
    bundles = run_all(_series(make_noise(30, seed=1)))
    point, structural, seasonal, pattern = bundles
    assert point.soft_failure is None and structural.soft_failure is None
    assert seasonal.soft_failure.startswith('TooShort')
    assert pattern.soft_failure.startswith('TooShort')
    assert 'skipped' in seasonal.summary


def test_run_all_deterministic_and_parallel_equivalent():
    window = _series(_scenarios()[1])
    dump = lambda bundles: json.dumps([b.to_json() for b in bundles], sort_keys=True)  # noqa: E731
    sequential = dump(run_all(window))
    assert dump(run_all(window)) == sequential
    assert dump(run_all(window, jobs=4)) == sequential


def test_vision_switch():
    bundles = run_all(_series(make_sine(400, period=20)), use_vision=False)
    assert all(b.images == () for b in bundles)
    assert set(ANALYZERS) == set(FAMILY_ORDER)
