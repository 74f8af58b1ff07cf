import json

import numpy as np
import pytest

from conftest import make_noise, make_sine
from sage.analyzers import season_analyze, struct_analyze
from sage.core.errors import DegenerateSigma, NoPeriod
from sage.core.types import AnomalyType, Series
from sage.inject import (INJECTORS, Injection, generate_benchmark, inject_amplitude_change, inject_contextual_point,
                         inject_global_point, inject_mean_change, inject_pattern_shift, inject_seasonality,
                         inject_trend_change, inject_variance_change, inject_waveform_distortion, read_benchmark,
                         write_benchmark)
from sage.inject.injectors import local_window
from sage.tools import autocorrelation_split, detect_outliers, rolling_statistics
from sage.tools.change_point import change_points, compare_segments

SEEDS = range(20)


def _outside(x, y, injection):
    mask = injection.labels(len(x)) == 0
    return np.array_equal(x[mask], y[mask])


# ---- point injectors ---------------------------------------------------------------------

def test_global_point_exact_magnitude():
    total = found = 0
    for seed in SEEDS:
        x = make_noise(400, seed=seed)
        y, inj = inject_global_point(x, seed)
        sigma = np.std(x)
        positions = [g.start for g in inj.ground_truth]
        assert 1 <= len(positions) <= 3 and _outside(x, y, inj)
        assert all(5 <= p <= 394 for p in positions)
        assert all(b - a >= 10 for a, b in zip(positions, positions[1:]))
        assert np.allclose(np.abs(y[positions] - x[positions]), 5 * sigma, rtol=0, atol=1e-9)
        flagged = {i for i, _ in detect_outliers(y).z_indices}
        total += len(positions)
        found += len(set(positions) & flagged)
    assert found >= 0.9 * total
    with pytest.raises(DegenerateSigma):
        inject_global_point(np.full(100, 2.0), 0)


def test_contextual_point_exact_magnitude():
    hits = 0
    for seed in SEEDS:
        x = make_sine(400, period=50)
        y, inj = inject_contextual_point(x, seed)
        width = max(10, 400 // 20)
        for g in inj.ground_truth:
            start, end = local_window(400, g.start, width)
            assert abs(y[g.start] - x[g.start]) == pytest.approx(3 * np.std(x[start:end]), abs=1e-9)
        assert _outside(x, y, inj)
        flagged = {i for i, _, _ in rolling_statistics(y).candidates}
        hits += any(g.start in flagged for g in inj.ground_truth)
    assert hits >= 18
    with pytest.raises(DegenerateSigma):
        inject_contextual_point(np.full(100, 2.0), 0)


# ---- seasonal injectors ------------------------------------------------------------------

def test_amplitude_change():
    x = make_sine(400, period=20) + make_noise(400, seed=3, scale=0.1)
    y, inj = inject_amplitude_change(x, 0)
    assert inj.ground_truth == ((200, 399),) and _outside(x, y, inj)
    assert np.std(y[200:]) == pytest.approx(2 * np.std(x[200:]), abs=1e-9)
    bundle = season_analyze(Series(values=y))
    assert AnomalyType.AMPLITUDE_CHANGE in [t for c in bundle.candidates for t in c.types]
    flat = np.concatenate([make_noise(200, seed=1), np.full(200, 3.0)])
    assert np.array_equal(inject_amplitude_change(flat, 0)[0], flat)


def _variant(seed, x):
    return inject_seasonality(x, seed)[1].params['variant']


def test_seasonality_flatten_moments():
    x = make_sine(400, period=20)
    seeds = [s for s in range(40) if _variant(s, x) == 'flatten'][:5]
    assert seeds
    for seed in seeds:
        y, inj = inject_seasonality(x, seed)
        assert _outside(x, y, inj)
        expected = np.sqrt((0.15 * np.std(x[200:])) ** 2 + (0.15 * np.std(x)) ** 2)
        assert np.std(y[200:]) == pytest.approx(expected, rel=0.15)


def test_seasonality_frequency_variant():
    x = make_sine(400, period=20)
    seeds = [s for s in range(40) if _variant(s, x) == 'frequency'][:5]
    assert seeds
    for seed in seeds:
        y, inj = inject_seasonality(x, seed)
        assert inj.params['period'] == 20 and _outside(x, y, inj)
        second = autocorrelation_split(y).dominant_period_second
        assert second is not None and abs(second - 8) <= 1


def test_seasonality_without_period_flattens():
    x = np.full(400, 2.0)
    for seed in range(10):
        y, inj = inject_seasonality(x, seed)
        assert inj.params['variant'] == 'flatten' and np.array_equal(y, x)


# ---- structural injectors ----------------------------------------------------------------

def test_trend_change_offset_and_reversal():
    for seed in SEEDS:
        x = make_noise(400, seed=seed)
        y, inj = inject_trend_change(x, seed)
        slope = inj.params['slope']
        assert abs(slope) == pytest.approx(max(0.05 * np.std(x), 0.05))
        assert y[-1] - x[-1] == pytest.approx(slope * 199, abs=1e-9)
        assert _outside(x, y, inj) and inj.ground_truth == ((200, 399),)
    ramp = 0.05 * np.arange(400.0) + make_noise(400, seed=1, scale=0.1)
    assert inject_trend_change(ramp, 0)[1].params['slope'] < 0
    flat_base = make_noise(400, seed=2, scale=0.2)
    bundle = struct_analyze(Series(values=inject_trend_change(flat_base, 0)[0]))
    found = {t for c in bundle.candidates for t in c.types}
    assert found & {AnomalyType.TREND_CHANGE, AnomalyType.MEAN_CHANGE_POINT}


def test_mean_change_exact_shift():
    located = 0
    for seed in SEEDS:
        x = make_noise(400, seed=seed)
        y, inj = inject_mean_change(x, seed)
        cp = inj.ground_truth[0].start
        assert 160 <= cp <= 240 and inj.ground_truth[0].end == 399
        assert abs(y[cp:].mean() - x[cp:].mean()) == pytest.approx(1.5 * np.std(x), abs=1e-9)
        assert _outside(x, y, inj)
        located += any(abs(i - cp) <= 10 for i, _, _ in change_points(y).points)
    assert located >= 15
    with pytest.raises(DegenerateSigma):
        inject_mean_change(np.zeros(50), 0)


def test_variance_change_exact_scale():
    significant = 0
    for seed in SEEDS:
        x = make_noise(400, seed=seed)
        y, inj = inject_variance_change(x, seed)
        cp, factor = inj.ground_truth[0].start, inj.params['factor']
        assert factor in (2.0, 2.5)
        assert np.std(y[cp:]) == pytest.approx(factor * np.std(x[cp:]), abs=1e-9)
        assert y[cp:].mean() == pytest.approx(x[cp:].mean(), abs=1e-9)
        assert _outside(x, y, inj)
        significant += compare_segments(y, cp).var_diff_p < 0.05
    assert significant == len(SEEDS)


# ---- pattern injectors -------------------------------------------------------------------

def test_pattern_shift_quarter_period():
    x = make_sine(400, period=20)
    y, inj = inject_pattern_shift(x, 0)
    assert inj.params == {'period': 20, 'shift': 5}
    assert np.array_equal(np.sort(y[200:]), np.sort(x[200:])) and _outside(x, y, inj)
    lags = [float(np.dot(np.roll(x[200:], lag), y[200:])) for lag in range(20)]
    assert int(np.argmax(lags)) == 5
    with pytest.raises(NoPeriod):
        inject_pattern_shift(np.full(400, 1.0), 0)


def test_waveform_distortion_clip_band():
    x = make_sine(400, period=25, amplitude=3.0) + make_noise(400, seed=4, scale=0.3)
    y, inj = inject_waveform_distortion(x, 0)
    assert inj.ground_truth == ((160, 280),) and _outside(x, y, inj)
    region = x[160:281]
    band = 0.5 * region.std()
    assert np.all(np.abs(y[160:281] - region.mean()) <= band + 1e-9)
    assert np.std(y[160:281]) <= np.std(region)
    flat = np.full(400, 2.0)
    assert np.array_equal(inject_waveform_distortion(flat, 0)[0], flat)


def test_injectors_are_deterministic():
    x = make_sine(400, period=20) + make_noise(400, seed=6, scale=0.2)
    for kind, injector in INJECTORS.items():
        a, ia = injector(x, 11)
        b, ib = injector(x, 11)
        assert np.array_equal(a, b) and ia == ib
        assert ia.type == kind and ia.span.end < 400


def test_injection_json():
    inj = Injection(AnomalyType.GLOBAL_POINT, ((3, 3), (40, 40)), {'sigma': 1.0}, 7)
    assert Injection.from_json(json.loads(json.dumps(inj.to_json()))) == inj
    assert np.flatnonzero(inj.labels(50)).tolist() == [3, 40]


# ---- benchmark -----------------------------------------------------------------------------

def test_generate_benchmark_counts_and_labels():
    samples = generate_benchmark(per_type=4, seed=3)
    assert len(samples) == 36
    for kind in AnomalyType:
        assert sum(s.injection.type == kind for s in samples) == 4
    assert all(s.series.labels.sum() >= 1 for s in samples)
    assert len({s.id for s in samples}) == 36


def test_generate_benchmark_determinism(tmp_path):
    first = write_benchmark(generate_benchmark(per_type=2, seed=5), str(tmp_path / 'a'), 5)
    second = write_benchmark(generate_benchmark(per_type=2, seed=5), str(tmp_path / 'b'), 5)
    assert first == second
    for name in first['files'] + ['samples.jsonl', 'manifest.json']:
        assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()
    other = generate_benchmark(per_type=2, seed=6)
    assert len(other) == 18
    assert not np.array_equal(other[0].series.values, generate_benchmark(per_type=2, seed=5)[0].series.values)


def test_write_and_read_benchmark(tmp_path):
    samples = generate_benchmark(per_type=1, seed=0)
    manifest = write_benchmark(samples, str(tmp_path), 0)
    assert manifest['samples'] == 9 and len(manifest['files']) == 9
    assert all((tmp_path / f).exists() for f in manifest['files'])
    _, loaded = read_benchmark(str(tmp_path))
    assert [s.injection for s in loaded] == [s.injection for s in samples]
    assert np.allclose(loaded[0].series.values, samples[0].series.values)


def test_generate_benchmark_rebalances_failures():
    flat = Series(values=np.full(400, 1.0), id='flat')
    wave = Series(values=make_sine(400, period=20) + make_noise(400, seed=2, scale=0.1), id='wave')
    samples = generate_benchmark(bases=[flat, wave], per_type=2, seed=0,
                                 types=[AnomalyType.GLOBAL_POINT, AnomalyType.PATTERN_SHIFT])
    assert len(samples) == 4 and all(s.base == 'wave' for s in samples)
    assert generate_benchmark(bases=[flat], per_type=1, types=[AnomalyType.MEAN_CHANGE_POINT]) == []

