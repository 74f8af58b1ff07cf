import numpy as np
import pytest

from conftest import make_noise, make_sine
from sage.core.errors import NoSeasonality, PeriodTooLarge, PrefixTooShort, SegmentTooShort, TooShort
from sage.tools import (autocorrelation_split, change_points, compare_segments, decompose, detect_outliers,
                        difference, fft_spectrum, gaf, line_chart, mtf, recurrence, regime_expand,
                        rolling_statistics, sax, statistics, stft, to_png, wavelet_energy)
from sage.utils.common import linear_slope


# ---- statistics / outliers / rolling -------------------------------------------------

def test_statistics():
    s = statistics([1, 2, 3, 4, 5])
    assert s.mean == pytest.approx(3.0)
    assert s.std == pytest.approx(np.sqrt(2.0))
    flat = statistics([5, 5, 5])
    assert (flat.std, flat.skewness, flat.kurtosis) == (0.0, 0.0, 0.0)
    assert statistics([0, 0, 0, 100]).skewness > 0


def test_detect_outliers():
    flat = detect_outliers(np.full(10, 2.0))
    assert flat.z_indices == () and flat.iqr_indices == ()
    spike = detect_outliers([0.0] * 99 + [10.0])
    assert [i for i, _ in spike.z_indices] == [99]
    assert spike.z_indices[0][1] == pytest.approx(9.95, abs=0.01)
    assert detect_outliers([1, 1, 1, 1, 100]).iqr_indices == (4,)
    with pytest.raises(TooShort):
        detect_outliers([1, 2, 3])


def test_detect_outliers_permutation_covariance():
    rng = np.random.default_rng(4)
    x = rng.normal(size=200)
    x[[17, 150]] = [8.0, -9.0]
    perm = rng.permutation(200)
    base = detect_outliers(x)
    moved = detect_outliers(x[perm])
    assert sorted(int(perm[i]) for i, _ in moved.z_indices) == sorted(i for i, _ in base.z_indices)
    assert sorted(int(perm[i]) for i in moved.iqr_indices) == sorted(base.iqr_indices)


def test_rolling_statistics():
    assert rolling_statistics(np.arange(100.0), windows=[5]).candidates == ()
    assert rolling_statistics(np.full(100, 3.0)).candidates == ()
    x = make_sine(period=50)
    x[112] += 1.0
    assert 112 not in [i for i, _ in detect_outliers(x).z_indices]
    assert 112 in [i for i, _, _ in rolling_statistics(x).candidates]
    with pytest.raises(TooShort):
        rolling_statistics(np.arange(20.0), windows=[50])


# ---- decomposition ---------------------------------------------------------------------

def test_decompose_detects_period_and_reconstructs(sine):
    dec = decompose(sine)
    assert dec.period == 20
    rms = np.sqrt(np.mean(sine ** 2))
    assert np.sqrt(np.mean(dec.residual ** 2)) < 0.05 * rms
    assert np.allclose(dec.trend + dec.seasonal + dec.residual, sine, rtol=0, atol=1e-12)


def test_decompose_constant_and_ramp():
    dec = decompose(np.full(100, 4.0))
    assert dec.period is None and not dec.period_found
    assert np.allclose(dec.trend, 4.0) and np.allclose(dec.seasonal, 0.0) and np.allclose(dec.residual, 0.0)
    t = np.arange(400.0)
    dec = decompose(0.01 * t + make_sine(period=20), period=20)
    assert linear_slope(dec.trend) == pytest.approx(0.01, rel=0.1)


def test_decompose_reconstruction_property():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.normal(size=int(rng.integers(40, 300))) * rng.uniform(0.1, 100)
        dec = decompose(x, period=int(rng.integers(2, 20)))
        scale = np.max(np.abs(x))
        assert np.max(np.abs(dec.trend + dec.seasonal + dec.residual - x)) <= 1e-9 * scale


def test_decompose_errors():
    with pytest.raises(PeriodTooLarge):
        decompose(np.arange(30.0), period=20)


def test_difference():
    assert difference([1, 3, 6], 1).tolist() == [2.0, 3.0]
    assert difference([1, 3, 6], 2).tolist() == [1.0]
    assert not np.any(difference(np.full(5, 2.0)))
    with pytest.raises(TooShort):
        difference([1.0], 1)


# ---- change points ---------------------------------------------------------------------

def test_change_points_step_up():
    x = np.concatenate([np.zeros(50), np.full(50, 10.0)]) + make_noise(100, seed=6)
    report = change_points(x)
    assert len(report.points) == 1
    index, direction, _ = report.points[0]
    assert 48 <= index <= 55 and direction == 'up'


def test_change_points_step_down_and_flat():
    x = make_noise(200, seed=7)
    x[100:] -= 5.0
    report = change_points(x)
    assert report.points
    index, direction, _ = report.points[0]
    assert 95 <= index <= 106 and direction == 'down'
    assert change_points(np.full(50, 1.0)).points == ()
    with pytest.raises(TooShort):
        change_points(np.zeros(19))


def test_change_point_onset_precedes_alarm():
    # the sum crosses h at 53; the tail-sum onset is the step itself
    report = change_points(np.concatenate([np.zeros(50), np.full(50, 10.0)]))
    assert report.points == ((50, 'up', pytest.approx(6.0)),)


def test_compare_segments():
    rng = np.random.default_rng(8)
    calm = sum(compare_segments(rng.normal(size=200), 100).mean_diff_p > 0.05 for _ in range(100))
    assert calm >= 90
    shifted = compare_segments(np.concatenate([rng.normal(0, 1, 50), rng.normal(5, 1, 50)]), 50)
    assert shifted.mean_diff_p < 0.001 and shifted.mean_shift_sigma > 3
    flat = compare_segments(np.full(20, 3.0), 10)
    assert (flat.var_ratio, flat.var_diff_p, flat.mean_diff_p) == (1.0, 1.0, 1.0)
    with pytest.raises(SegmentTooShort):
        compare_segments(np.zeros(20), 3)


def test_regime_expand():
    x = make_noise(400, seed=9)
    x[200:] += 5.0
    assert regime_expand(x, 200).end >= 395
    short = 0
    for seed in range(10):
        y = make_noise(400, seed=seed)
        y[200:210] += 5.0
        interval = regime_expand(y, 200)
        assert interval.start == 200
        short += interval.end < 260
    assert short >= 7
    with pytest.raises(PrefixTooShort):
        regime_expand(x, 5)


# ---- spectral --------------------------------------------------------------------------

def test_autocorrelation_split():
    same = autocorrelation_split(make_sine(period=20))
    assert abs(same.dominant_period_first - 20) <= 1 and abs(same.dominant_period_second - 20) <= 1
    assert not same.period_changed
    x = np.concatenate([make_sine(200, period=20), make_sine(200, period=8)])
    assert autocorrelation_split(x).period_changed
    quiet = 0
    for seed in range(10):
        r = autocorrelation_split(make_noise(400, seed=seed))
        quiet += r.dominant_period_first is None and r.dominant_period_second is None
    assert quiet >= 5
    with pytest.raises(TooShort):
        autocorrelation_split(np.zeros(39))


def test_acf_reference_period():
    assert autocorrelation_split(make_sine(period=20)).reference_period() == autocorrelation_split(
        make_sine(period=20)).dominant_period_first
    late = np.concatenate([np.zeros(200), make_sine(200, period=20)])
    report = autocorrelation_split(late)
    assert report.dominant_period_first is None and abs(report.reference_period() - 20) <= 1
    with pytest.raises(NoSeasonality):
        autocorrelation_split(np.zeros(100)).reference_period()


def test_fft_spectrum(sine):
    assert fft_spectrum(sine).dominant_period == 20
    assert fft_spectrum(7.5 * sine).dominant_period == 20
    flat = fft_spectrum(np.full(64, 2.0))
    assert flat.dominant_period is None and flat.spectral_entropy == 0.0
    mix = 2 * make_sine(period=20) + make_sine(period=7)
    top = fft_spectrum(mix).top_frequencies
    assert top[0][0] == pytest.approx(1 / 20)
    assert [p for _, p in top] == sorted((p for _, p in top), reverse=True)


def test_stft():
    report = stft(np.zeros(400) + make_noise(400))
    assert len(report.frame_starts) == 11
    steady = stft(make_sine(period=16))
    assert set(steady.dominant_bins) == {4}
    changing = stft(np.concatenate([make_sine(200, period=16), make_sine(200, period=8)]))
    assert changing.dominant_bins[0] == 4 and changing.dominant_bins[-1] == 8
    with pytest.raises(TooShort):
        stft(np.zeros(63))


def test_wavelet_energy():
    assert not any(wavelet_energy(np.full(256, 3.0)).level_energy)
    spike = np.zeros(400)
    spike[100] = 1.0
    report = wavelet_energy(spike)
    assert report.ratios[0] < 0.01 and report.ratios[1] < 0.01
    rng = np.random.default_rng(10)
    for _ in range(100):
        x = rng.normal(size=int(rng.integers(8, 700)))
        energy = float(np.dot(x, x))
        assert abs(wavelet_energy(x).total_energy - energy) <= 1e-9 * energy


# ---- symbolic ----------------------------------------------------------------------------

def test_sax():
    flat = sax(np.full(100, 1.0), 10)
    assert len(set(flat.symbols)) == 1 and flat.breaks == ()
    ramp = sax(np.arange(400.0), 20)
    assert list(ramp.ranks) == sorted(ramp.ranks)
    step = sax(np.concatenate([np.zeros(200), np.full(200, 5.0)]), 20)
    assert step.breaks == ((10, 200),)
    x = make_noise(120, seed=12)
    assert sax(x, 12).symbols == sax(3.0 * x - 7.0, 12).symbols
    with pytest.raises(TooShort):
        sax(np.zeros(5), 6)


def test_recurrence():
    for seed in range(5):
        report = recurrence(make_noise(200, seed=seed))
        assert 0.08 <= report.recurrence_rate <= 0.12
    wave = make_sine(200, period=25.3)
    assert recurrence(wave, dimension=2, delay=6).determinism > 0.9
    assert recurrence(wave).determinism > recurrence(make_noise(200, seed=13)).determinism
    matrix = recurrence(wave).matrix
    assert np.array_equal(matrix, matrix.T)
    with pytest.raises(TooShort):
        recurrence(np.zeros(9))


def test_recurrence_rate_with_tied_distances():
    step = np.array([0.0] * 50 + [1.0] * 50)
    levels = np.repeat(np.arange(5.0), 40)
    for x in (step, levels, np.round(make_noise(300, seed=2))):
        report = recurrence(x)
        assert 0.08 <= report.recurrence_rate <= 0.12
        assert np.array_equal(report.matrix, report.matrix.T) and report.matrix.diagonal().all()
    # 495 of 4950 pairs
    assert recurrence(step).recurrence_rate == pytest.approx(0.1)


# ---- images --------------------------------------------------------------------------------

def test_gaf():
    assert np.allclose(gaf(np.full(20, 3.0)).data, -1.0)
    x = make_noise(100, seed=14)
    field = gaf(x).data
    top = int(np.argmax(x))
    assert field[top, top] == pytest.approx(1.0)
    rng = np.random.default_rng(15)
    for _ in range(50):
        g = gaf(rng.normal(size=60), render=False).data
        assert np.allclose(g, g.T) and g.min() >= -1.0 and g.max() <= 1.0


def test_mtf():
    image, transition = mtf(np.full(30, 1.0))
    assert np.allclose(image.data, 1.0)
    _, transition = mtf(np.arange(200.0))
    for row in np.flatnonzero(transition.sum(axis=1) > 0):
        assert int(np.argmax(transition[row])) in (row, row + 1)
    rng = np.random.default_rng(16)
    for _ in range(50):
        _, t = mtf(rng.normal(size=80))
        sums = t.sum(axis=1)
        assert np.allclose(sums[sums > 0], 1.0)


def test_png_and_line_chart():
    png = to_png(np.eye(8))
    assert png.startswith(b'\x89PNG')
    chart = line_chart(make_sine(100))
    assert chart.kind == 'LineChart' and chart.data.ndim == 2
    assert chart.data.min() < 0.5 < chart.data.max()
    assert chart.rendered.startswith(b'\x89PNG')
