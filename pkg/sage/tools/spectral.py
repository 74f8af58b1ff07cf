# Copyright (c) 2025 SAGE contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Frequency-domain tools: FFT spectrum, split-half ACF, STFT and Haar energy."""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.signal import get_window

from sage.config import TOOL_CONFIG
from sage.core.errors import NoSeasonality, TooShort
from sage.utils.common import as_float_array, is_flat


@dataclass(frozen=True)
class SpectrumReport:
    dominant_period: Optional[int]
    top_frequencies: Tuple[Tuple[float, float], ...]
    spectral_entropy: float

    def render(self) -> str:
        top = ', '.join('f={:.4f}(T={:.1f})'.format(f, 1.0 / f) for f, _ in self.top_frequencies[:3])
        return 'dominant period {}; top [{}]; spectral entropy {:.3f}'.format(
            self.dominant_period, top, self.spectral_entropy)


@dataclass(frozen=True)
class AcfSplitReport:
    acf_first_half: np.ndarray
    acf_second_half: np.ndarray
    dominant_period_first: Optional[int]
    dominant_period_second: Optional[int]
    period_changed: bool

    def render(self) -> str:
        return 'ACF period first half {} second half {} changed {}'.format(
            self.dominant_period_first, self.dominant_period_second, self.period_changed)

    def reference_period(self) -> int:
        """First-half period, else the second half's."""
        if self.dominant_period_first is not None:
            return self.dominant_period_first
        if self.dominant_period_second is None:
            raise NoSeasonality('no dominant period in either half')
        return self.dominant_period_second


@dataclass(frozen=True)
class StftReport:
    magnitudes: np.ndarray      # frames x bins
    frame_starts: Tuple[int, ...]
    dominant_bins: Tuple[int, ...]
    window: int
    hop: int

    def render(self) -> str:
        return 'STFT {} frames (win {}, hop {}); dominant bins {}'.format(
            len(self.frame_starts), self.window, self.hop, list(self.dominant_bins))


@dataclass(frozen=True)
class WaveletReport:
    level_energy: Tuple[float, ...]
    approx_energy: float
    first_half: Tuple[float, ...]
    second_half: Tuple[float, ...]

    @property
    def ratios(self) -> Tuple[float, ...]:
        out = []
        for a, b in zip(self.first_half, self.second_half):
            if a > 0:
                out.append(b / a)
            else:
                out.append(float('inf') if b > 0 else 1.0)
        return tuple(out)

    @property
    def total_energy(self) -> float:
        return float(sum(self.level_energy) + self.approx_energy)

    def render(self) -> str:
        return 'Haar detail energy by level {}; second/first half ratio {}'.format(
            ['{:.3g}'.format(e) for e in self.level_energy], ['{:.3g}'.format(r) for r in self.ratios])


def fft_spectrum(x, peak_ratio=TOOL_CONFIG['fft_peak_ratio'], top=5) -> SpectrumReport:
    """Mean-removed real FFT.

    The dominant period is reported when the strongest bin (at least two
    cycles per window) carries ``peak_ratio`` times the median power of the
    non-zero bins.
    """
    x = as_float_array(x)
    n = len(x)
    if n < 8:
        raise TooShort('fft_spectrum', n, 8)
    power = np.abs(np.fft.rfft(x - x.mean())) ** 2
    power = power[1:]
    total = float(power.sum())
    if is_flat(x) or total <= 0.0:
        return SpectrumReport(dominant_period=None, top_frequencies=(), spectral_entropy=0.0)
    bins = np.arange(1, len(power) + 1)
    order = np.argsort(-power, kind='stable')
    top_frequencies = tuple((float(bins[i] / n), float(power[i])) for i in order[:top])
    nonzero = power[power > total * 1e-15]
    peak = int(order[0])
    dominant = None
    if bins[peak] >= 2 and power[peak] >= peak_ratio * float(np.median(nonzero)):
        dominant = int(round(n / bins[peak]))
    p = power / total
    p = p[p > 0]
    entropy = float(-(p * np.log(p)).sum() / np.log(len(power))) if len(power) > 1 else 0.0
    return SpectrumReport(dominant_period=dominant, top_frequencies=top_frequencies, spectral_entropy=entropy)


def acf(x, max_lag: int) -> np.ndarray:
    """Biased autocorrelation for lags ``0..max_lag``; flat input gives zeros."""
    x = as_float_array(x)
    centered = x - x.mean()
    denom = float(np.dot(centered, centered))
    max_lag = min(max_lag, len(x) - 1)
    if is_flat(x) or denom <= 0.0:
        return np.zeros(max_lag + 1)
    full = np.correlate(centered, centered, mode='full')[len(x) - 1:]
    return full[:max_lag + 1] / denom


def acf_period(r: np.ndarray, min_peak=TOOL_CONFIG['acf_peak_min']) -> Optional[int]:
    """Lag of the first local ACF maximum above ``min_peak`` after the first local minimum."""
    seen_min = False
    for k in range(2, len(r) - 1):
        if not seen_min:
            if r[k] < r[k - 1] and r[k] <= r[k + 1]:
                seen_min = True
            continue
        if r[k] > r[k - 1] and r[k] >= r[k + 1] and r[k] > min_peak:
            return k
    return None


def autocorrelation_split(x, max_lag: Optional[int] = None,
                          change_ratio=TOOL_CONFIG['period_change_ratio']) -> AcfSplitReport:
    x = as_float_array(x)
    n = len(x)
    if n < 40:
        raise TooShort('autocorrelation_split', n, 40)
    half = n // 2
    first, second = x[:half], x[half:]
    if max_lag is None:
        max_lag = half // 2
    r1, r2 = acf(first, max_lag), acf(second, max_lag)
    p1, p2 = acf_period(r1), acf_period(r2)
    if p1 is not None and p2 is not None:
        changed = abs(p1 - p2) / max(p1, p2) > change_ratio
    else:
        changed = (p1 is None) != (p2 is None)
    return AcfSplitReport(acf_first_half=r1, acf_second_half=r2, dominant_period_first=p1,
                          dominant_period_second=p2, period_changed=bool(changed))


def stft(x, window=TOOL_CONFIG['stft_window'], hop=TOOL_CONFIG['stft_hop']) -> StftReport:
    x = as_float_array(x)
    n = len(x)
    if n < window:
        raise TooShort('stft', n, window)
    taper = get_window('hann', window)
    starts = tuple(range(0, n - window + 1, hop))
    frames = np.stack([x[s:s + window] for s in starts])
    frames = (frames - frames.mean(axis=1, keepdims=True)) * taper
    magnitudes = np.abs(np.fft.rfft(frames, axis=1))
    dominant = tuple(int(np.argmax(m[1:]) + 1) for m in magnitudes)
    return StftReport(magnitudes=magnitudes, frame_starts=starts, dominant_bins=dominant, window=window, hop=hop)


def haar_dwt(x, levels: int):
    """Orthonormal Haar transform of a power-of-two length signal."""
    approx = as_float_array(x)
    details = []
    for _ in range(levels):
        even, odd = approx[0::2], approx[1::2]
        details.append((even - odd) / np.sqrt(2.0))
        approx = (even + odd) / np.sqrt(2.0)
    return details, approx


def wavelet_energy(x, max_level=TOOL_CONFIG['wavelet_max_level']) -> WaveletReport:
    x = as_float_array(x)
    n = len(x)
    if n < 8:
        raise TooShort('wavelet_energy', n, 8)
    size = 1 << int(np.ceil(np.log2(n)))
    levels = min(int(np.floor(np.log2(n))), max_level)
    details, approx = haar_dwt(np.concatenate([x, np.zeros(size - n)]), levels)
    level_energy, first, second = [], [], []
    for j, d in enumerate(details, start=1):
        centers = (np.arange(len(d)) + 0.5) * (2 ** j)
        energy = d * d
        level_energy.append(float(energy.sum()))
        first.append(float(energy[centers < n / 2.0].sum()))
        second.append(float(energy[centers >= n / 2.0].sum()))
    return WaveletReport(level_energy=tuple(level_energy), approx_energy=float(np.dot(approx, approx)),
                         first_half=tuple(first), second_half=tuple(second))
