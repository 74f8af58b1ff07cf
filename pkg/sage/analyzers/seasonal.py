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
"""Seasonal family: amplitude change (3) and seasonality anomaly (4)."""

from collections import Counter
from typing import Optional, Tuple

import numpy as np

from sage.analyzers.base import Candidate, EvidenceBundle, check_window, describe, merge_candidates, soft_bundle
from sage.config import ANALYZER_CONFIG
from sage.core.errors import NoSeasonality, TooShort
from sage.core.types import AnomalyFamily, AnomalyType, Interval, Series
from sage.represent.summary import CompressedSummary
from sage.tools.decomposition import moving_average
from sage.tools.spectral import AcfSplitReport, StftReport, autocorrelation_split, fft_spectrum, stft, wavelet_energy


def _ratio(after: float, before: float) -> float:
    if before > 0:
        return after / before
    return float('inf') if after > 0 else 1.0


def _log2(ratio: float) -> float:
    if ratio <= 0 or not np.isfinite(ratio):
        return ANALYZER_CONFIG['strength_cap']
    return float(min(ANALYZER_CONFIG['strength_cap'], abs(np.log2(ratio))))


def outside_band(ratio: float, band, tolerance: float) -> bool:
    """True when ``ratio`` lies outside ``band`` or within ``tolerance`` (relative) of its edges."""
    lo, hi = band
    return ratio <= lo * (1.0 + tolerance) or ratio >= hi * (1.0 - tolerance)


def amplitude_ratio(x: np.ndarray, period: int) -> Tuple[float, float, float]:
    """Std of the detrended first and second halves and their ratio."""
    half = len(x) // 2
    detrended = x - moving_average(x, period)
    first, second = float(np.std(detrended[:half])), float(np.std(detrended[half:]))
    return first, second, _ratio(second, first)


def _acf_peak(acf: np.ndarray, period: Optional[int]) -> float:
    return float(acf[period]) if period is not None and period < len(acf) else 0.0


def stft_shift(report: StftReport, n: int) -> Optional[Tuple[int, int, int]]:
    """(early mode bin, late mode bin, first late frame start) when the dominant bin moves between halves."""
    half = n // 2
    early = [b for s, b in zip(report.frame_starts, report.dominant_bins) if s + report.window <= half]
    late = [(s, b) for s, b in zip(report.frame_starts, report.dominant_bins) if s >= half]
    if not early or not late:
        return None
    share = ANALYZER_CONFIG['stft_min_share']
    early_bin, early_count = Counter(early).most_common(1)[0]
    late_bin, late_count = Counter(b for _, b in late).most_common(1)[0]
    if early_bin == late_bin or early_count < share * len(early) or late_count < share * len(late):
        return None
    # first frame reaching past the midpoint that already shows the late bin
    start = next(s for s, b in zip(report.frame_starts, report.dominant_bins)
                 if b == late_bin and s + report.window > half)
    return early_bin, late_bin, int(start)


def _seasonality_change(acf: AcfSplitReport, shift, n: int):
    """Type 4 evidence: (strength, interval, note) or None."""
    p1, p2 = acf.dominant_period_first, acf.dominant_period_second
    half = n // 2
    notes, strengths = [], []
    if acf.period_changed:
        if p1 is not None and p2 is not None:
            strengths.append(_log2(p2 / p1))
            notes.append('period {} -> {}'.format(p1, p2))
        else:
            peak1, peak2 = _acf_peak(acf.acf_first_half, p1), _acf_peak(acf.acf_second_half, p2)
            strengths.append(_log2(_ratio(peak2, peak1)) if peak1 > 0 and peak2 > 0 else 1.0)
            notes.append('period {} -> {}'.format(p1, p2))
    elif p1 is not None and p2 is not None:
        peak1, peak2 = _acf_peak(acf.acf_first_half, p1), _acf_peak(acf.acf_second_half, p2)
        if peak1 > 0 and peak2 < ANALYZER_CONFIG['amplitude_band'][0] * peak1:
            strengths.append(_log2(peak2 / peak1) if peak2 > 0 else 1.0)
            notes.append('ACF peak {:.2f} -> {:.2f}'.format(peak1, peak2))
    start = half
    if shift is not None:
        early_bin, late_bin, frame_start = shift
        strengths.append(_log2(late_bin / early_bin))
        notes.append('STFT bin {} -> {}'.format(early_bin, late_bin))
        start = min(start, frame_start)
    if not notes:
        return None
    return max(strengths), Interval(start, n - 1), ', '.join(notes)


def season_analyze(window: Series, summary: Optional[CompressedSummary] = None,
                   use_vision: bool = True) -> EvidenceBundle:
    x = window.values
    n = len(x)
    if n < 64:
        raise TooShort('season_analyze', n, 64)
    acf = autocorrelation_split(x)
    spectrum = fft_spectrum(x)
    frames = stft(x)
    wavelet = wavelet_energy(x)
    tool_summaries = {'autocorrelation_split': acf.render(), 'fft_spectrum': spectrum.render(),
                      'stft': frames.render(), 'wavelet_energy': wavelet.render()}
    try:
        period = acf.reference_period()
    except NoSeasonality as e:
        return soft_bundle(AnomalyFamily.SEASONAL, 'NoSeasonality: {}'.format(e), tool_summaries)

    half = n // 2
    candidates = []
    amp1, amp2, ratio = amplitude_ratio(x, period)
    tool_summaries['amplitude'] = 'detrended std first half {:.4g} second half {:.4g} ratio {:.3f}'.format(
        amp1, amp2, ratio)
    if not acf.period_changed and outside_band(ratio, ANALYZER_CONFIG['amplitude_band'],
                                                ANALYZER_CONFIG['amplitude_edge_tolerance']):
        candidates.append(Candidate(Interval(half, n - 1), (AnomalyType.AMPLITUDE_CHANGE,), _log2(ratio),
                                    'seasonal amplitude ratio {:.2f}'.format(ratio)))
    change = _seasonality_change(acf, stft_shift(frames, n), n)
    if change is not None:
        strength, interval, note = change
        candidates.append(Candidate(interval, (AnomalyType.SEASONALITY_ANOMALY,), strength, note))
    candidates = check_window(merge_candidates(candidates, ANALYZER_CONFIG['merge_gap']), n)
    return EvidenceBundle(family=AnomalyFamily.SEASONAL, candidates=candidates, tool_summaries=tool_summaries,
                          summary=describe(AnomalyFamily.SEASONAL, candidates))
