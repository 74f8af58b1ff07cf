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
"""Pattern family: pattern shift (8) and waveform distortion (9)."""

from typing import List, Optional, Tuple

import numpy as np

from sage.analyzers.base import Candidate, EvidenceBundle, check_window, describe, merge_candidates
from sage.config import ANALYZER_CONFIG, TOOL_CONFIG
from sage.core.errors import TooShort
from sage.core.intervals import indices_to_intervals
from sage.core.types import AnomalyFamily, AnomalyType, Interval, Series
from sage.represent.summary import CompressedSummary
from sage.tools.imaging import gaf, mtf, recurrence_image
from sage.tools.spectral import autocorrelation_split, fft_spectrum
from sage.tools.stats import rolling_range, rolling_std
from sage.tools.symbolic import SaxWord, gaussian_breakpoints, paa, recurrence, sax
from sage.utils.common import znorm


def period_words(x: np.ndarray, period: int, symbols: int = ANALYZER_CONFIG['phase_blocks'],
                 alphabet: int = TOOL_CONFIG['sax_alphabet']) -> np.ndarray:
    """SAX ranks of every complete period block, shape (blocks, symbols)."""
    z = znorm(x)
    symbols = min(symbols, period)
    cuts = gaussian_breakpoints(alphabet)
    blocks = len(z) // period
    return np.stack([np.searchsorted(cuts, paa(z[k * period:(k + 1) * period], symbols)[0], side='right')
                     for k in range(blocks)])


def best_rotation(reference: np.ndarray, word: np.ndarray) -> Tuple[int, float, float]:
    """(rotation, distance at that rotation, distance unrotated) aligning ``word`` onto ``reference``."""
    distances = [float(np.abs(np.roll(word, -r) - reference).sum()) for r in range(len(word))]
    r = int(np.argmin(distances))
    return r, distances[r], distances[0]


def phase_break(x: np.ndarray, period: int) -> Optional[Tuple[int, int, float]]:
    """First abrupt phase jump between consecutive period blocks.

    Returns (start index of the shifted block, rotation in symbols, mean rank
    displacement) or None.
    """
    if period < 4 or len(x) // period < 2:
        return None
    words = period_words(x, period)
    for k in range(1, len(words)):
        r, aligned, raw = best_rotation(words[k - 1], words[k])
        if r >= ANALYZER_CONFIG['phase_min_rotation'] and aligned < 0.5 * raw:
            displacement = float(np.abs(words[k] - words[k - 1]).mean())
            return k * period, r, displacement
    return None


def _depth(profile: np.ndarray, run: Interval, median: float) -> float:
    """Robust z (scaled MAD) of the run's mean below the profile median."""
    spread = 1.4826 * float(np.median(np.abs(profile - median)))
    scale = max(spread, 1e-12 * median)
    return (median - float(profile[run.start:run.end + 1].mean())) / scale


def collapse_runs(x: np.ndarray, window: int) -> Tuple[List[Tuple[Interval, float]], float]:
    """Interior runs where the local spread collapses.

    A point collapses when its rolling std or its rolling peak-to-peak range
    falls below ``collapse_factor`` times the window median of that profile.
    Runs touching the window edges are left to the structural and seasonal
    families.
    """
    n = len(x)
    factor = ANALYZER_CONFIG['collapse_factor']
    profiles = [rolling_std(x, window), rolling_range(x, window)]
    medians = [float(np.median(p)) for p in profiles]
    if medians[0] <= 0 or medians[1] <= 0:
        return [], medians[0]
    collapsed = np.flatnonzero((profiles[0] < factor * medians[0]) | (profiles[1] < factor * medians[1]))
    margin = window // 2
    runs = []
    for run in indices_to_intervals(collapsed, ANALYZER_CONFIG['merge_gap']):
        if run.length < ANALYZER_CONFIG['collapse_min_length']:
            continue
        if run.start <= margin or run.end >= n - 1 - margin:
            continue
        depth = max(_depth(p, run, m) for p, m in zip(profiles, medians))
        runs.append((run, float(min(ANALYZER_CONFIG['strength_cap'], depth))))
    return runs, medians[0]


def unexplained_breaks(x: np.ndarray, word: SaxWord, period: int) -> List[Tuple[Interval, int]]:
    """SAX breaks that no earlier same-phase break reproduces.

    The symbol jump of each break is compared with the jump between the
    stretches whole periods before its two segments, so a level offset
    cancels out. The break stands when every such jump differs by at least
    ``sax_break_ranks`` symbols. Returns (span of the two segments around
    the break, smallest jump mismatch).
    """
    z = znorm(x)
    cuts = np.asarray(word.breakpoints)
    bounds = list(word.segment_starts) + [len(x)]

    def rank(start, end):
        return int(np.searchsorted(cuts, z[start:end].mean(), side='right'))

    found = []
    for j, start in word.breaks:
        prev, end = bounds[j - 1], bounds[j + 1]
        jump = word.ranks[j] - word.ranks[j - 1]
        lags = range(period, prev + 1, period)
        if len(lags) == 0:
            continue
        mismatch = min(abs(jump - (rank(start - lag, end - lag) - rank(prev - lag, start - lag))) for lag in lags)
        if mismatch >= TOOL_CONFIG['sax_break_ranks']:
            found.append((Interval(prev, end - 1), mismatch))
    return found


def pattern_analyze(window: Series, summary: Optional[CompressedSummary] = None,
                    use_vision: bool = True) -> EvidenceBundle:
    x = window.values
    n = len(x)
    if n < 40:
        raise TooShort('pattern_analyze', n, 40)
    half = n // 2
    acf = autocorrelation_split(x)
    word = sax(x, max(1, n // ANALYZER_CONFIG['sax_segment_length']))
    full = recurrence(x, keep_matrix=use_vision)
    rec_first = recurrence(x[:half], keep_matrix=False)
    rec_second = recurrence(x[half:], keep_matrix=False)
    det_ratio = rec_second.determinism / rec_first.determinism if rec_first.determinism > 0 else 1.0
    tool_summaries = {'autocorrelation_split': acf.render(), 'sax': word.render(), 'recurrence': full.render(),
                      'recurrence_split': 'DET first half {:.3f} second half {:.3f} ratio {:.3f}{}'.format(
                          rec_first.determinism, rec_second.determinism, det_ratio,
                          ' (drop)' if det_ratio < ANALYZER_CONFIG['determinism_drop'] else '')}

    candidates = []
    p1, p2 = acf.dominant_period_first, acf.dominant_period_second
    period = None
    if p1 is not None and p2 is not None:
        period = int(round((p1 + p2) / 2.0))
    if period is not None and not acf.period_changed:
        found = phase_break(x, period)
        if found is not None:
            start, rotation, displacement = found
            note = 'phase jump of {} of {} symbols per period at {}'.format(
                rotation, min(period, ANALYZER_CONFIG['phase_blocks']), start)
            candidates.append(Candidate(Interval(start, n - 1), (AnomalyType.PATTERN_SHIFT,), displacement, note))
        tool_summaries['phase'] = 'period {} blocks; phase break {}'.format(
            period, 'none' if found is None else 'at {}'.format(found[0]))

    if period is not None:
        # a changed period is judged against the first half's
        reference = int(p1) if acf.period_changed else period
        kind = AnomalyType.WAVEFORM_DISTORTION if acf.period_changed else AnomalyType.PATTERN_SHIFT
        breaks = unexplained_breaks(x, word, reference) if reference >= 4 else []
        for span, mismatch in breaks:
            candidates.append(Candidate(span, (kind,), float(mismatch),
                                        'SAX break at {} off by {} symbols from period {}'.format(
                                            span.start, mismatch, reference)))
        tool_summaries['sax_breaks'] = '{} of {} SAX break(s) unexplained by period {}'.format(
            len(breaks), len(word.breaks), reference)

    collapse_window = period if period is not None else fft_spectrum(x).dominant_period
    if collapse_window is None or collapse_window < 4:
        collapse_window = ANALYZER_CONFIG['collapse_window']
    runs, median = collapse_runs(x, collapse_window)
    for run, depth in runs:
        candidates.append(Candidate(run, (AnomalyType.WAVEFORM_DISTORTION,), depth,
                                    'spread collapse over {} points'.format(run.length)))
    tool_summaries['rolling_spread'] = 'window {} median std {:.4g}; {} collapsed run(s) {}'.format(
        collapse_window, median, len(runs), [tuple(r) for r, _ in runs])

    if period is not None and det_ratio < ANALYZER_CONFIG['determinism_drop']:
        candidates.append(Candidate(Interval(half, n - 1), (AnomalyType.WAVEFORM_DISTORTION,),
                                    abs(float(np.log2(max(det_ratio, 1e-12)))),
                                    'recurrence determinism ratio {:.3f}'.format(det_ratio)))

    candidates = check_window(merge_candidates(candidates, ANALYZER_CONFIG['merge_gap']), n)
    images = ()
    if use_vision:
        images = (gaf(x), mtf(x)[0], recurrence_image(full.matrix))
    return EvidenceBundle(family=AnomalyFamily.PATTERN, candidates=candidates, tool_summaries=tool_summaries,
                          images=images, summary=describe(AnomalyFamily.PATTERN, candidates))
