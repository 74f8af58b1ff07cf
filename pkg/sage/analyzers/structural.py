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
"""Structural family: trend change (5), mean change point (6), variance change (7)."""

from typing import List, Optional, Tuple

import numpy as np

from sage.analyzers.base import Candidate, EvidenceBundle, check_window, describe, merge_candidates
from sage.config import ANALYZER_CONFIG, TOOL_CONFIG
from sage.core.errors import PrefixTooShort, SegmentTooShort, TooShort
from sage.core.types import AnomalyFamily, AnomalyType, Interval, Series
from sage.represent.summary import CompressedSummary
from sage.tools.change_point import SegmentComparison, change_points, compare_segments, regime_expand
from sage.tools.decomposition import decompose
from sage.tools.imaging import line_chart
from sage.utils.common import is_flat, linear_slope
from sage.utils.file_utils import logging


def _line(y: np.ndarray) -> Tuple[float, float]:
    """Least-squares (slope, intercept) of ``y`` against its index."""
    slope = linear_slope(y)
    return slope, float(np.mean(y)) - slope * (len(y) - 1) / 2.0


def _local_detrend(base: np.ndarray, ref: slice, regime: slice) -> Tuple[np.ndarray, np.ndarray]:
    """Remove the reference segment's own line from both segments when it is steeper than its scatter."""
    ref_y, reg_y = base[ref], base[regime]
    slope, intercept = _line(ref_y)
    scatter = float(np.std(ref_y - (intercept + slope * np.arange(len(ref_y)))))
    if abs(slope) * len(ref_y) < ANALYZER_CONFIG['trend_change_sigma'] * scatter:
        return ref_y, reg_y
    t_ref = np.arange(len(ref_y))
    t_reg = np.arange(regime.start - ref.start, regime.stop - ref.start)
    return ref_y - (intercept + slope * t_ref), reg_y - (intercept + slope * t_reg)


def _slope_sign(slope: float, length: int, sigma: float) -> int:
    if abs(slope) * length < ANALYZER_CONFIG['trend_dead_zone'] * sigma:
        return 0
    return 1 if slope > 0 else -1


def classify(cmp: SegmentComparison, pre_slope: float, post_slope: float, ref_len: int, reg_len: int,
             sigma: float) -> Tuple[List[AnomalyType], str]:
    types, notes = [], []
    lo, hi = ANALYZER_CONFIG['variance_band']
    alpha = TOOL_CONFIG['regime_alpha']
    if cmp.mean_diff_p < alpha and abs(cmp.mean_shift_sigma) >= ANALYZER_CONFIG['mean_shift_sigma']:
        types.append(AnomalyType.MEAN_CHANGE_POINT)
        notes.append('mean shift {:.2f}σ (p={:.2g})'.format(cmp.mean_shift_sigma, cmp.mean_diff_p))
    if cmp.var_diff_p < alpha and not lo <= cmp.var_ratio <= hi:
        types.append(AnomalyType.VARIANCE_CHANGE)
        notes.append('variance ratio {:.2f} (p={:.2g})'.format(cmp.var_ratio, cmp.var_diff_p))
    if sigma > 0:
        before, after = _slope_sign(pre_slope, ref_len, sigma), _slope_sign(post_slope, reg_len, sigma)
        if before != after and abs(post_slope - pre_slope) * reg_len >= ANALYZER_CONFIG['trend_change_sigma'] * sigma:
            types.insert(0, AnomalyType.TREND_CHANGE)
            notes.insert(0, 'trend slope {:.3g} -> {:.3g}'.format(pre_slope, post_slope))
    return types, ', '.join(notes)


def _strength(cmp: SegmentComparison) -> float:
    ratio = cmp.var_ratio
    log_ratio = abs(np.log2(ratio)) if 0 < ratio < np.inf else np.inf
    return float(min(ANALYZER_CONFIG['strength_cap'], max(abs(cmp.mean_shift_sigma), log_ratio)))


def struct_analyze(window: Series, summary: Optional[CompressedSummary] = None,
                   use_vision: bool = True) -> EvidenceBundle:
    x = window.values
    n = len(x)
    if n < 20:
        raise TooShort('struct_analyze', n, 20)
    dec = decompose(x)
    base = x - dec.seasonal
    slope, intercept = _line(base)
    detrended = base - (intercept + slope * np.arange(n))
    mean_report = change_points(detrended)
    spread_report = change_points(np.abs(detrended - np.median(detrended)))
    onsets = sorted({i for i in mean_report.indices} | {i for i in spread_report.indices})

    tool_summaries = {'decompose': dec.render(),
                      'change_points': mean_report.render(),
                      'change_points_spread': spread_report.render()}
    comparisons = []
    candidates = []
    covered = []
    reference = TOOL_CONFIG['regime_reference']
    for c in onsets:
        if any(span.start <= c <= span.end for span in covered):
            continue
        try:
            span = regime_expand(base, c)
            ref = slice(max(0, c - reference), c)
            regime = slice(span.start, span.end + 1)
            ref_y, reg_y = _local_detrend(base, ref, regime)
            cmp = compare_segments(np.concatenate([ref_y, reg_y]), len(ref_y))
        except (PrefixTooShort, SegmentTooShort) as e:
            logging.debug('struct_analyze: change point {} skipped: {}'.format(c, e))
            comparisons.append('{}: skipped ({})'.format(c, e))
            continue
        sigma = float(np.std(ref_y))
        if is_flat(ref_y, sigma):
            sigma = float(np.std(base))
        types, note = classify(cmp, linear_slope(dec.trend[ref]), linear_slope(dec.trend[regime]),
                               ref.stop - ref.start, regime.stop - regime.start, sigma)
        comparisons.append('{}: regime [{}, {}] {}'.format(c, span.start, span.end, cmp.render()))
        if not types:
            continue
        covered.append(span)
        candidates.append(Candidate(span, tuple(types), _strength(cmp), 'change at {}: {}'.format(c, note)))
    candidates = check_window(merge_candidates(candidates, ANALYZER_CONFIG['merge_gap']), n)
    tool_summaries['compare_segments'] = '; '.join(comparisons) if comparisons else 'no change points to compare'
    images = (line_chart(x),) if use_vision else ()
    return EvidenceBundle(family=AnomalyFamily.STRUCTURAL, candidates=candidates, tool_summaries=tool_summaries,
                          images=images, summary=describe(AnomalyFamily.STRUCTURAL, candidates))
