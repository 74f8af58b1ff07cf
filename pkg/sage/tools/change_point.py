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
"""CUSUM change points, two-sample segment tests and regime expansion."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import stats as sps

from sage.config import TOOL_CONFIG
from sage.core.errors import PrefixTooShort, SegmentTooShort, TooShort
from sage.core.types import Interval
from sage.utils.common import as_float_array, is_flat

UP = 'up'
DOWN = 'down'


@dataclass(frozen=True)
class ChangePointReport:
    # (index, direction, cusum statistic at alarm)
    points: Tuple[Tuple[int, str, float], ...]
    threshold_sigma: float
    drift_sigma: float

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(i for i, _, _ in self.points)

    def render(self) -> str:
        pts = ', '.join('{}({}, S={:.1f})'.format(i, d, s) for i, d, s in self.points)
        return 'CUSUM k={}σ h={}σ: {} change points [{}]'.format(
            self.drift_sigma, self.threshold_sigma, len(self.points), pts)


@dataclass(frozen=True)
class SegmentComparison:
    mean_diff_p: float
    var_diff_p: float
    mean_shift_sigma: float
    var_ratio: float

    def differs(self, alpha=TOOL_CONFIG['regime_alpha']) -> bool:
        return self.mean_diff_p < alpha or self.var_diff_p < alpha

    def render(self) -> str:
        return 'mean p={:.3g} shift={:.2f}σ; var p={:.3g} ratio={:.2f}'.format(
            self.mean_diff_p, self.mean_shift_sigma, self.var_diff_p, self.var_ratio)


def _onset(z: np.ndarray, start: int, alarm: int) -> int:
    """Index in ``[start, alarm]`` maximising the normalised tail sum of ``z``."""
    tail = np.cumsum(z[start:alarm + 1][::-1])[::-1]
    lengths = np.arange(alarm - start + 1, 0, -1)
    return start + int(np.argmax(np.abs(tail) / np.sqrt(lengths)))


def change_points(x, drift=TOOL_CONFIG['cusum_drift'], threshold=TOOL_CONFIG['cusum_threshold'],
                  warmup=TOOL_CONFIG['cusum_warmup']) -> ChangePointReport:
    """Two-sided CUSUM on the series standardised by its global std.

    On an alarm the change point is the index between the excursion start
    (last zero of the alarming sum) and the alarm that maximises the
    normalised tail sum; both sums are then reset and the reference mean is
    re-estimated from the ``warmup`` points following the onset.
    """
    x = as_float_array(x)
    n = len(x)
    if n < 20:
        raise TooShort('change_points', n, 20)
    sigma = float(np.std(x))
    if is_flat(x, sigma):
        return ChangePointReport(points=(), threshold_sigma=threshold, drift_sigma=drift)
    mu = float(np.mean(x[:warmup]))
    points = []
    g_pos = g_neg = 0.0
    start_pos = start_neg = 0
    i = 0
    while i < n:
        z = (x[i] - mu) / sigma
        g_pos = max(0.0, g_pos + z - drift)
        g_neg = max(0.0, g_neg - z - drift)
        if g_pos == 0.0:
            start_pos = i + 1
        if g_neg == 0.0:
            start_neg = i + 1
        if g_pos > threshold or g_neg > threshold:
            up = g_pos >= g_neg
            stat, s0 = (g_pos, start_pos) if up else (g_neg, start_neg)
            onset = _onset((x - mu) / sigma, min(s0, i), i)
            points.append((onset, UP if up else DOWN, float(stat)))
            mu = float(np.mean(x[onset:onset + warmup]))
            g_pos = g_neg = 0.0
            start_pos = start_neg = i + 1
        i += 1
    return ChangePointReport(points=tuple(points), threshold_sigma=threshold, drift_sigma=drift)


def compare_segments(x, split: int, min_length: int = 5) -> SegmentComparison:
    """Welch t-test for means and a two-sided F-test for variances of ``x[:split]`` vs ``x[split:]``."""
    x = as_float_array(x)
    left, right = x[:split], x[split:]
    if len(left) < min_length or len(right) < min_length:
        raise SegmentTooShort('segments of {} and {} points, need {} each'.format(len(left), len(right), min_length))
    mean_l, mean_r = float(left.mean()), float(right.mean())
    var_l, var_r = float(left.var(ddof=1)), float(right.var(ddof=1))
    flat_l, flat_r = is_flat(left), is_flat(right)
    if flat_l and flat_r:
        same = abs(mean_r - mean_l) <= 1e-12 * max(1.0, abs(mean_l))
        shift = 0.0 if same else float(np.copysign(np.inf, mean_r - mean_l))
        return SegmentComparison(mean_diff_p=1.0 if same else 0.0, var_diff_p=1.0,
                                 mean_shift_sigma=shift, var_ratio=1.0)
    mean_p = float(sps.ttest_ind(left, right, equal_var=False).pvalue)
    if flat_l:
        var_ratio, var_p = float('inf'), 0.0
    else:
        var_ratio = var_r / var_l
        f = sps.f(len(right) - 1, len(left) - 1)
        var_p = float(min(1.0, 2.0 * min(f.cdf(var_ratio), f.sf(var_ratio))))
    scale = float(left.std()) if not flat_l else float(right.std())
    return SegmentComparison(mean_diff_p=mean_p, var_diff_p=var_p,
                             mean_shift_sigma=(mean_r - mean_l) / scale, var_ratio=var_ratio)


def regime_expand(x, change_index: int, reference=TOOL_CONFIG['regime_reference'],
                  chunk=TOOL_CONFIG['regime_chunk'], min_reference=TOOL_CONFIG['regime_min_reference'],
                  alpha=TOOL_CONFIG['regime_alpha']) -> Interval:
    """Grow the interval starting at ``change_index`` chunk by chunk while it still differs from the reference."""
    x = as_float_array(x)
    n = len(x)
    assert 0 <= change_index < n, 'change index {} outside series of {}'.format(change_index, n)
    ref = x[max(0, change_index - reference):change_index]
    if len(ref) < min_reference:
        raise PrefixTooShort('only {} reference points before {}, need {}'.format(len(ref), change_index, min_reference))
    end = None
    for lo in range(change_index, n, chunk):
        part = x[lo:min(lo + chunk, n)]
        if len(part) < 5:
            break
        if not compare_segments(np.concatenate([ref, part]), len(ref)).differs(alpha):
            break
        end = lo + len(part) - 1
    if end is None:
        end = min(change_index + chunk - 1, n - 1)
    return Interval(int(change_index), int(end))
