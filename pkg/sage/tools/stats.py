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
"""Distribution statistics, global outliers and multi-scale local context."""

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats as sps

from sage.config import TOOL_CONFIG
from sage.core.errors import TooShort
from sage.utils.common import as_float_array, is_flat


@dataclass(frozen=True)
class StatsSummary:
    mean: float
    std: float
    skewness: float
    kurtosis: float
    min: float
    max: float

    def render(self) -> str:
        return 'mean={:.4g} std={:.4g} skew={:.3g} kurt={:.3g} min={:.4g} max={:.4g}'.format(
            self.mean, self.std, self.skewness, self.kurtosis, self.min, self.max)


@dataclass(frozen=True)
class OutlierReport:
    z_indices: Tuple[Tuple[int, float], ...]
    iqr_indices: Tuple[int, ...]
    z_threshold: float
    iqr_multiplier: float
    q1: float = 0.0
    q3: float = 0.0

    def render(self, limit: int = 10) -> str:
        z = ', '.join('{}(z={:.2f})'.format(i, v) for i, v in self.z_indices[:limit])
        iqr = ', '.join(str(i) for i in self.iqr_indices[:limit])
        return '|z|>={} hits {}: [{}]; IQR x{} fences [{:.4g}, {:.4g}] hits {}: [{}]'.format(
            self.z_threshold, len(self.z_indices), z, self.iqr_multiplier,
            self.q1 - self.iqr_multiplier * (self.q3 - self.q1),
            self.q3 + self.iqr_multiplier * (self.q3 - self.q1),
            len(self.iqr_indices), iqr)


@dataclass(frozen=True)
class RollingReport:
    windows: Tuple[int, ...]
    means: Dict[int, np.ndarray]
    stds: Dict[int, np.ndarray]
    # (index, local z, scale) keeping the largest |z| per index
    candidates: Tuple[Tuple[int, float, int], ...]
    threshold: float

    def render(self, limit: int = 10) -> str:
        hits = ', '.join('{}(z={:.2f}@w{})'.format(i, z, w) for i, z, w in self.candidates[:limit])
        return 'scales {} local |z|>={} hits {}: [{}]'.format(
            list(self.windows), self.threshold, len(self.candidates), hits)


def statistics(x) -> StatsSummary:
    x = as_float_array(x)
    assert len(x) >= 1, 'statistics of an empty sequence'
    mean, std = float(np.mean(x)), float(np.std(x))
    if is_flat(x, std):
        skewness, kurtosis = 0.0, 0.0
    else:
        skewness = float(sps.skew(x, bias=True))
        kurtosis = float(sps.kurtosis(x, fisher=True, bias=True))
    return StatsSummary(mean=mean, std=std, skewness=skewness, kurtosis=kurtosis,
                        min=float(np.min(x)), max=float(np.max(x)))


def detect_outliers(x, z_threshold=TOOL_CONFIG['z_threshold'],
                    iqr_multiplier=TOOL_CONFIG['iqr_multiplier']) -> OutlierReport:
    x = as_float_array(x)
    if len(x) < 4:
        raise TooShort('detect_outliers', len(x), 4)
    mean, std = float(np.mean(x)), float(np.std(x))
    z_hits = []
    if not is_flat(x, std):
        z = (x - mean) / std
        z_hits = [(int(i), float(z[i])) for i in np.flatnonzero(np.abs(z) >= z_threshold)]
    q1, q3 = np.percentile(x, [25, 75])
    iqr = q3 - q1
    lo, hi = q1 - iqr_multiplier * iqr, q3 + iqr_multiplier * iqr
    iqr_hits = tuple(int(i) for i in np.flatnonzero((x < lo) | (x > hi)))
    return OutlierReport(z_indices=tuple(z_hits), iqr_indices=iqr_hits, z_threshold=z_threshold,
                         iqr_multiplier=iqr_multiplier, q1=float(q1), q3=float(q3))


def _centered_moments(x: np.ndarray, half: int) -> Tuple[np.ndarray, np.ndarray]:
    """Leave-one-out mean/std over symmetric neighborhoods truncated at the edges."""
    n = len(x)
    idx = np.arange(n)
    radius = np.minimum(half, np.minimum(idx, n - 1 - idx))
    centered = x - x.mean()
    c1 = np.concatenate([[0.0], np.cumsum(centered)])
    c2 = np.concatenate([[0.0], np.cumsum(centered * centered)])
    lo, hi = idx - radius, idx + radius + 1
    count = 2 * radius
    s1 = c1[hi] - c1[lo] - centered
    s2 = c2[hi] - c2[lo] - centered * centered
    safe = np.maximum(count, 1)
    mean = s1 / safe
    var = np.maximum(s2 / safe - mean * mean, 0.0)
    mean = np.where(count > 0, mean, 0.0) + x.mean()
    std = np.where(count > 1, np.sqrt(var), 0.0)
    return mean, std


def rolling_statistics(x, windows: Sequence[int] = tuple(TOOL_CONFIG['rolling_windows']),
                       threshold=TOOL_CONFIG['local_z_threshold']) -> RollingReport:
    """Multi-scale local context.

    Each point is compared with the ``w - 1`` neighbours centred on it
    (``w // 2`` per side, truncated symmetrically near the edges); a point is
    a contextual candidate when its local |z| reaches ``threshold`` at any
    scale with non-zero local std.
    """
    x = as_float_array(x)
    windows = tuple(int(w) for w in windows)
    for w in windows:
        assert w >= 1, 'rolling window must be positive'
        if w > len(x):
            raise TooShort('rolling_statistics(w={})'.format(w), len(x), w)
    scale = max(1.0, float(np.max(np.abs(x))))
    means, stds, best = {}, {}, {}
    for w in windows:
        mean, std = _centered_moments(x, max(1, w // 2))
        means[w], stds[w] = mean, std
        live = std > 1e-12 * scale
        z = np.zeros_like(x)
        z[live] = (x[live] - mean[live]) / std[live]
        for i in np.flatnonzero(np.abs(z) >= threshold):
            i = int(i)
            if i not in best or abs(z[i]) > abs(best[i][0]):
                best[i] = (float(z[i]), w)
    candidates = tuple((i, z, w) for i, (z, w) in sorted(best.items()))
    return RollingReport(windows=windows, means=means, stds=stds, candidates=candidates, threshold=threshold)


def rolling_std(x, window: int) -> np.ndarray:
    """Centred rolling population std including the point itself."""
    return pd.Series(as_float_array(x)).rolling(window, center=True, min_periods=1).std(ddof=0).to_numpy()


def rolling_range(x, window: int) -> np.ndarray:
    """Centred rolling peak-to-peak spread."""
    rolled = pd.Series(as_float_array(x)).rolling(window, center=True, min_periods=1)
    return (rolled.max() - rolled.min()).to_numpy()
