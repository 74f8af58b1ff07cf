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
"""Moving-average seasonal decomposition and differencing."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from sage.core.errors import NoPeriodFound, PeriodTooLarge, TooShort
from sage.tools.spectral import fft_spectrum
from sage.utils.common import as_float_array
from sage.utils.file_utils import logging


@dataclass(frozen=True)
class Decomposition:
    trend: np.ndarray
    seasonal: np.ndarray
    residual: np.ndarray
    period: Optional[int]
    period_found: bool = True

    def render(self) -> str:
        spread = float(np.std(self.seasonal))
        return 'period {} trend range [{:.4g}, {:.4g}] seasonal std {:.4g} residual std {:.4g}'.format(
            self.period, float(self.trend.min()), float(self.trend.max()), spread, float(np.std(self.residual)))


def moving_average(x, window: int) -> np.ndarray:
    """Centred moving average over an odd-extended copy of ``x``.

    Even windows use the 2 x MA weights ``[.5, 1, ..., 1, .5] / window`` so
    the filter stays centred.
    """
    x = as_float_array(x)
    assert window >= 1, 'moving average window must be positive'
    if window == 1:
        return x.copy()
    half = window // 2
    if window % 2 == 0:
        kernel = np.ones(window + 1)
        kernel[0] = kernel[-1] = 0.5
        kernel /= window
    else:
        kernel = np.full(window, 1.0 / window)
    assert len(x) > half, 'series of {} points too short for window {}'.format(len(x), window)
    left = 2 * x[0] - x[half:0:-1]
    right = 2 * x[-1] - x[-2:-half - 2:-1]
    padded = np.concatenate([left, x, right])
    return np.convolve(padded, kernel, mode='valid')


def decompose(x, period: Optional[int] = None, strict: bool = False) -> Decomposition:
    """Additive trend/seasonal/residual split with FFT period detection.

    When no period is given and none is detected the seasonal part is zero
    and the trend is a moving average over ``max(3, n // 10)`` points; with
    ``strict=True`` that case raises NoPeriodFound instead.
    """
    x = as_float_array(x)
    n = len(x)
    found = True
    if period is None:
        period = fft_spectrum(x).dominant_period
        if period is None:
            if strict:
                raise NoPeriodFound('no dominant FFT peak in {} points'.format(n))
            logging.debug('decompose: no period detected, trend-only split')
            found = False
    else:
        assert period >= 1, 'period must be positive'
        if n < 2 * period:
            raise PeriodTooLarge('period {} needs at least {} points, got {}'.format(period, 2 * period, n))
    if not found:
        if n < 3:
            raise TooShort('decompose', n, 3)
        trend = moving_average(x, min(max(3, n // 10), n - 1))
        seasonal = np.zeros(n)
        return Decomposition(trend=trend, seasonal=seasonal, residual=x - trend - seasonal,
                             period=None, period_found=False)
    trend = moving_average(x, period)
    detrended = x - trend
    phase = np.arange(n) % period
    profile = np.bincount(phase, weights=detrended, minlength=period) / np.bincount(phase, minlength=period)
    profile -= profile.mean()
    seasonal = profile[phase]
    return Decomposition(trend=trend, seasonal=seasonal, residual=x - trend - seasonal, period=int(period))


def difference(x, order: int = 1) -> np.ndarray:
    """Forward difference of order 1 or 2.

    Examples:
        >>> difference([1, 3, 6], 2).tolist()
        [1.0]

    """
    assert order in (1, 2), 'difference order must be 1 or 2'
    x = as_float_array(x)
    if len(x) <= order:
        raise TooShort('difference(order={})'.format(order), len(x), order + 1)
    return np.diff(x, n=order)
