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
"""Banded dynamic time warping and the LB_Keogh lower bound."""

import math

import numpy as np
from numba import njit
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from sage.config import ICL_CONFIG
from sage.core.errors import BandTooNarrow, LengthMismatch
from sage.utils.common import as_float_array


def band_width(length: int, fraction: float = ICL_CONFIG['band_fraction']) -> int:
    """Sakoe-Chiba half width, ``ceil(fraction * length)``.

    Examples:
        >>> band_width(400)
        40
        >>> band_width(5)
        1

    """
    return int(math.ceil(round(fraction * length, 9)))


@njit(cache=True)
def _dtw_cost(a, b, band):
    n, m = a.shape[0], b.shape[0]
    inf = np.inf
    prev = np.full(m + 1, inf)
    cur = np.full(m + 1, inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur[:] = inf
        lo = max(1, i - band)
        hi = min(m, i + band)
        for j in range(lo, hi + 1):
            d = a[i - 1] - b[j - 1]
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = d * d + best
        prev, cur = cur, prev
    return prev[m]


def dtw(a, b, band: int) -> float:
    """Banded DTW with squared local cost; returns the square root of the path cost.

    Steps are match, insertion and deletion; cells with ``|i - j| > band``
    are unreachable.
    """
    a, b = as_float_array(a), as_float_array(b)
    if band < abs(len(a) - len(b)):
        raise BandTooNarrow('band {} cannot align lengths {} and {}'.format(band, len(a), len(b)))
    assert len(a) and len(b), 'dtw of an empty sequence'
    return math.sqrt(float(_dtw_cost(a, b, int(band))))


def envelope(candidate, band: int):
    """Upper and lower running extremes over ``[i - band, i + band]``."""
    candidate = as_float_array(candidate)
    size = 2 * int(band) + 1
    return (maximum_filter1d(candidate, size=size, mode='nearest'),
            minimum_filter1d(candidate, size=size, mode='nearest'))


def lb_keogh(query, candidate, band: int, candidate_envelope=None) -> float:
    """Lower bound of ``dtw(query, candidate, band)`` for equal-length inputs."""
    query, candidate = as_float_array(query), as_float_array(candidate)
    if len(query) != len(candidate):
        raise LengthMismatch('lb_keogh needs equal lengths, got {} and {}'.format(len(query), len(candidate)))
    upper, lower = candidate_envelope if candidate_envelope is not None else envelope(candidate, band)
    above = np.maximum(query - upper, 0.0)
    below = np.maximum(lower - query, 0.0)
    return math.sqrt(float(np.sum(above * above + below * below)))
