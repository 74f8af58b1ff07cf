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
"""SAX words and recurrence quantification."""

import string
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numba import njit
from scipy.spatial.distance import cdist
from scipy.stats import norm

from sage.config import TOOL_CONFIG
from sage.core.errors import TooShort
from sage.utils.common import as_float_array, downsample_mean, is_flat, znorm


@dataclass(frozen=True)
class SaxWord:
    symbols: str
    ranks: Tuple[int, ...]
    breakpoints: Tuple[float, ...]
    # (segment index, first original index of that segment)
    breaks: Tuple[Tuple[int, int], ...]
    segment_starts: Tuple[int, ...]
    paa: np.ndarray

    def render(self) -> str:
        return 'SAX {} ({} segments); breaks at segments {}'.format(
            self.symbols, len(self.symbols), [s for s, _ in self.breaks])


@dataclass(frozen=True)
class RecurrenceReport:
    recurrence_rate: float
    determinism: float
    laminarity: float
    epsilon: float
    matrix: Optional[np.ndarray] = None

    def render(self) -> str:
        return 'RR={:.3f} DET={:.3f} LAM={:.3f} (eps={:.4g})'.format(
            self.recurrence_rate, self.determinism, self.laminarity, self.epsilon)


def paa(x, segments: int) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """Piecewise aggregate means; the remainder goes to the leading pieces."""
    x = as_float_array(x)
    sizes = np.full(segments, len(x) // segments)
    sizes[:len(x) % segments] += 1
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    means = np.add.reduceat(x, starts) / sizes
    return means, tuple(int(s) for s in starts)


def gaussian_breakpoints(alphabet: int) -> np.ndarray:
    return norm.ppf(np.arange(1, alphabet) / alphabet)


def sax(x, segments: int, alphabet: int = TOOL_CONFIG['sax_alphabet'],
        break_ranks: int = TOOL_CONFIG['sax_break_ranks']) -> SaxWord:
    assert 2 <= alphabet <= 26, 'alphabet size must lie in [2, 26]'
    x = as_float_array(x)
    if segments < 1 or segments > len(x):
        raise TooShort('sax(segments={})'.format(segments), len(x), segments)
    cuts = gaussian_breakpoints(alphabet)
    means, starts = paa(znorm(x), segments)
    if is_flat(x):
        ranks = np.full(segments, alphabet // 2)
    else:
        ranks = np.searchsorted(cuts, means, side='right')
    symbols = ''.join(string.ascii_lowercase[r] for r in ranks)
    jumps = np.flatnonzero(np.abs(np.diff(ranks)) >= break_ranks) + 1
    breaks = tuple((int(j), starts[j]) for j in jumps)
    return SaxWord(symbols=symbols, ranks=tuple(int(r) for r in ranks), breakpoints=tuple(float(c) for c in cuts),
                   breaks=breaks, segment_starts=starts, paa=means)


@njit(cache=True)
def _line_points(rec, vertical):
    """Recurrent points lying on diagonal (or vertical) lines of length >= 2, main diagonal excluded."""
    n = rec.shape[0]
    total = 0
    if vertical:
        for j in range(n):
            run = 0
            for i in range(n + 1):
                if i < n and i != j and rec[i, j]:
                    run += 1
                else:
                    if run >= 2:
                        total += run
                    run = 0
    else:
        for k in range(1, n):
            run = 0
            for i in range(n - k + 1):
                if i < n - k and rec[i, i + k]:
                    run += 1
                else:
                    if run >= 2:
                        total += run
                    run = 0
        total *= 2
    return total


def recurrence(x, percentile: float = TOOL_CONFIG['recurrence_percentile'],
               max_length: int = TOOL_CONFIG['recurrence_max_length'], dimension: int = 1, delay: int = 1,
               keep_matrix: bool = True) -> RecurrenceReport:
    """Recurrence plot with Chebyshev distances between delay vectors.

    The default ``dimension=1`` compares raw values directly; a sine then
    also recurs with its mirrored half-cycle, which shows up as isolated
    points off the diagonal lines.
    """
    assert dimension >= 1 and delay >= 1, 'embedding dimension and delay must be positive'
    x = downsample_mean(as_float_array(x), max_length)
    n = len(x) - (dimension - 1) * delay
    if n < 10:
        raise TooShort('recurrence', len(x), 10 + (dimension - 1) * delay)
    vectors = np.stack([x[k * delay:k * delay + n] for k in range(dimension)], axis=1)
    dist = cdist(vectors, vectors, metric='chebyshev')
    # exactly ceil(p * pairs) recurrent pairs; ties go to the smaller lag, then the earlier row
    rows, cols = np.triu_indices(n, k=1)
    pair_dist = dist[rows, cols]
    order = np.lexsort((rows, cols - rows, pair_dist))
    chosen = order[:int(np.ceil(round(percentile * len(order), 9)))]
    rec = np.eye(n, dtype=bool)
    rec[rows[chosen], cols[chosen]] = True
    rec[cols[chosen], rows[chosen]] = True
    epsilon = float(pair_dist[chosen[-1]]) if len(chosen) else 0.0
    off = ~np.eye(n, dtype=bool)
    recurrent = int(rec[off].sum())
    rate = recurrent / float(n * (n - 1))
    if recurrent == 0:
        det = lam = 0.0
    else:
        det = _line_points(rec, False) / float(recurrent)
        lam = _line_points(rec, True) / float(recurrent)
    return RecurrenceReport(recurrence_rate=float(rate), determinism=float(det), laminarity=float(lam),
                            epsilon=epsilon, matrix=rec if keep_matrix else None)
