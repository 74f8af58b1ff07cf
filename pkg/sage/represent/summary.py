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
"""Token-budgeted text view of a window.

The summary is what completion backends read; the analyzers keep working
on the raw floating-point window.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from sage.core.types import Interval, Series
from sage.utils.common import round_half_away

SEGMENTS = 4


def estimate_tokens(text: str) -> int:
    """Approximate token count as ceil(characters / 4).

    Examples:
        >>> estimate_tokens('')
        0
        >>> estimate_tokens('abcdefghi')
        3

    """
    return (len(text) + 3) // 4


@dataclass(frozen=True)
class CompressedSummary:
    length: int
    min: float
    max: float
    mean: float
    std: float
    segment_stats: Tuple[Tuple[Interval, float, float], ...]
    sampled: Tuple[Tuple[int, int], ...]
    stride: int
    estimated_tokens: int
    text: str

    def to_json(self) -> dict:
        return {'length': self.length, 'min': self.min, 'max': self.max,
                'mean': self.mean, 'std': self.std, 'stride': self.stride,
                'segments': [[s.start, s.end, m, sd] for s, m, sd in self.segment_stats],
                'sampled': [list(p) for p in self.sampled],
                'estimated_tokens': self.estimated_tokens}


def _fmt(value: float) -> str:
    return '{:.4g}'.format(value)


def _header(n, lo, hi, mean, std):
    return 'n={} min={} max={} mean={} std={}'.format(n, _fmt(lo), _fmt(hi), _fmt(mean), _fmt(std))


def _segment_lines(segment_stats):
    return ['seg {}-{}: mean={} std={}'.format(s.start, s.end, _fmt(m), _fmt(sd))
            for s, m, sd in segment_stats]


def _sample(values: np.ndarray, stride: int, must_keep) -> List[Tuple[int, int]]:
    idx = set(range(0, len(values), stride))
    idx.update(must_keep)
    idx = np.array(sorted(idx), dtype=np.int64)
    rounded = round_half_away(values[idx])
    return [(int(i), int(v)) for i, v in zip(idx, rounded)]


def _render(header, seg_lines, sampled):
    samples = 'samples: ' + ' '.join('{}:{}'.format(i, v) for i, v in sampled)
    return '\n'.join([header] + seg_lines + [samples])


def full_listing(values) -> str:
    """Uncompressed ``idx:value`` listing; the baseline the summary is measured against."""
    return ' '.join('{}:{!r}'.format(i, float(v)) for i, v in enumerate(np.asarray(values, dtype=np.float64)))


def summarize(window: Series, token_budget: int = 300) -> CompressedSummary:
    """Build the compressed summary with the smallest sampling stride that fits the budget."""
    assert token_budget >= 50, 'token budget {} below 50'.format(token_budget)
    values = np.asarray(window.values, dtype=np.float64)
    n = len(values)
    lo, hi = float(values.min()), float(values.max())
    mean, std = float(values.mean()), float(values.std())
    extrema = (int(np.argmin(values)), int(np.argmax(values)))
    segment_stats = tuple((Interval(int(part[0]), int(part[-1])), float(values[part].mean()), float(values[part].std()))
                          for part in np.array_split(np.arange(n), min(SEGMENTS, n)))
    header = _header(n, lo, hi, mean, std)
    seg_lines = _segment_lines(segment_stats)
    text, sampled, stride = None, None, n
    for candidate in range(1, n + 1):
        sampled = _sample(values, candidate, extrema)
        text = _render(header, seg_lines, sampled)
        if estimate_tokens(text) <= token_budget:
            stride = candidate
            break
    else:
        # even one sample per window is too long: drop the segment lines from the text
        text = _render(header, [], sampled)
    return CompressedSummary(length=n, min=lo, max=hi, mean=mean, std=std,
                             segment_stats=segment_stats, sampled=tuple(sampled), stride=stride,
                             estimated_tokens=estimate_tokens(text), text=text)
