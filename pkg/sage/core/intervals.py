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
from typing import Iterable, List

import numpy as np

from sage.core.types import Interval


def merge_intervals(intervals: Iterable, gap: int) -> List[Interval]:
    """Merge inclusive intervals separated by at most ``gap`` unflagged points.

    Examples:
        >>> merge_intervals([(3, 5), (7, 9)], 2)
        [Interval(start=3, end=9)]
        >>> merge_intervals([(0, 0), (10, 12), (13, 13)], 0)
        [Interval(start=0, end=0), Interval(start=10, end=13)]

    """
    assert gap >= 0, 'gap must be non-negative'
    ordered = sorted(Interval(int(s), int(e)) for s, e in intervals)
    merged = []
    for start, end in ordered:
        if merged and start <= merged[-1].end + gap + 1:
            if end > merged[-1].end:
                merged[-1] = Interval(merged[-1].start, end)
        else:
            merged.append(Interval(start, end))
    return merged


def labels_to_segments(labels) -> List[Interval]:
    """Maximal runs of ones as sorted inclusive intervals."""
    labels = np.asarray(labels, dtype=np.int8)
    if labels.size == 0:
        return []
    padded = np.concatenate([[0], labels, [0]])
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return [Interval(int(s), int(e)) for s, e in zip(starts, ends)]


def rasterize(intervals: Iterable, n: int) -> np.ndarray:
    """Inverse of :func:`labels_to_segments` for intervals inside ``[0, n)``."""
    labels = np.zeros(n, dtype=np.int8)
    for start, end in intervals:
        labels[max(0, start):min(n, end + 1)] = 1
    return labels


def indices_to_intervals(indices: Iterable[int], gap: int = 0) -> List[Interval]:
    return merge_intervals([(i, i) for i in indices], gap)
