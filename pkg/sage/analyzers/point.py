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
"""Point family: global outliers (Type 1) and contextual outliers (Type 2)."""

from typing import Optional

from sage.analyzers.base import Candidate, EvidenceBundle, check_window, describe, merge_candidates
from sage.config import ANALYZER_CONFIG, TOOL_CONFIG
from sage.core.errors import TooShort
from sage.core.types import AnomalyFamily, AnomalyType, Interval, Series
from sage.represent.summary import CompressedSummary
from sage.tools.imaging import line_chart
from sage.tools.stats import detect_outliers, rolling_statistics, statistics


def point_analyze(window: Series, summary: Optional[CompressedSummary] = None,
                  use_vision: bool = True) -> EvidenceBundle:
    x = window.values
    n = len(x)
    if n < 4:
        raise TooShort('point_analyze', n, 4)
    stats = statistics(x)
    outliers = detect_outliers(x)
    scales = [w for w in TOOL_CONFIG['rolling_windows'] if w <= n]
    rolling = rolling_statistics(x, scales) if scales else None

    candidates = []
    global_hits = set()
    for i, z in outliers.z_indices:
        global_hits.add(i)
        candidates.append(Candidate(Interval(i, i), (AnomalyType.GLOBAL_POINT,), abs(z),
                                    'global z={:.2f}'.format(z)))
    if rolling is not None:
        for i, z, w in rolling.candidates:
            if i in global_hits:
                continue
            candidates.append(Candidate(Interval(i, i), (AnomalyType.CONTEXTUAL_POINT,), abs(z),
                                        'local z={:.2f} at scale {}'.format(z, w)))
    candidates = check_window(merge_candidates(candidates, ANALYZER_CONFIG['merge_gap']), n)

    tool_summaries = {'statistics': stats.render(), 'detect_outliers': outliers.render()}
    if rolling is not None:
        tool_summaries['rolling_statistics'] = rolling.render()
    images = (line_chart(x),) if use_vision else ()
    return EvidenceBundle(family=AnomalyFamily.POINT, candidates=candidates, tool_summaries=tool_summaries,
                          images=images, summary=describe(AnomalyFamily.POINT, candidates))
