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
"""Evidence aggregation: pooled analyzer candidates to scored anomaly records."""

from dataclasses import dataclass, field
from typing import FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from sage.agents.backends import CompletionBackend
from sage.agents.parsing import ParsedCandidate, parse_detector_response
from sage.agents.prompts import render_prompt
from sage.analyzers.base import EvidenceBundle
from sage.config import ANALYZER_CONFIG, RUBRIC_CONFIG
from sage.core.errors import UnparseableResponse
from sage.core.intervals import merge_intervals
from sage.core.types import FAMILY_ORDER, AnomalyFamily, AnomalyRecord, AnomalyType, Interval, sort_records
from sage.detector.rubric import rule_score
from sage.represent.summary import CompressedSummary
from sage.tools.imaging import ImageMatrix
from sage.utils.file_utils import logging


@dataclass(frozen=True, eq=False)
class DetectorInput:
    offset: int
    length: int
    summary: CompressedSummary
    bundles: Tuple[EvidenceBundle, ...]
    references: Tuple = ()
    images: Tuple[ImageMatrix, ...] = field(default_factory=tuple)

    def __post_init__(self):
        bundles = tuple(self.bundles)
        assert tuple(b.family for b in bundles) == FAMILY_ORDER, \
            'detector input needs one bundle per family in {} order'.format([f.value for f in FAMILY_ORDER])
        assert self.length >= 1 and self.offset >= 0, 'bad window geometry'
        object.__setattr__(self, 'bundles', bundles)
        object.__setattr__(self, 'references', tuple(self.references))
        object.__setattr__(self, 'images', tuple(self.images))


class PooledCandidate(NamedTuple):
    interval: Interval
    types: Tuple[AnomalyType, ...]
    strength: float
    families: Tuple[AnomalyFamily, ...]
    note: str

    def to_json(self) -> dict:
        return {'start': self.interval.start, 'end': self.interval.end,
                'types': [int(t) for t in self.types], 'strength': round(float(self.strength), 4),
                'families': [f.value for f in self.families], 'note': self.note}


class ScoredCandidate(NamedTuple):
    interval: Interval
    raw_score: int
    types: Tuple[AnomalyType, ...]
    evidence: str
    families: FrozenSet[AnomalyFamily]

    def to_record(self, offset: int = 0) -> AnomalyRecord:
        families = tuple(f for f in FAMILY_ORDER if f in self.families)
        shifted = self.interval.shift(offset)
        return AnomalyRecord(start=shifted.start, end=shifted.end, raw_score=self.raw_score, types=self.types,
                             evidence=self.evidence, families=families)


def pool_candidates(bundles: Sequence[EvidenceBundle], gap: int = ANALYZER_CONFIG['merge_gap']) -> List[PooledCandidate]:
    """Merge the candidates of all bundles whose intervals lie within ``gap`` points."""
    members = [(c, b.family) for b in bundles for c in b.candidates]
    pooled = []
    for span in merge_intervals([c.interval for c, _ in members], gap):
        inside = sorted(((c, f) for c, f in members if span.start <= c.interval.start and c.interval.end <= span.end),
                        key=lambda m: -m[0].strength)
        types = tuple(dict.fromkeys(t for c, _ in inside for t in c.types))
        families = tuple(f for f in FAMILY_ORDER if any(g == f for _, g in inside))
        note = '; '.join(dict.fromkeys('{}: {}'.format(f.value, c.note) for c, f in inside if c.note))
        pooled.append(PooledCandidate(span, types, max(c.strength for c, _ in inside), families, note))
    return pooled


def score_rule(bundles: Sequence[EvidenceBundle], pooled: Sequence[PooledCandidate],
               multi_analyzer: bool = True) -> List[ScoredCandidate]:
    scored = []
    for p in pooled:
        score = rule_score(p.interval, p.strength, p.families, bundles, multi_analyzer)
        evidence = '{} (strength {:.2f})'.format(p.note or 'analyzer candidate', p.strength)
        scored.append(ScoredCandidate(p.interval, score, p.types, evidence, frozenset(p.families)))
    return scored


def _request(backend: CompletionBackend, prompt) -> List[ParsedCandidate]:
    completion = backend.complete(prompt)
    logging.info('{} prompt ~{} tokens, answer {} tokens'.format(
        prompt.role, completion.prompt_tokens, completion.completion_tokens))
    return parse_detector_response(completion.text)


def completion_score(data: DetectorInput, pooled: Sequence[PooledCandidate],
                     backend: CompletionBackend) -> List[ScoredCandidate]:
    """Score through a completion backend; one repair retry on an unparseable answer."""
    kwargs = dict(bundles=data.bundles, references=data.references, images=data.images, candidates=pooled)
    try:
        parsed = _request(backend, render_prompt('Detector', data.summary.text, **kwargs))
    except UnparseableResponse as e:
        logging.warning('detector answer unparseable, retrying once: {}'.format(e))
        parsed = _request(backend, render_prompt('Detector', data.summary.text, repair=True, **kwargs))
    scored = []
    for item in parsed:
        if item.interval.start >= data.length:
            logging.warning('dropping detector entry [{}, {}] outside the window of {}'.format(
                item.interval.start, item.interval.end, data.length))
            continue
        interval = item.interval.clip(data.length)
        support = [p for p in pooled if p.interval.overlaps(interval)]
        evidence = '; '.join(p.note for p in support if p.note) or 'reported from raw data or chart'
        families = frozenset(t.family for t in item.types)
        scored.append(ScoredCandidate(interval, item.raw_score, item.types, evidence, families))
    return scored


def detect(data: DetectorInput, backend: Optional[CompletionBackend] = None,
           merge_gap: int = ANALYZER_CONFIG['merge_gap'], multi_analyzer: bool = True) -> List[AnomalyRecord]:
    """Records of one window in global coordinates, sorted by start.

    Candidates scoring below the emit threshold never become records.
    """
    pooled = pool_candidates(data.bundles, merge_gap)
    if backend is None or not backend.serves_completions:
        scored = score_rule(data.bundles, pooled, multi_analyzer)
    else:
        scored = completion_score(data, pooled, backend)
    records = [s.to_record(data.offset) for s in scored if s.raw_score >= RUBRIC_CONFIG['emit_threshold']]
    return sort_records(records)


def threshold(records: Sequence[AnomalyRecord], tau: float, n: int) -> np.ndarray:
    """Point predictions: covered by a record with confidence >= tau."""
    pred = np.zeros(n, dtype=np.int8)
    for r in records:
        if r.confidence >= tau and r.start < n:
            pred[r.start:min(r.end, n - 1) + 1] = 1
    return pred
