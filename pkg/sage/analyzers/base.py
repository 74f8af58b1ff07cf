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
"""Evidence representation shared by the four family analyzers."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

from sage.config import ANALYZER_CONFIG
from sage.core.intervals import merge_intervals
from sage.core.types import AnomalyFamily, AnomalyType, Interval, family_types
from sage.tools.imaging import ImageMatrix


class Candidate(NamedTuple):
    interval: Interval
    types: Tuple[AnomalyType, ...]
    strength: float
    note: str = ''

    def to_json(self) -> dict:
        return {'start': self.interval.start, 'end': self.interval.end,
                'types': [int(t) for t in self.types],
                'strength': round(float(self.strength), 4), 'note': self.note}


@dataclass(frozen=True, eq=False)
class EvidenceBundle:
    family: AnomalyFamily
    candidates: Tuple[Candidate, ...] = ()
    tool_summaries: Dict[str, str] = field(default_factory=dict)
    images: Tuple[ImageMatrix, ...] = ()
    summary: str = ''
    soft_failure: Optional[str] = None

    def __post_init__(self):
        allowed = set(family_types(self.family))
        for c in self.candidates:
            assert c.types and set(c.types) <= allowed, \
                '{} bundle carries foreign types {}'.format(self.family.value, list(c.types))
        object.__setattr__(self, 'candidates', tuple(self.candidates))
        object.__setattr__(self, 'images', tuple(self.images))

    def to_json(self) -> dict:
        """The payload embedded in detector prompts; images are described, not inlined."""
        return {'family': self.family.value,
                'candidates': [c.to_json() for c in self.candidates],
                'tool_summaries': dict(sorted(self.tool_summaries.items())),
                'images': [image.describe() for image in self.images],
                'summary': self.summary,
                'soft_failure': self.soft_failure}

    def overlapping(self, interval: Interval) -> List[Candidate]:
        return [c for c in self.candidates if c.interval.overlaps(interval)]


def merge_candidates(candidates: Iterable[Candidate], gap: int = ANALYZER_CONFIG['merge_gap']) -> List[Candidate]:
    """Merge candidates whose intervals lie within ``gap`` points.

    Merged types keep strongest-first order, strength is the maximum and
    the notes of the members are joined.
    """
    candidates = list(candidates)
    merged = []
    for span in merge_intervals([c.interval for c in candidates], gap):
        members = sorted((c for c in candidates if span.start <= c.interval.start and c.interval.end <= span.end),
                         key=lambda c: -c.strength)
        types = tuple(dict.fromkeys(t for c in members for t in c.types))
        notes = '; '.join(dict.fromkeys(c.note for c in members if c.note))
        merged.append(Candidate(interval=span, types=types, strength=max(c.strength for c in members), note=notes))
    return merged


def check_window(candidates: Iterable[Candidate], n: int) -> Tuple[Candidate, ...]:
    candidates = tuple(candidates)
    for c in candidates:
        assert 0 <= c.interval.start <= c.interval.end < n, \
            'candidate {} outside window of {}'.format(tuple(c.interval), n)
    return candidates


def soft_bundle(family: AnomalyFamily, reason: str, tool_summaries: Optional[Dict[str, str]] = None) -> EvidenceBundle:
    return EvidenceBundle(family=family, tool_summaries=tool_summaries or {},
                          summary='{} analysis skipped: {}'.format(family.value, reason), soft_failure=reason)


def describe(family: AnomalyFamily, candidates: Tuple[Candidate, ...]) -> str:
    if not candidates:
        return 'no {} anomaly candidates'.format(family.value.lower())
    parts = ['[{}-{}] types {} strength {:.2f}'.format(c.interval.start, c.interval.end,
                                                       [int(t) for t in c.types], c.strength)
             for c in candidates]
    return '{} {} candidate(s): {}'.format(len(candidates), family.value.lower(), '; '.join(parts))
