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
"""Domain types shared by every stage of the pipeline."""

import enum
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np


def _frozen_array(values, dtype):
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


class AnomalyFamily(str, enum.Enum):
    POINT = 'Point'
    STRUCTURAL = 'Structural'
    SEASONAL = 'Seasonal'
    PATTERN = 'Pattern'


FAMILY_ORDER = (AnomalyFamily.POINT, AnomalyFamily.STRUCTURAL,
                AnomalyFamily.SEASONAL, AnomalyFamily.PATTERN)


class AnomalyType(enum.IntEnum):
    GLOBAL_POINT = 1
    CONTEXTUAL_POINT = 2
    AMPLITUDE_CHANGE = 3
    SEASONALITY_ANOMALY = 4
    TREND_CHANGE = 5
    MEAN_CHANGE_POINT = 6
    VARIANCE_CHANGE = 7
    PATTERN_SHIFT = 8
    WAVEFORM_DISTORTION = 9

    @property
    def family(self) -> AnomalyFamily:
        return TYPE_FAMILY[self]

    @property
    def label(self) -> str:
        return TYPE_LABELS[self]


TYPE_FAMILY = {
    AnomalyType.GLOBAL_POINT: AnomalyFamily.POINT,
    AnomalyType.CONTEXTUAL_POINT: AnomalyFamily.POINT,
    AnomalyType.AMPLITUDE_CHANGE: AnomalyFamily.SEASONAL,
    AnomalyType.SEASONALITY_ANOMALY: AnomalyFamily.SEASONAL,
    AnomalyType.TREND_CHANGE: AnomalyFamily.STRUCTURAL,
    AnomalyType.MEAN_CHANGE_POINT: AnomalyFamily.STRUCTURAL,
    AnomalyType.VARIANCE_CHANGE: AnomalyFamily.STRUCTURAL,
    AnomalyType.PATTERN_SHIFT: AnomalyFamily.PATTERN,
    AnomalyType.WAVEFORM_DISTORTION: AnomalyFamily.PATTERN,
}

TYPE_LABELS = {
    AnomalyType.GLOBAL_POINT: 'Global point anomaly',
    AnomalyType.CONTEXTUAL_POINT: 'Contextual point anomaly',
    AnomalyType.AMPLITUDE_CHANGE: 'Amplitude change',
    AnomalyType.SEASONALITY_ANOMALY: 'Seasonality anomaly',
    AnomalyType.TREND_CHANGE: 'Trend change',
    AnomalyType.MEAN_CHANGE_POINT: 'Mean change point',
    AnomalyType.VARIANCE_CHANGE: 'Variance change',
    AnomalyType.PATTERN_SHIFT: 'Pattern shift',
    AnomalyType.WAVEFORM_DISTORTION: 'Waveform distortion',
}


def family_types(family: AnomalyFamily) -> Tuple[AnomalyType, ...]:
    return tuple(t for t in AnomalyType if t.family == family)


class Interval(NamedTuple):
    """Inclusive index range ``[start, end]``."""
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: 'Interval') -> bool:
        return self.start <= other.end and other.start <= self.end

    def shift(self, offset: int) -> 'Interval':
        return Interval(self.start + offset, self.end + offset)

    def clip(self, n: int) -> 'Interval':
        return Interval(max(0, self.start), min(n - 1, self.end))


def make_interval(start, end) -> Interval:
    start, end = int(start), int(end)
    assert start <= end, 'interval start {} after end {}'.format(start, end)
    return Interval(start, end)


@dataclass(frozen=True, eq=False)
class Series:
    """A univariate series with optional timestamps and binary labels.

    Arrays are copied on construction and marked read-only, so a Series
    can be shared between threads.
    """
    values: np.ndarray
    timestamps: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None
    id: str = 'series'

    def __post_init__(self):
        values = _frozen_array(self.values, np.float64)
        assert values.ndim == 1 and len(values) >= 1, 'series {} is empty'.format(self.id)
        object.__setattr__(self, 'values', values)
        if self.timestamps is not None:
            timestamps = _frozen_array(self.timestamps, np.int64)
            assert len(timestamps) == len(values), 'timestamps length mismatch in {}'.format(self.id)
            object.__setattr__(self, 'timestamps', timestamps)
        if self.labels is not None:
            labels = _frozen_array(self.labels, np.int8)
            assert len(labels) == len(values), 'labels length mismatch in {}'.format(self.id)
            assert np.all((labels == 0) | (labels == 1)), 'labels of {} must be 0/1'.format(self.id)
            object.__setattr__(self, 'labels', labels)

    def __len__(self):
        return len(self.values)

    def slice(self, start: int, end: int, id: Optional[str] = None) -> 'Series':
        """Half-open slice ``[start, end)`` carrying labels and timestamps along."""
        return Series(values=self.values[start:end],
                      timestamps=None if self.timestamps is None else self.timestamps[start:end],
                      labels=None if self.labels is None else self.labels[start:end],
                      id=self.id if id is None else id)

    def with_values(self, values, labels=None, id: Optional[str] = None) -> 'Series':
        return Series(values=values,
                      timestamps=self.timestamps,
                      labels=self.labels if labels is None else labels,
                      id=self.id if id is None else id)


@dataclass(frozen=True)
class Dataset:
    name: str
    series: Tuple[Series, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'series', tuple(self.series))
        ids = [s.id for s in self.series]
        assert len(ids) == len(set(ids)), 'duplicate series ids in dataset {}'.format(self.name)

    def __iter__(self):
        return iter(self.series)

    def __len__(self):
        return len(self.series)


@dataclass(frozen=True)
class WindowPlan:
    window: int = 400
    stride: int = 400

    def __post_init__(self):
        assert self.window >= 1 and self.stride >= 1, 'window and stride must be positive'


@dataclass(frozen=True)
class AnomalyRecord:
    """One detected anomaly: inclusive interval, rubric score and types.

    ``types`` is ordered strongest evidence first; ``types[0]`` is the
    representative type used by the type-level evaluation.
    """
    start: int
    end: int
    raw_score: int
    types: Tuple[AnomalyType, ...]
    evidence: str = ''
    families: Tuple[AnomalyFamily, ...] = field(default=())

    def __post_init__(self):
        assert 0 <= self.start <= self.end, 'bad record interval [{}, {}]'.format(self.start, self.end)
        assert 0 <= self.raw_score <= 100, 'raw_score {} out of range'.format(self.raw_score)
        assert len(self.types) > 0, 'record needs at least one type'
        object.__setattr__(self, 'types', tuple(AnomalyType(t) for t in self.types))
        families = self.families or tuple(dict.fromkeys(t.family for t in self.types))
        object.__setattr__(self, 'families', tuple(AnomalyFamily(f) for f in families))

    @property
    def confidence(self) -> float:
        return self.raw_score / 100.0

    @property
    def interval(self) -> Interval:
        return Interval(self.start, self.end)

    def to_json(self) -> dict:
        return {'index': self.start,
                'end_index': self.end,
                'confidence': self.confidence,
                'raw_score': self.raw_score,
                'types': [int(t) for t in self.types],
                'families': [f.value for f in self.families],
                'evidence': self.evidence}

    @classmethod
    def from_json(cls, obj: dict) -> 'AnomalyRecord':
        raw = obj.get('raw_score')
        if raw is None:
            raw = int(round(float(obj['confidence']) * 100))
        return cls(start=int(obj['index']),
                   end=int(obj['end_index']),
                   raw_score=int(raw),
                   types=tuple(int(t) for t in obj['types']),
                   evidence=obj.get('evidence', ''),
                   families=tuple(obj.get('families', ())))


def sort_records(records: Sequence[AnomalyRecord]) -> List[AnomalyRecord]:
    return sorted(records, key=lambda r: (r.start, r.end, -r.raw_score))
