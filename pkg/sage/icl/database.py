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
"""Synthetic reference database.

Normal prototypes are cut from the training split, each prototype receives
one injected variant per anomaly type together with a tool-evidence
summary, and detection windows retrieve the nearest prototypes by banded
DTW with LB_Keogh pruning.
"""

import heapq
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from sage.config import ICL_CONFIG
from sage.core.errors import EmptyDb, IclError, InjectError, MissingInput, NoNormalSegments, ToolError
from sage.core.types import AnomalyType, Interval, Series
from sage.icl.clustering import select_medoids
from sage.icl.distance import band_width, dtw, envelope, lb_keogh
from sage.inject.injectors import Injection, inject
from sage.tools.change_point import change_points, compare_segments
from sage.tools.spectral import autocorrelation_split, fft_spectrum
from sage.tools.stats import statistics
from sage.utils.common import derive_seed, downsample_mean, resample_linear, znorm
from sage.utils.file_utils import logging, read_json, write_json

MANIFEST = 'manifest.json'


@dataclass(frozen=True)
class IclVariant:
    type: AnomalyType
    values: Optional[np.ndarray]
    injection: Optional[Injection]
    evidence: str
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_json(self) -> dict:
        return {'type': int(self.type),
                'values': None if self.values is None else [float(v) for v in self.values],
                'injection': None if self.injection is None else self.injection.to_json(),
                'evidence': self.evidence, 'error': self.error}

    @classmethod
    def from_json(cls, obj: dict) -> 'IclVariant':
        values = obj.get('values')
        injection = obj.get('injection')
        return cls(type=AnomalyType(obj['type']),
                   values=None if values is None else np.asarray(values, dtype=np.float64),
                   injection=None if injection is None else Injection.from_json(injection),
                   evidence=obj.get('evidence', ''), error=obj.get('error'))


@dataclass(frozen=True)
class IclEntry:
    id: str
    source: str
    start: int
    prototype: np.ndarray
    normalized: np.ndarray
    variants: Tuple[IclVariant, ...]

    def variant(self, kind: AnomalyType) -> Optional[IclVariant]:
        for v in self.variants:
            if v.type == kind:
                return v
        return None

    def to_json(self) -> dict:
        return {'id': self.id, 'source': self.source, 'start': int(self.start),
                'prototype': [float(v) for v in self.prototype],
                'normalized': [float(v) for v in self.normalized],
                'variants': [v.to_json() for v in self.variants]}

    @classmethod
    def from_json(cls, obj: dict) -> 'IclEntry':
        return cls(id=obj['id'], source=obj['source'], start=int(obj['start']),
                   prototype=np.asarray(obj['prototype'], dtype=np.float64),
                   normalized=np.asarray(obj['normalized'], dtype=np.float64),
                   variants=tuple(IclVariant.from_json(v) for v in obj['variants']))


@dataclass(frozen=True)
class IclReference:
    normal: np.ndarray
    anomalous: np.ndarray
    type: AnomalyType
    evidence: str
    distance: float
    prototype_id: str = ''


@dataclass(frozen=True)
class IclDatabase:
    entries: Tuple[IclEntry, ...]
    segment_length: int
    seed: int
    band_fraction: float = ICL_CONFIG['band_fraction']

    def __len__(self):
        return len(self.entries)

    @property
    def band(self) -> int:
        return band_width(self.segment_length, self.band_fraction)


def normal_segments(train: Sequence[Series], segment_length: int) -> List[Tuple[str, int, np.ndarray]]:
    """Non-overlapping ``segment_length`` cuts that contain no labelled anomalous point."""
    segments = []
    for series in train:
        n = len(series)
        for start in range(0, n - segment_length + 1, segment_length):
            end = start + segment_length
            if series.labels is not None and np.any(series.labels[start:end]):
                continue
            segments.append((series.id, start, np.array(series.values[start:end])))
    return segments


def _fmt_period(period):
    return 'none' if period is None else str(period)


def evidence_summary(normal: np.ndarray, anomalous: np.ndarray, injection: Injection) -> str:
    """Short tool readout contrasting a prototype with one injected variant."""
    parts = []
    before, after = statistics(normal), statistics(anomalous)
    parts.append('mean {:.3g}->{:.3g}, std {:.3g}->{:.3g}, range [{:.3g}, {:.3g}]->[{:.3g}, {:.3g}]'.format(
        before.mean, after.mean, before.std, after.std, before.min, before.max, after.min, after.max))
    try:
        points = change_points(anomalous).indices
        parts.append('CUSUM change points {}'.format(list(points[:5]) if points else 'none'))
    except ToolError:
        pass
    try:
        parts.append('dominant period {}->{}'.format(_fmt_period(fft_spectrum(normal).dominant_period),
                                                    _fmt_period(fft_spectrum(anomalous).dominant_period)))
    except ToolError:
        pass
    try:
        acf = autocorrelation_split(anomalous)
        parts.append('ACF period halves {}/{}'.format(_fmt_period(acf.dominant_period_first),
                                                      _fmt_period(acf.dominant_period_second)))
    except ToolError:
        pass
    split = injection.span.start
    if 5 <= split <= len(anomalous) - 5:
        try:
            parts.append('before/after {}: {}'.format(split, compare_segments(anomalous, split).render()))
        except ToolError:
            pass
    parts.append('injected at {}'.format(', '.join('{}-{}'.format(g.start, g.end) for g in injection.ground_truth)))
    return '; '.join(parts)


def _make_variant(prototype: np.ndarray, kind: AnomalyType, seed: int) -> IclVariant:
    try:
        values, injection = inject(kind, prototype, seed)
    except (InjectError, ToolError) as e:
        logging.warning('type {} variant failed: {}'.format(int(kind), e))
        return IclVariant(type=kind, values=None, injection=None, evidence='', error=str(e))
    return IclVariant(type=kind, values=values, injection=injection,
                      evidence=evidence_summary(prototype, values, injection))


def _make_entry(index: int, source: str, start: int, prototype: np.ndarray, seed: int) -> IclEntry:
    variants = tuple(_make_variant(prototype, kind, derive_seed(seed, index, int(kind))) for kind in AnomalyType)
    return IclEntry(id='proto_{:03d}'.format(index), source=source, start=start,
                    prototype=prototype, normalized=znorm(prototype), variants=variants)


def build_db(train: Sequence[Series], segment_length: int = ICL_CONFIG['segment_length'], seed: int = 0,
             keep_all_max: int = ICL_CONFIG['keep_all_max'], max_clusters: int = ICL_CONFIG['max_clusters'],
             jobs: int = 1) -> IclDatabase:
    """Build the reference database from training series.

    Args:
        train: training series; labelled anomalous points are never stored
        segment_length: prototype length, also the segment stride
        seed: injection seed, each variant derives its own
        keep_all_max: keep every segment when at most this many remain
        max_clusters: upper bound of the silhouette search
        jobs: worker threads for injection and evidence

    Returns:
        IclDatabase
    """
    assert segment_length >= 1, 'segment length must be positive'
    segments = normal_segments(train, segment_length)
    if not segments:
        raise NoNormalSegments('no anomaly-free segment of length {} in {} training series'.format(
            segment_length, len(train)))
    if len(segments) <= keep_all_max:
        chosen = list(range(len(segments)))
        logging.info('keeping all {} normal segments as prototypes'.format(len(segments)))
    else:
        clustering = select_medoids(np.stack([znorm(s) for _, _, s in segments]), max_clusters)
        chosen = sorted(clustering.medoids)
    jobs_args = [(k, segments[i][0], segments[i][1], segments[i][2]) for k, i in enumerate(chosen)]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        entries = list(tqdm(pool.map(lambda a: _make_entry(*a, seed), jobs_args),
                            total=len(jobs_args), desc='build-icl'))
    failed = sum(1 for e in entries for v in e.variants if not v.ok)
    if failed:
        logging.warning('{} of {} variants could not be injected'.format(failed, 9 * len(entries)))
    return IclDatabase(entries=tuple(entries), segment_length=segment_length, seed=seed)


def prepare_query(db: IclDatabase, query) -> np.ndarray:
    return znorm(resample_linear(query, db.segment_length))


def nearest_prototypes(db: IclDatabase, query, top_k: int = ICL_CONFIG['top_k']) -> Tuple[List[Tuple[int, float]], int]:
    """Top ``top_k`` prototypes by exact banded DTW, ordered by (distance, index).

    Prototypes are visited in increasing LB_Keogh order; once ``top_k`` exact
    distances are known, any prototype whose bound exceeds the current
    ``top_k``-th distance is skipped.

    Returns:
        ranked ``(entry index, distance)`` pairs and the number of exact DTW evaluations
    """
    if not db.entries:
        raise EmptyDb('the reference database is empty')
    q = prepare_query(db, query)
    band = db.band
    bounds = [(lb_keogh(q, e.normalized, band, envelope(e.normalized, band)), i) for i, e in enumerate(db.entries)]
    bounds.sort()
    heap = []  # (-distance, -index): worst of the current best on top
    evaluated = 0
    for bound, i in bounds:
        if len(heap) == top_k and bound > -heap[0][0]:
            break
        d = dtw(q, db.entries[i].normalized, band)
        evaluated += 1
        item = (-d, -i)
        if len(heap) < top_k:
            heapq.heappush(heap, item)
        elif item > heap[0]:
            heapq.heapreplace(heap, item)
    ranked = sorted(((-neg_i, -neg_d) for neg_d, neg_i in heap), key=lambda p: (p[1], p[0]))
    return ranked, evaluated


def excerpt_bounds(injection: Injection, n: int, margin: int = ICL_CONFIG['excerpt_margin']) -> Interval:
    span = injection.span
    return Interval(max(0, span.start - margin), min(n - 1, span.end + margin))


def retrieve(db: IclDatabase, query, candidate_types: Iterable[AnomalyType],
             top_k: int = ICL_CONFIG['top_k'], excerpt_length: int = ICL_CONFIG['excerpt_length']) -> List[IclReference]:
    """Contrastive references for a detection window.

    Only raw window values and candidate types go in; the references are the
    variants of the ``top_k`` nearest prototypes whose type is a candidate.
    Excerpts cover the injected region plus a margin, block-averaged to at
    most ``excerpt_length`` points.
    """
    wanted = sorted({AnomalyType(t) for t in candidate_types})
    ranked, evaluated = nearest_prototypes(db, query, top_k)
    logging.debug('retrieval evaluated {} of {} prototypes'.format(evaluated, len(db)))
    references = []
    for i, distance in ranked:
        entry = db.entries[i]
        for kind in wanted:
            variant = entry.variant(kind)
            if variant is None or not variant.ok:
                continue
            bounds = excerpt_bounds(variant.injection, len(entry.prototype))
            references.append(IclReference(
                normal=downsample_mean(entry.prototype[bounds.start:bounds.end + 1], excerpt_length),
                anomalous=downsample_mean(variant.values[bounds.start:bounds.end + 1], excerpt_length),
                type=kind, evidence=variant.evidence, distance=distance, prototype_id=entry.id))
    return references


def save_db(db: IclDatabase, out_dir: str) -> dict:
    files = []
    for entry in db.entries:
        name = entry.id + '.json'
        write_json(os.path.join(out_dir, name), entry.to_json())
        files.append(name)
    manifest = {'schema': ICL_CONFIG['schema'], 'seed': int(db.seed), 'segment_length': int(db.segment_length),
                'band_fraction': float(db.band_fraction), 'entries': files,
                'failed_variants': sum(1 for e in db.entries for v in e.variants if not v.ok)}
    write_json(os.path.join(out_dir, MANIFEST), manifest)
    logging.info('wrote {} prototypes to {}'.format(len(files), out_dir))
    return manifest


def load_db(path: str) -> IclDatabase:
    manifest_path = os.path.join(path, MANIFEST)
    if not os.path.exists(manifest_path):
        raise MissingInput('no reference database manifest under {}'.format(path))
    manifest = read_json(manifest_path)
    if manifest.get('schema') != ICL_CONFIG['schema']:
        raise IclError('reference database schema {!r}, expected {!r}'.format(
            manifest.get('schema'), ICL_CONFIG['schema']))
    entries = tuple(IclEntry.from_json(read_json(os.path.join(path, name))) for name in manifest['entries'])
    return IclDatabase(entries=entries, segment_length=int(manifest['segment_length']),
                       seed=int(manifest['seed']), band_fraction=float(manifest['band_fraction']))
