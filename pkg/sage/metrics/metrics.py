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
"""Point, point-adjusted, delayed and affiliation F1 plus the Best-F1 threshold search."""

from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

import numpy as np

from sage.core.errors import LengthMismatch, NoGroundTruthEvents
from sage.core.intervals import labels_to_segments
from sage.core.types import AnomalyRecord
from sage.detector.detector import threshold

NO_THRESHOLD = 1.01
FIXED_THRESHOLDS = (0.5, 0.8)


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    def to_json(self) -> dict:
        return {'precision': round(self.precision, 6), 'recall': round(self.recall, 6), 'f1': round(self.f1, 6),
                'tp': self.tp, 'fp': self.fp, 'fn': self.fn}


def harmonic(precision: float, recall: float) -> float:
    return 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def prf(tp: int, fp: int, fn: int) -> PRF:
    """PRF from counts with 0/0 mapped to 0.

    Examples:
        >>> prf(1, 1, 1).f1
        0.5

    """
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    return PRF(precision, recall, harmonic(precision, recall), int(tp), int(fp), int(fn))


def _pair(pred, gt) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.int8).ravel()
    gt = np.asarray(gt, dtype=np.int8).ravel()
    if len(pred) != len(gt):
        raise LengthMismatch('prediction has {} points, ground truth {}'.format(len(pred), len(gt)))
    return pred != 0, gt != 0


def _counts(pred: np.ndarray, gt: np.ndarray) -> PRF:
    tp = int(np.sum(pred & gt))
    return prf(tp, int(np.sum(pred & ~gt)), int(np.sum(~pred & gt)))


def point_f1(pred, gt) -> PRF:
    return _counts(*_pair(pred, gt))


def pa_f1(pred, gt) -> PRF:
    """Point-adjusted F1: one detected point credits its whole ground-truth segment."""
    pred, gt = _pair(pred, gt)
    adjusted = pred.copy()
    for seg in labels_to_segments(gt.astype(np.int8)):
        if pred[seg.start:seg.end + 1].any():
            adjusted[seg.start:seg.end + 1] = True
    return _counts(adjusted, gt)


def delayed_f1(pred, gt, k: int = 3) -> PRF:
    """Point adjustment restricted to segments whose first detection is within ``k`` steps of onset.

    Late segments count as missed and the predictions inside them are
    discarded rather than counted as false positives.
    """
    assert k >= 0, 'delay must be non-negative'
    pred, gt = _pair(pred, gt)
    adjusted = pred.copy()
    for seg in labels_to_segments(gt.astype(np.int8)):
        hits = np.flatnonzero(pred[seg.start:seg.end + 1])
        adjusted[seg.start:seg.end + 1] = hits.size > 0 and hits[0] <= k
    return _counts(adjusted, gt)


def affiliation_zones(events, n: int) -> List[Tuple[int, int]]:
    """Inclusive zone of each event: positions nearer to it than to any other, ties to the earlier event."""
    zones = []
    for j, event in enumerate(events):
        lo = 0 if j == 0 else zones[-1][1] + 1
        hi = n - 1 if j == len(events) - 1 else (event.end + events[j + 1].start) // 2
        zones.append((lo, hi))
    return zones


def _distance_to_event(positions: np.ndarray, event) -> np.ndarray:
    return np.maximum(0, np.maximum(event.start - positions, positions - event.end))


def _zone_precision(predicted: np.ndarray, event, lo: int, hi: int) -> float:
    """Mean survival of predicted points: share of zone positions at least as far from the event."""
    zone_d = np.sort(_distance_to_event(np.arange(lo, hi + 1), event))
    d = _distance_to_event(predicted, event)
    survival = (len(zone_d) - np.searchsorted(zone_d, d, side='left')) / len(zone_d)
    return float(survival.mean())


def _zone_recall(predicted: np.ndarray, event, lo: int, hi: int) -> float:
    """Mean survival of event points: share of zone positions at least as far as the nearest prediction."""
    y = np.arange(event.start, event.end + 1)
    k = np.searchsorted(predicted, y)
    left = np.where(k > 0, y - predicted[np.maximum(k - 1, 0)], np.iinfo(np.int64).max)
    right = np.where(k < len(predicted), predicted[np.minimum(k, len(predicted) - 1)] - y, np.iinfo(np.int64).max)
    d = np.minimum(left, right)
    # zone positions strictly closer than d to y lie in (y - d, y + d)
    closer = np.where(d > 0, np.minimum(hi, y + d - 1) - np.maximum(lo, y - d + 1) + 1, 0)
    size = hi - lo + 1
    return float(((size - closer) / size).mean())


def affiliation_f1(pred, gt) -> PRF:
    """Affiliation precision and recall averaged over the zones of the ground-truth events.

    ``tp`` and ``fn`` count events with and without a prediction in their
    zone; ``fp`` counts predicted points outside every event.
    """
    pred, gt = _pair(pred, gt)
    events = labels_to_segments(gt.astype(np.int8))
    if not events:
        raise NoGroundTruthEvents('affiliation needs at least one ground-truth event')
    precisions, recalls = [], []
    for event, (lo, hi) in zip(events, affiliation_zones(events, len(gt))):
        predicted = lo + np.flatnonzero(pred[lo:hi + 1])
        if predicted.size == 0:
            recalls.append(0.0)
            continue
        precisions.append(_zone_precision(predicted, event, lo, hi))
        recalls.append(_zone_recall(predicted, event, lo, hi))
    precision = float(np.mean(precisions)) if precisions else 0.0
    recall = float(np.mean(recalls))
    return PRF(precision, recall, harmonic(precision, recall), len(precisions), int(np.sum(pred & ~gt)),
               len(events) - len(precisions))


METRICS: Dict[str, Callable[..., PRF]] = {
    'point': point_f1,
    'pa': pa_f1,
    'affiliation': affiliation_f1,
    'delayed': delayed_f1,
}

METRIC_TITLES = {'point': 'Pt', 'pa': 'PA', 'affiliation': 'Aff', 'delayed': 'Del'}


def evaluate_metric(metric: str, pred, gt, delay_k: int = 3) -> PRF:
    assert metric in METRICS, 'unknown metric {}'.format(metric)
    if metric == 'delayed':
        return delayed_f1(pred, gt, delay_k)
    return METRICS[metric](pred, gt)


def candidate_thresholds(records: Sequence[AnomalyRecord]) -> List[float]:
    return sorted({0.0, NO_THRESHOLD} | {r.confidence for r in records})


def best_f1_search(records: Sequence[AnomalyRecord], gt, metric: str = 'point',
                   delay_k: int = 3) -> Tuple[float, PRF]:
    """Threshold maximizing the metric's F1 over the record confidences; ties go to the higher threshold."""
    gt = np.asarray(gt, dtype=np.int8)
    best = None
    for tau in candidate_thresholds(records):
        score = evaluate_metric(metric, threshold(records, tau, len(gt)), gt, delay_k)
        if best is None or score.f1 >= best[1].f1:
            best = (tau, score)
    return best
