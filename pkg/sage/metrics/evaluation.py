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
"""Dataset-level evaluation reports and the synthetic type-evaluation protocol."""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from tabulate import tabulate

from sage.core.errors import NoGroundTruthEvents
from sage.core.types import FAMILY_ORDER, AnomalyFamily, AnomalyRecord, AnomalyType, Interval
from sage.detector.detector import threshold
from sage.metrics.metrics import (FIXED_THRESHOLDS, METRIC_TITLES, METRICS, NO_THRESHOLD, PRF, candidate_thresholds,
                                  evaluate_metric)
from sage.utils.file_utils import logging


def threshold_comparison(records: Sequence[AnomalyRecord], gt, metrics: Sequence[str] = tuple(METRICS),
                         delay_k: int = 3) -> Dict[str, Dict[str, Tuple[float, PRF]]]:
    """Each metric at the fixed thresholds and at its Best-F1 threshold."""
    return _compare({'series': list(records)}, {'series': np.asarray(gt, dtype=np.int8)}, metrics, delay_k)


def _predict(records_by_series, gts, tau) -> np.ndarray:
    return np.concatenate([threshold(records_by_series.get(sid, ()), tau, len(gt)) for sid, gt in gts.items()])


def _search(records_by_series, gts, metric, delay_k) -> Tuple[float, PRF]:
    gt = np.concatenate(list(gts.values()))
    pool = [r for records in records_by_series.values() for r in records]
    best = None
    for tau in candidate_thresholds(pool):
        score = evaluate_metric(metric, _predict(records_by_series, gts, tau), gt, delay_k)
        if best is None or score.f1 >= best[1].f1:
            best = (tau, score)
    return best


def _compare(records_by_series, gts, metrics, delay_k):
    gt = np.concatenate(list(gts.values()))
    table = {}
    for metric in metrics:
        row = {}
        for tau in FIXED_THRESHOLDS:
            row['{:g}'.format(tau)] = (tau, evaluate_metric(metric, _predict(records_by_series, gts, tau), gt, delay_k))
        row['best'] = _search(records_by_series, gts, metric, delay_k)
        table[metric] = row
    return table


@dataclass
class EvalReport:
    metrics: Dict[str, PRF]
    thresholds: Dict[str, float]
    per_series: Dict[str, Dict[str, Optional[PRF]]] = field(default_factory=dict)
    comparison: Optional[Dict[str, Dict[str, Tuple[float, PRF]]]] = None
    dataset: str = 'dataset'

    def __post_init__(self):
        for metric, tau in self.thresholds.items():
            assert 0.0 <= tau <= NO_THRESHOLD, 'threshold {} of {} out of range'.format(tau, metric)

    def to_json(self) -> dict:
        obj = {'dataset': self.dataset,
               'metrics': {m: p.to_json() for m, p in self.metrics.items()},
               'thresholds': dict(self.thresholds),
               'per_series': {sid: {m: None if p is None else p.to_json() for m, p in row.items()}
                              for sid, row in self.per_series.items()}}
        if self.comparison is not None:
            obj['comparison'] = {m: {k: {'threshold': tau, **p.to_json()} for k, (tau, p) in row.items()}
                                 for m, row in self.comparison.items()}
        return obj

    def render_table(self) -> str:
        """Fixed-width table: one F1 column per metric, dataset row first."""
        names = list(self.metrics)
        headers = ['series'] + [METRIC_TITLES[m] for m in names]
        rows = [[self.dataset] + ['{:.4f}'.format(self.metrics[m].f1) for m in names]]
        for sid, row in self.per_series.items():
            rows.append([sid] + ['-' if row.get(m) is None else '{:.4f}'.format(row[m].f1) for m in names])
        text = tabulate(rows, headers=headers, tablefmt='simple')
        if self.comparison is not None:
            comp_rows = []
            for m, row in self.comparison.items():
                comp_rows.append([METRIC_TITLES[m]] + ['{:.4f}'.format(p.f1) for _, p in row.values()]
                                 + ['{:.2f}'.format(row['best'][0])])
            comp_headers = ['metric'] + ['F1@{}'.format(k) for k in next(iter(self.comparison.values()))] + ['tau*']
            text += '\n\n' + tabulate(comp_rows, headers=comp_headers, tablefmt='simple')
        return text


def evaluate_dataset(records_by_series: Mapping[str, Sequence[AnomalyRecord]], gts: Mapping[str, np.ndarray],
                     metrics: Sequence[str] = tuple(METRICS), threshold_mode: Union[str, float] = 'best-f1',
                     delay_k: int = 3, dataset: str = 'dataset') -> EvalReport:
    """Micro-averaged evaluation over all series, with per-series rows at the dataset thresholds.

    Args:
        records_by_series: detector records keyed by series id
        gts: binary ground truth keyed by series id, in the same coordinates as the records
        metrics: metric ids out of ``METRICS``
        threshold_mode: 'best-f1', 'compare' or a fixed tau
        delay_k: delay of the delayed F1
        dataset: name of the first table row

    Returns:
        EvalReport
    """
    gts = {sid: np.asarray(gt, dtype=np.int8) for sid, gt in sorted(gts.items())}
    records_by_series = {sid: list(records_by_series.get(sid, ())) for sid in gts}
    unknown = [m for m in metrics if m not in METRICS]
    assert not unknown, 'unknown metrics {}'.format(unknown)
    gt = np.concatenate(list(gts.values()))
    results, thresholds = {}, {}
    for metric in metrics:
        if threshold_mode in ('best-f1', 'compare'):
            tau, score = _search(records_by_series, gts, metric, delay_k)
        else:
            tau = float(threshold_mode)
            score = evaluate_metric(metric, _predict(records_by_series, gts, tau), gt, delay_k)
        results[metric], thresholds[metric] = score, tau

    per_series = {}
    for sid, series_gt in gts.items():
        row = {}
        for metric in metrics:
            pred = threshold(records_by_series[sid], thresholds[metric], len(series_gt))
            try:
                row[metric] = evaluate_metric(metric, pred, series_gt, delay_k)
            except NoGroundTruthEvents:
                logging.warning('{} has no ground-truth events, skipping {}'.format(sid, metric))
                row[metric] = None
        per_series[sid] = row
    comparison = _compare(records_by_series, gts, metrics, delay_k) if threshold_mode == 'compare' else None
    return EvalReport(metrics=results, thresholds=thresholds, per_series=per_series, comparison=comparison,
                      dataset=dataset)


@dataclass
class TypeEvalReport:
    samples: Dict[AnomalyFamily, int]
    detected: Dict[AnomalyFamily, int]
    agreed: Dict[AnomalyFamily, int]
    per_type: Dict[AnomalyType, Tuple[int, int, int]] = field(default_factory=dict)

    @property
    def recall(self) -> Dict[AnomalyFamily, Optional[float]]:
        return {f: self.detected[f] / self.samples[f] if self.samples[f] else None for f in FAMILY_ORDER}

    @property
    def agreement(self) -> Dict[AnomalyFamily, Optional[float]]:
        return {f: self.agreed[f] / self.detected[f] if self.detected[f] else None for f in FAMILY_ORDER}

    def to_json(self) -> dict:
        return {'recall': {f.value: v for f, v in self.recall.items()},
                'agreement': {f.value: v for f, v in self.agreement.items()},
                'samples': {f.value: v for f, v in self.samples.items()},
                'per_type': {str(int(t)): {'samples': s, 'detected': d, 'agreed': a}
                             for t, (s, d, a) in sorted(self.per_type.items())}}

    def render_table(self) -> str:
        def pct(v):
            return '-' if v is None else '{:.1f}%'.format(100.0 * v)
        rows = [[f.value, self.samples[f], pct(self.recall[f]), pct(self.agreement[f])] for f in FAMILY_ORDER]
        return tabulate(rows, headers=['family', 'samples', 'detection recall', 'type agreement'], tablefmt='simple')


def _overlaps(record: AnomalyRecord, ground_truth: Sequence[Interval]) -> bool:
    return any(record.interval.overlaps(g) for g in ground_truth)


def representative_type(records: Sequence[AnomalyRecord], ground_truth: Sequence[Interval]) -> Optional[AnomalyType]:
    """Top type of the highest-confidence record overlapping any ground-truth interval."""
    hits = [r for r in records if _overlaps(r, ground_truth)]
    if not hits:
        return None
    return max(hits, key=lambda r: (r.raw_score, -r.start)).types[0]


def type_eval(results: Sequence[Tuple[str, Sequence[AnomalyRecord], object]]) -> TypeEvalReport:
    """Per-family detection recall and type agreement over injected samples.

    ``results`` holds (sample id, records, injection) triples; a sample is
    detected when a record carrying the injected type's family overlaps
    the ground truth, and agreement is counted over detected samples only.
    """
    samples = {f: 0 for f in FAMILY_ORDER}
    detected = {f: 0 for f in FAMILY_ORDER}
    agreed = {f: 0 for f in FAMILY_ORDER}
    per_type: Dict[AnomalyType, List[int]] = {}
    for _, records, injection in results:
        kind = AnomalyType(injection.type)
        family = kind.family
        counts = per_type.setdefault(kind, [0, 0, 0])
        samples[family] += 1
        counts[0] += 1
        if not any(family in r.families and _overlaps(r, injection.ground_truth) for r in records):
            continue
        detected[family] += 1
        counts[1] += 1
        if representative_type(records, injection.ground_truth) == kind:
            agreed[family] += 1
            counts[2] += 1
    return TypeEvalReport(samples=samples, detected=detected, agreed=agreed,
                          per_type={t: tuple(c) for t, c in per_type.items()})
