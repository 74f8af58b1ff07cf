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
"""Supervisor: thresholded records to an analyst-facing diagnosis report."""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

from sage.agents.backends import CompletionBackend
from sage.agents.parsing import parse_supervisor_response
from sage.agents.prompts import render_prompt
from sage.config import RUBRIC_CONFIG
from sage.core.errors import UnparseableResponse
from sage.core.types import AnomalyRecord, sort_records
from sage.tools.stats import StatsSummary
from sage.utils.file_utils import logging

ALARM_LEVELS = ('Info', 'Warning', 'Error', 'Urgent')

_RECOMMENDATIONS = {
    'Info': ['No action needed; keep the series under routine monitoring.'],
    'Warning': ['Review the flagged intervals against recent operational changes.',
                'Watch whether the flagged behaviour recurs in the next windows.'],
    'Error': ['Inspect the flagged intervals now and confirm the source of the change.',
              'Check upstream systems feeding this series for faults or configuration changes.'],
    'Urgent': ['Escalate immediately to the owner of this series.',
               'Inspect the flagged intervals now and prepare a rollback or mitigation.'],
}


def severity(confidence: float) -> str:
    """Alarm level of one record, on the rubric's score bands.

    Examples:
        >>> severity(0.9), severity(0.7), severity(0.55), severity(0.3)
        ('Urgent', 'Error', 'Warning', 'Info')

    """
    for lower, level in RUBRIC_CONFIG['severity']:
        if confidence >= lower:
            return level
    return 'Info'


def max_level(levels: Sequence[str]) -> str:
    return max(levels, key=ALARM_LEVELS.index, default='Info')


@dataclass(frozen=True)
class ConfirmedAnomaly:
    record: AnomalyRecord
    severity: str

    def to_json(self) -> dict:
        obj = self.record.to_json()
        obj['severity'] = self.severity
        return obj


@dataclass(frozen=True)
class DiagnosisReport:
    executive_summary: str
    time_series_characteristics: str
    confirmed_anomalies: Tuple[ConfirmedAnomaly, ...]
    overall_alarm_level: str
    alarm_reason: str
    recommendations: Tuple[str, ...] = field(default_factory=tuple)
    series_id: str = 'series'

    def __post_init__(self):
        assert self.overall_alarm_level == max_level([c.severity for c in self.confirmed_anomalies]), \
            'alarm level {} disagrees with the confirmed anomalies'.format(self.overall_alarm_level)

    def to_json(self) -> dict:
        return {'series_id': self.series_id,
                'executive_summary': self.executive_summary,
                'time_series_characteristics': self.time_series_characteristics,
                'confirmed_anomalies': [c.to_json() for c in self.confirmed_anomalies],
                'overall_alarm_level': self.overall_alarm_level,
                'alarm_reason': self.alarm_reason,
                'recommendations': list(self.recommendations)}

    @classmethod
    def from_json(cls, obj: dict) -> 'DiagnosisReport':
        confirmed = tuple(ConfirmedAnomaly(AnomalyRecord.from_json(a), a['severity'])
                          for a in obj.get('confirmed_anomalies', ()))
        return cls(executive_summary=obj['executive_summary'],
                   time_series_characteristics=obj['time_series_characteristics'],
                   confirmed_anomalies=confirmed,
                   overall_alarm_level=obj['overall_alarm_level'],
                   alarm_reason=obj['alarm_reason'],
                   recommendations=tuple(obj.get('recommendations', ())),
                   series_id=obj.get('series_id', 'series'))

    def to_markdown(self) -> str:
        lines = ['# Diagnosis report: {}'.format(self.series_id), '',
                 '**Overall alarm level:** {}'.format(self.overall_alarm_level), '',
                 '## Executive summary', '', self.executive_summary, '',
                 '## Time-series characteristics', '', self.time_series_characteristics, '',
                 '## Confirmed anomalies', '']
        if self.confirmed_anomalies:
            lines.append('| start | end | confidence | severity | types | evidence |')
            lines.append('|---|---|---|---|---|---|')
            for c in self.confirmed_anomalies:
                r = c.record
                lines.append('| {} | {} | {:.2f} | {} | {} | {} |'.format(
                    r.start, r.end, r.confidence, c.severity,
                    ', '.join('{} {}'.format(int(t), t.label) for t in r.types),
                    r.evidence.replace('|', '/')))
        else:
            lines.append('None.')
        lines += ['', '## Alarm reason', '', self.alarm_reason, '', '## Recommendations', '']
        lines += ['- ' + rec for rec in self.recommendations]
        return '\n'.join(lines) + '\n'


def describe_stats(stats: StatsSummary) -> str:
    traits = []
    if abs(stats.skewness) > 1.0:
        traits.append('strongly {} skewed'.format('right' if stats.skewness > 0 else 'left'))
    if stats.kurtosis > 3.0:
        traits.append('heavy-tailed')
    if stats.std == 0.0:
        traits.append('constant')
    text = 'Values range over [{:.4g}, {:.4g}] with mean {:.4g} and standard deviation {:.4g}.'.format(
        stats.min, stats.max, stats.mean, stats.std)
    if traits:
        text += ' The distribution is {}.'.format(' and '.join(traits))
    return text


def _rule_narrative(confirmed: Sequence[ConfirmedAnomaly], level: str, tau: float, series_id: str) -> dict:
    if not confirmed:
        return {'executive_summary': 'No anomalies at or above confidence {:.2f} were confirmed in {}.'.format(
                    tau, series_id),
                'alarm_reason': 'No record reached the reporting threshold.'}
    worst = max(confirmed, key=lambda c: (ALARM_LEVELS.index(c.severity), c.record.raw_score))
    r = worst.record
    types = ', '.join(t.label.lower() for t in r.types)
    summary = '{} confirmed anomal{} in {}; overall level {}.'.format(
        len(confirmed), 'y' if len(confirmed) == 1 else 'ies', series_id, level)
    reason = 'Highest severity {} from points {}-{} ({}, confidence {:.2f}): {}'.format(
        worst.severity, r.start, r.end, types, r.confidence, r.evidence or 'no evidence text')
    return {'executive_summary': summary, 'alarm_reason': reason}


def supervise(records: Sequence[AnomalyRecord], stats: StatsSummary, tau: float = 0.5,
              backend: Optional[CompletionBackend] = None, series_id: str = 'series',
              summary_text: str = '') -> DiagnosisReport:
    """Build the diagnosis report of one series.

    The confirmed anomalies and the alarm level always come from ``records``;
    a completion backend only rewrites the narrative fields.

    Args:
        records: detector output
        stats: statistics of the series
        tau: reporting threshold on record confidence
        backend: completion backend for the narrative, None for templates
        series_id: name shown in the report
        summary_text: compressed summary passed to the completion prompt

    Returns:
        DiagnosisReport
    """
    kept: List[AnomalyRecord] = [r for r in sort_records(records) if r.confidence >= tau]
    confirmed = tuple(ConfirmedAnomaly(r, severity(r.confidence)) for r in kept)
    level = max_level([c.severity for c in confirmed])
    narrative = _rule_narrative(confirmed, level, tau, series_id)
    report = DiagnosisReport(executive_summary=narrative['executive_summary'],
                             time_series_characteristics=describe_stats(stats),
                             confirmed_anomalies=confirmed,
                             overall_alarm_level=level,
                             alarm_reason=narrative['alarm_reason'],
                             recommendations=tuple(_RECOMMENDATIONS[level]),
                             series_id=series_id)
    if backend is None or not backend.serves_completions:
        return report

    prompt = render_prompt('Supervisor', summary_text or 'series {}'.format(series_id),
                           records=kept, stats_text=stats.render())
    completion = backend.complete(prompt)
    logging.info('Supervisor prompt ~{} tokens, answer {} tokens'.format(
        completion.prompt_tokens, completion.completion_tokens))
    try:
        fields = parse_supervisor_response(completion.text)
    except UnparseableResponse as e:
        logging.warning('supervisor answer unparseable, keeping template text: {}'.format(e))
        return report
    if 'recommendations' in fields:
        fields['recommendations'] = tuple(fields['recommendations'])
    return replace(report, **fields)
