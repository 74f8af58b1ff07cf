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
"""Prompt templates for the analyzer, detector and supervisor roles.

Templates are versioned through ``PROMPT_VERSION``; mock response files are
keyed by the hash of the rendered prompt, so any wording change here also
invalidates canned responses.
"""

import json
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from sage.core.types import AnomalyFamily, AnomalyType, family_types
from sage.represent.summary import estimate_tokens

PROMPT_VERSION = 'sage-prompts/1'

ROLES = ('PointAnalyzer', 'StructAnalyzer', 'SeasonAnalyzer', 'PatternAnalyzer', 'Detector', 'Supervisor')

ROLE_FAMILY = {
    'PointAnalyzer': AnomalyFamily.POINT,
    'StructAnalyzer': AnomalyFamily.STRUCTURAL,
    'SeasonAnalyzer': AnomalyFamily.SEASONAL,
    'PatternAnalyzer': AnomalyFamily.PATTERN,
}

GLOBAL_RULES = """Global Rules
1. A point counts as anomalous when it belongs to a run of anomalous points or when it is a sharp spike or drop.
2. A point also counts as anomalous when it stays above or below the normal operating range for a sustained stretch.
3. Anomalies are rare: usually under 5% of the points. Most windows contain none.
4. Ordinary variability is normal behaviour and must not be reported.
5. False alarms are costly. Report only what strong statistical or visual evidence supports.
6. Keep every reported interval tight around the anomalous region.
7. Merge nearby anomalous points into segments and report only well-supported segments.
8. An empty list [] is a valid answer. Never invent anomalies to fill a quota.
9. If no analyzer candidate is strongly supported, answer with an empty list."""

RUBRIC = """Scoring Rubric (integer 0-100, judged on evidence strength from tools, raw values or the chart)
0-10    normal variation from every perspective
10-30   weak evidence: minor deviation or ambiguous shape
30-50   borderline: a small isolated deviation that may be noise
50-70   clear anomaly: obvious spike or dip, |z| > 2, or a structural change
70-85   strong: magnitude at least twice the background range, or a multi-point cluster
85-100  overwhelming: extreme magnitude, or confirmed by several analyzers
Rules:
- Judge the actual value against the background range, not the z-score alone.
- Two or more consecutive anomalous points score at least 60; three or more at least 70.
- Never report a region scoring below 50.
- Use the indices reported by the tools; index precision matters.
- For a regime change, cover the whole affected region after the change point.
- Regions missed by the analyzers may be reported when the raw data or the chart shows them clearly."""

DETECTOR_OUTPUT = """Output: a JSON array of objects {"index": int, "end_index": int, "confidence": int, "types": [int]}.
Indices are inclusive and relative to the window. Answer [] when nothing qualifies."""

REPAIR_INSTRUCTION = """Your previous answer could not be parsed. Reply with the JSON array only, no prose."""

SUPERVISOR_OUTPUT = """Output: one JSON object with the fields executive_summary, time_series_characteristics,
confirmed_anomalies, overall_alarm_level, alarm_reason and recommendations (a list of strings).
Alarm levels, lowest first: Info, Warning, Error, Urgent."""

TYPE_CATALOG = '\n'.join('Type {}: {}'.format(int(t), t.label) for t in AnomalyType)

_ANALYZER_STEPS = {
    AnomalyFamily.POINT: [
        'Read the global statistics (mean, std, IQR) and the z-score hits.',
        'Read the multi-scale rolling statistics for values that only stand out locally.',
        'Label each candidate Type 1 (global) or Type 2 (contextual).',
    ],
    AnomalyFamily.STRUCTURAL: [
        'Read the trend / seasonal / residual decomposition.',
        'Read the CUSUM change points and the regime each one opens.',
        'Compare the segments before and after each change (mean, variance, slope).',
        'Label each change Type 5 (trend), Type 6 (mean) or Type 7 (variance).',
    ],
    AnomalyFamily.SEASONAL: [
        'Read the dominant period of each half from the autocorrelation.',
        'Read the Fourier spectrum and the short-time dominant frequencies.',
        'Read the Haar wavelet energy per level for localized frequency changes.',
        'Label each change Type 3 (amplitude) or Type 4 (period or seasonal shape).',
    ],
    AnomalyFamily.PATTERN: [
        'Read the SAX word for repetitions and abrupt symbol breaks.',
        'Read recurrence rate, determinism and laminarity of the two halves.',
        'Confirm the repetition period from the autocorrelation.',
        'Read the rolling spread for flattened or clipped stretches.',
        'Label each finding Type 8 (phase or shape shift) or Type 9 (waveform distortion).',
    ],
}

_ANALYZER_SPECIALTY = {
    AnomalyFamily.POINT: 'point-level anomalies',
    AnomalyFamily.STRUCTURAL: 'structural changes',
    AnomalyFamily.SEASONAL: 'seasonal and frequency anomalies',
    AnomalyFamily.PATTERN: 'pattern anomalies, using symbolic and recurrence representations',
}


@dataclass(frozen=True)
class PromptBundle:
    role: str
    system: str
    user: str
    images: Tuple[bytes, ...] = ()
    estimated_tokens: int = 0
    version: str = PROMPT_VERSION

    def __post_init__(self):
        assert self.role in ROLES, 'unknown prompt role {}'.format(self.role)
        if self.role == 'Detector':
            assert GLOBAL_RULES in self.system, 'detector prompt lost the global rules'


def analyzer_system(family: AnomalyFamily) -> str:
    scope = ', '.join(str(int(t)) for t in family_types(family))
    lines = ['You analyze univariate time series for {}.'.format(_ANALYZER_SPECIALTY[family]),
             'Scope: Types {} only. Leave other anomaly families to the other analyzers.'.format(scope),
             TYPE_CATALOG,
             'When a chart image is attached, use it to confirm candidates and their extent.',
             'Steps:']
    lines += ['{}. {}'.format(i, step) for i, step in enumerate(_ANALYZER_STEPS[family], start=1)]
    lines.append('Output: candidate intervals with scores, a short summary and candidate types from {{{}}}.'.format(scope))
    return '\n'.join(lines)


def detector_system() -> str:
    return '\n\n'.join(['You score candidate anomalous regions of a time-series window.',
                        GLOBAL_RULES, TYPE_CATALOG, RUBRIC, DETECTOR_OUTPUT])


def supervisor_system() -> str:
    return '\n\n'.join([
        'You turn confirmed anomaly records into a diagnosis report for an analyst.',
        'Never add intervals, types or causes that the records and evidence do not contain. '
        'When no record is confirmed, write a no-anomaly report.',
        'Cover: a one or two sentence executive summary; trend, seasonality, range and variability of the series; '
        'each confirmed anomaly with location, type, confidence and severity; the overall alarm level and its '
        'reason; concrete recommendations (immediate actions for Error or Urgent).',
        SUPERVISOR_OUTPUT])


def _json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def _references_text(references) -> str:
    lines = []
    for k, ref in enumerate(references, start=1):
        lines.append('Reference {} (Type {} {}, DTW distance {:.4g}):'.format(
            k, int(ref.type), AnomalyType(ref.type).label, ref.distance))
        lines.append('  normal: ' + ' '.join('{:.3g}'.format(v) for v in ref.normal))
        lines.append('  anomalous: ' + ' '.join('{:.3g}'.format(v) for v in ref.anomalous))
        lines.append('  evidence: ' + ref.evidence)
    return '\n'.join(lines)


def render_prompt(role: str, summary_text: str, bundles: Sequence = (), references: Sequence = (),
                  images: Sequence = (), candidates: Optional[Sequence] = None, records: Optional[Sequence] = None,
                  stats_text: Optional[str] = None, repair: bool = False) -> PromptBundle:
    """Assemble the system and user text of one role.

    Args:
        role: one of ``ROLES``
        summary_text: the compressed window summary
        bundles: EvidenceBundle list; analyzer roles only see their own family
        references: IclReference list for the Detector
        images: ImageMatrix list; rendered PNGs are attached
        candidates: pooled candidates listed for the Detector
        records: AnomalyRecord list for the Supervisor
        stats_text: rendered window statistics for the Supervisor
        repair: append the repair instruction after an unparseable answer

    Returns:
        PromptBundle
    """
    assert role in ROLES, 'unknown prompt role {}'.format(role)
    sections = ['Window summary:\n' + summary_text]
    if role in ROLE_FAMILY:
        system = analyzer_system(ROLE_FAMILY[role])
        own = [b for b in bundles if b.family == ROLE_FAMILY[role]]
        for bundle in own:
            sections.append('Tool results:\n' + _json(bundle.tool_summaries))
    elif role == 'Detector':
        system = detector_system()
        sections.append('Analyzer evidence:\n' + '\n'.join(_json(b.to_json()) for b in bundles))
        if candidates:
            sections.append('Pooled candidates:\n' + '\n'.join(_json(c.to_json()) for c in candidates))
        if references:
            sections.append('Synthetic references (normal vs anomalous):\n' + _references_text(references))
    else:
        system = supervisor_system()
        if stats_text:
            sections.append('Window statistics: ' + stats_text)
        sections.append('Confirmed records:\n' + _json([r.to_json() for r in (records or ())]))
    if images:
        sections.append('Attached images: ' + ', '.join(image.describe() for image in images))
    if repair:
        sections.append(REPAIR_INSTRUCTION)
    user = '\n\n'.join(sections)
    pngs = tuple(image.rendered for image in images if image.rendered is not None)
    return PromptBundle(role=role, system=system, user=user, images=pngs,
                        estimated_tokens=estimate_tokens(system) + estimate_tokens(user))
