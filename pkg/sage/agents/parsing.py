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
"""Parsing of completion-backend answers."""

import json
from typing import List, NamedTuple, Tuple

from sage.core.errors import UnparseableResponse
from sage.core.types import AnomalyType, Interval
from sage.utils.common import clamp
from sage.utils.file_utils import logging

_TYPE_IDS = {int(t) for t in AnomalyType}


class ParsedCandidate(NamedTuple):
    interval: Interval
    raw_score: int
    types: Tuple[AnomalyType, ...]


def _first_json(text: str, opener: str):
    """Decode the first JSON value starting with ``opener`` anywhere in ``text``."""
    decoder = json.JSONDecoder()
    start = text.find(opener)
    while start != -1:
        try:
            value, _ = decoder.raw_decode(text, start)
            return value
        except ValueError:
            start = text.find(opener, start + 1)
    raise UnparseableResponse('no JSON {} found in response: {!r}'.format(
        'array' if opener == '[' else 'object', text[:120]))


def _as_int(value, field):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UnparseableResponse('field {} must be a number, got {!r}'.format(field, value))
    return int(round(value))


def parse_detector_response(text: str) -> List[ParsedCandidate]:
    """Extract ``{index, end_index, confidence, types}`` objects from a detector answer.

    Scores are clamped to [0, 100]; unknown type ids are dropped, and so is
    an entry left without types.
    """
    items = _first_json(text or '', '[')
    if not isinstance(items, list):
        raise UnparseableResponse('detector answer is not a JSON array')
    parsed = []
    for item in items:
        if not isinstance(item, dict) or 'index' not in item:
            raise UnparseableResponse('detector entry {!r} lacks an index'.format(item))
        start = _as_int(item['index'], 'index')
        end = _as_int(item.get('end_index', start), 'end_index')
        if start > end:
            start, end = end, start
        if start < 0:
            raise UnparseableResponse('negative index in {!r}'.format(item))
        score = int(clamp(_as_int(item.get('confidence', 0), 'confidence'), 0, 100))
        raw_types = item.get('types', [])
        if not isinstance(raw_types, list):
            raw_types = [raw_types]
        types = []
        for t in raw_types:
            if isinstance(t, (int, float)) and not isinstance(t, bool) and int(t) in _TYPE_IDS:
                types.append(AnomalyType(int(t)))
            else:
                logging.warning('dropping unknown anomaly type {!r} in detector answer'.format(t))
        if not types:
            logging.warning('dropping detector entry [{}, {}] without known types'.format(start, end))
            continue
        parsed.append(ParsedCandidate(Interval(start, end), score, tuple(dict.fromkeys(types))))
    return parsed


def parse_supervisor_response(text: str) -> dict:
    """The narrative fields of a supervisor answer; records and levels are never taken from it."""
    obj = _first_json(text or '', '{')
    if not isinstance(obj, dict):
        raise UnparseableResponse('supervisor answer is not a JSON object')
    fields = {}
    for key in ('executive_summary', 'time_series_characteristics', 'alarm_reason'):
        if key in obj:
            fields[key] = str(obj[key])
    if 'recommendations' in obj:
        recs = obj['recommendations']
        fields['recommendations'] = [str(r) for r in recs] if isinstance(recs, list) else [str(recs)]
    return fields
