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
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

from sage.analyzers.base import EvidenceBundle, soft_bundle
from sage.analyzers.pattern import pattern_analyze
from sage.analyzers.point import point_analyze
from sage.analyzers.seasonal import season_analyze
from sage.analyzers.structural import struct_analyze
from sage.core.errors import SageError
from sage.core.types import FAMILY_ORDER, AnomalyFamily, Series
from sage.represent.summary import CompressedSummary
from sage.utils.file_utils import logging

ANALYZERS = {
    AnomalyFamily.POINT: point_analyze,
    AnomalyFamily.STRUCTURAL: struct_analyze,
    AnomalyFamily.SEASONAL: season_analyze,
    AnomalyFamily.PATTERN: pattern_analyze,
}


def run_one(family: AnomalyFamily, window: Series, summary: Optional[CompressedSummary] = None,
            use_vision: bool = True) -> EvidenceBundle:
    """Run one family analyzer; typed errors become a soft-failure bundle."""
    try:
        return ANALYZERS[family](window, summary, use_vision=use_vision)
    except SageError as e:
        reason = '{}: {}'.format(type(e).__name__, e)
        logging.warning('{} analyzer skipped on {}: {}'.format(family.value, window.id, reason))
        return soft_bundle(family, reason)


def run_all(window: Series, summary: Optional[CompressedSummary] = None, use_vision: bool = True,
            jobs: int = 1) -> List[EvidenceBundle]:
    """Run the four analyzers, returning bundles in Point, Structural, Seasonal, Pattern order."""
    if jobs <= 1:
        return [run_one(family, window, summary, use_vision) for family in FAMILY_ORDER]
    with ThreadPoolExecutor(max_workers=min(jobs, len(FAMILY_ORDER))) as executor:
        futures = [executor.submit(run_one, family, window, summary, use_vision) for family in FAMILY_ORDER]
        return [f.result() for f in futures]
