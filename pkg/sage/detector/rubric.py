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
"""Deterministic rule backend: the detector rubric expressed as arithmetic."""

from typing import Iterable, Set

from sage.analyzers.base import EvidenceBundle
from sage.config import RUBRIC_CONFIG
from sage.core.types import AnomalyFamily, Interval


def band_score(strength: float) -> int:
    """Base score of an effect size.

    Examples:
        >>> band_score(9.9), band_score(3.2), band_score(2.5), band_score(1.0)
        (85, 60, 50, 30)

    """
    for lower, score in RUBRIC_CONFIG['bands']:
        if strength >= lower:
            return int(score)
    return int(RUBRIC_CONFIG['base_floor'])


def agreeing_families(interval: Interval, bundles: Iterable[EvidenceBundle]) -> Set[AnomalyFamily]:
    return {b.family for b in bundles if b.overlapping(interval)}


def cluster_floor(length: int) -> int:
    for min_length, floor in RUBRIC_CONFIG['cluster_floors']:
        if length >= min_length:
            return int(floor)
    return 0


def rule_score(interval: Interval, strength: float, families: Iterable[AnomalyFamily],
               bundles: Iterable[EvidenceBundle], multi_analyzer: bool = True) -> int:
    """Score one pooled candidate on the 0-100 rubric.

    ``families`` are the families whose candidates were merged into this
    one; every further family with an overlapping candidate adds the
    agreement bonus. Cluster floors only lift candidates whose base band is
    already emit-worthy.
    """
    base = band_score(strength)
    score = base
    if multi_analyzer:
        agreeing = agreeing_families(interval, bundles) | set(families)
        score += RUBRIC_CONFIG['agreement_bonus'] * max(0, len(agreeing) - 1)
    if base >= RUBRIC_CONFIG['emit_threshold']:
        score = max(score, cluster_floor(interval.length))
    return int(min(100, score))
