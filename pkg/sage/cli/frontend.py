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
"""Window preparation: split, windowing, summary, analyzers and references."""

from typing import List, Optional, Tuple

from sage.analyzers.runner import run_all
from sage.config import SageConfig
from sage.core.types import Series, WindowPlan
from sage.dataset.dataset import temporal_split, windows
from sage.detector.detector import DetectorInput
from sage.icl.database import IclDatabase, retrieve
from sage.represent.summary import summarize
from sage.utils.file_utils import logging


class SageFrontEnd:

    def __init__(self, config: SageConfig, icl_db: Optional[IclDatabase] = None):
        self.config = config
        self.icl_db = icl_db if config.use_icl else None
        self.plan = WindowPlan(window=config.window, stride=config.stride)

    def split(self, series: Series) -> Tuple[Optional[Series], Series]:
        """(train, test); the whole series is the test part when splitting is off."""
        if not self.config.split:
            return None, series
        return temporal_split(series, self.config.train_fraction)

    def frontend_windows(self, test: Series) -> List[Tuple[int, Series]]:
        return windows(test, self.plan)

    def frontend_detect(self, offset: int, window: Series) -> DetectorInput:
        summary = summarize(window, self.config.token_budget)
        bundles = run_all(window, summary, use_vision=self.config.use_vision)
        references = ()
        if self.icl_db is not None:
            candidate_types = {t for b in bundles for c in b.candidates for t in c.types}
            if candidate_types:
                references = tuple(retrieve(self.icl_db, window.values, candidate_types, top_k=self.config.top_k))
                logging.debug('window {} of {}: {} references for types {}'.format(
                    offset, window.id, len(references), sorted(int(t) for t in candidate_types)))
        images = tuple(image for b in bundles for image in b.images) if self.config.use_vision else ()
        return DetectorInput(offset=offset, length=len(window), summary=summary, bundles=tuple(bundles),
                             references=references, images=images)
