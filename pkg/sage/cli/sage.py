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
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from tqdm import tqdm

from sage.agents.backends import CompletionBackend
from sage.agents.supervisor import DiagnosisReport, supervise
from sage.cli.frontend import SageFrontEnd
from sage.config import SageConfig
from sage.core.errors import MissingInput
from sage.core.types import AnomalyRecord, Dataset, Series, sort_records
from sage.detector.detector import detect
from sage.icl.database import IclDatabase, build_db, load_db
from sage.represent.summary import summarize
from sage.tools.stats import statistics
from sage.utils.class_utils import build_backend
from sage.utils.file_utils import logging, read_jsonl, write_atomic, write_json, write_jsonl

RECORDS = 'records.jsonl'
REPORTS = 'reports'


@dataclass(frozen=True)
class SeriesResult:
    series_id: str
    records: List[AnomalyRecord]
    report: DiagnosisReport
    # test part in record coordinates
    test: Series


class Sage:

    def __init__(self, config: SageConfig, backend: Optional[CompletionBackend] = None,
                 supervisor_backend: Optional[CompletionBackend] = None, icl_db: Optional[IclDatabase] = None):
        self.config = config
        if icl_db is None and config.use_icl and config.icl_db:
            icl_db = load_db(config.icl_db)
        self.frontend = SageFrontEnd(config, icl_db)
        self.backend = backend if backend is not None else build_backend(config.backend, config)
        self.supervisor_backend = supervisor_backend if supervisor_backend is not None \
            else build_backend(config.supervisor_backend, config)
        self.tau = 0.5 if isinstance(config.threshold, str) else float(config.threshold)

    def detect_window(self, offset: int, window: Series) -> List[AnomalyRecord]:
        start_time = time.time()
        model_input = self.frontend.frontend_detect(offset, window)
        records = detect(model_input, self.backend, merge_gap=self.config.merge_gap,
                         multi_analyzer=self.config.multi_analyzer)
        logging.info('window {}@{} len {} summary tokens {} references {} records {} took {:.3f}s'.format(
            window.id, offset, len(window), model_input.summary.estimated_tokens, len(model_input.references),
            len(records), time.time() - start_time))
        return records

    def detect_series(self, series: Series) -> SeriesResult:
        _, test = self.frontend.split(series)
        records = []
        for offset, window in self.frontend.frontend_windows(test):
            records.extend(self.detect_window(offset, window))
        records = sort_records(records)
        summary = summarize(test, self.config.token_budget)
        report = supervise(records, statistics(test.values), tau=self.tau, backend=self.supervisor_backend,
                           series_id=series.id, summary_text=summary.text)
        logging.info('series {}: {} records, alarm level {}'.format(series.id, len(records),
                                                                    report.overall_alarm_level))
        return SeriesResult(series_id=series.id, records=records, report=report, test=test)

    def detect_dataset(self, dataset: Dataset) -> List[SeriesResult]:
        series = sorted(dataset.series, key=lambda s: s.id)
        if self.config.jobs <= 1:
            return [self.detect_series(s) for s in tqdm(series, desc='detect')]
        with ThreadPoolExecutor(max_workers=self.config.jobs) as executor:
            return list(tqdm(executor.map(self.detect_series, series), total=len(series), desc='detect'))


def build_icl(dataset: Dataset, config: SageConfig, segment_length: Optional[int] = None) -> IclDatabase:
    """Reference database from the training part of every series."""
    frontend = SageFrontEnd(config)
    train = [_train_part(frontend, series) for series in sorted(dataset.series, key=lambda s: s.id)]
    kwargs = {} if segment_length is None else {'segment_length': segment_length}
    return build_db(train, seed=config.seed, jobs=config.jobs, **kwargs)


def _train_part(frontend: SageFrontEnd, series: Series) -> Series:
    train, test = frontend.split(series)
    return test if train is None else train


def records_rows(results: Sequence[SeriesResult]) -> List[dict]:
    rows = []
    for result in sorted(results, key=lambda r: r.series_id):
        for record in result.records:
            row = {'series': result.series_id}
            row.update(record.to_json())
            rows.append(row)
    return rows


def write_results(results: Sequence[SeriesResult], out_dir: str, markdown: bool = True) -> str:
    """``records.jsonl`` plus one report JSON (and Markdown) per series; returns the records path."""
    path = os.path.join(out_dir, RECORDS)
    write_jsonl(path, records_rows(results))
    for result in results:
        base = os.path.join(out_dir, REPORTS, result.series_id)
        write_json(base + '.json', result.report.to_json())
        if markdown:
            write_atomic(base + '.md', result.report.to_markdown())
    logging.info('records of {} series saved in {}'.format(len(results), path))
    return path


def read_records(path: str) -> Dict[str, List[AnomalyRecord]]:
    if not os.path.exists(path):
        raise MissingInput('records file {} not found'.format(path))
    grouped: Dict[str, List[AnomalyRecord]] = {}
    for row in read_jsonl(path):
        grouped.setdefault(row['series'], []).append(AnomalyRecord.from_json(row))
    return {sid: sort_records(records) for sid, records in grouped.items()}
