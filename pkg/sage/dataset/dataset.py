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
import glob
import math
import os
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from sage.core.errors import DegenerateSplit, EmptyFile, MissingColumn, MissingInput, ParseError
from sage.core.types import Dataset, Series, WindowPlan
from sage.utils.file_utils import logging

_MISSING_TOKENS = {'', 'nan', 'na', 'n/a', 'null', 'none', 'inf', '+inf', '-inf',
                   'infinity', '+infinity', '-infinity'}

SERIES_SUFFIXES = ('.csv', '.jsonl')
# pipeline artifacts that share a directory with series files
RESERVED_FILES = ('samples.jsonl', 'records.jsonl')


def _parse_numeric(raw: pd.Series, column: str) -> np.ndarray:
    text = raw.astype(str).str.strip()
    numeric = pd.to_numeric(text, errors='coerce')
    bad = numeric.isna() & ~text.str.lower().isin(_MISSING_TOKENS)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError('column {} holds non-numeric value {!r}'.format(column, text.iloc[row]), row=row)
    return numeric.to_numpy(dtype=np.float64)


def _forward_fill(values: np.ndarray, column: str) -> np.ndarray:
    finite = np.isfinite(values)
    if finite.all():
        return values
    if not finite.any():
        raise ParseError('column {} has no finite values'.format(column))
    logging.warning('forward-filling {} non-finite values in column {}'.format(int((~finite).sum()), column))
    filled = pd.Series(np.where(finite, values, np.nan)).ffill().bfill()
    return filled.to_numpy(dtype=np.float64)


def _parse_labels(raw: pd.Series, column: str) -> np.ndarray:
    labels = _parse_numeric(raw, column)
    ok = np.isin(labels, (0.0, 1.0))
    if not ok.all():
        row = int(np.flatnonzero(~ok)[0])
        raise ParseError('label column {} must hold 0/1, got {!r}'.format(column, raw.iloc[row]), row=row)
    return labels.astype(np.int8)


def _parse_timestamps(raw: pd.Series, column: str) -> np.ndarray:
    text = raw.astype(str).str.strip()
    numeric = pd.to_numeric(text, errors='coerce')
    if not numeric.isna().any():
        return numeric.to_numpy().astype(np.int64)
    stamps = pd.to_datetime(text, errors='coerce')
    if stamps.isna().any():
        row = int(np.flatnonzero(stamps.isna().to_numpy())[0])
        raise ParseError('timestamp column {} holds {!r}'.format(column, text.iloc[row]), row=row)
    return (stamps.astype('int64') // 10 ** 9).to_numpy()


def frame_to_series(frame: pd.DataFrame, series_id: str, value_column: str,
                    label_column: Optional[str] = None,
                    timestamp_column: Optional[str] = None) -> Series:
    for column in (value_column, label_column, timestamp_column):
        if column is not None and column not in frame.columns:
            raise MissingColumn('column {} not found in {} (have {})'.format(column, series_id, list(frame.columns)))
    if len(frame) == 0:
        raise EmptyFile('{} has no rows'.format(series_id))
    values = _forward_fill(_parse_numeric(frame[value_column], value_column), value_column)
    labels = None if label_column is None else _parse_labels(frame[label_column], label_column)
    timestamps = None if timestamp_column is None else _parse_timestamps(frame[timestamp_column], timestamp_column)
    return Series(values=values, timestamps=timestamps, labels=labels, id=series_id)


def _series_id(path):
    return os.path.splitext(os.path.basename(path))[0]


def load_csv(path, value_column='value', label_column=None, timestamp_column=None) -> Series:
    if not os.path.exists(path):
        raise MissingInput('{} not found'.format(path))
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise EmptyFile('{} is empty'.format(path))
    except pd.errors.ParserError as e:
        raise ParseError('cannot parse {}: {}'.format(path, e))
    return frame_to_series(frame, _series_id(path), value_column, label_column, timestamp_column)


def load_jsonl(path, value_column='value', label_column=None, timestamp_column=None) -> Series:
    if not os.path.exists(path):
        raise MissingInput('{} not found'.format(path))
    if os.path.getsize(path) == 0:
        raise EmptyFile('{} is empty'.format(path))
    try:
        frame = pd.read_json(path, lines=True, dtype=False)
    except ValueError as e:
        raise ParseError('cannot parse {}: {}'.format(path, e))
    return frame_to_series(frame, _series_id(path), value_column, label_column, timestamp_column)


def _header(path):
    if path.endswith('.jsonl'):
        frame = pd.read_json(path, lines=True, dtype=False, nrows=1)
    else:
        frame = pd.read_csv(path, dtype=str, nrows=0, skipinitialspace=True)
    return set(frame.columns)


def load_series(path, value_column='value', label_column='label', timestamp_column='timestamp',
                require_labels=False) -> Series:
    """Load one CSV/JSONL file, attaching label/timestamp columns when present."""
    if not os.path.exists(path):
        raise MissingInput('{} not found'.format(path))
    try:
        header = _header(path)
    except (pd.errors.EmptyDataError, ValueError):
        raise EmptyFile('{} is empty'.format(path))
    if label_column not in header and not require_labels:
        label_column = None
    if timestamp_column not in header:
        timestamp_column = None
    loader = load_jsonl if path.endswith('.jsonl') else load_csv
    return loader(path, value_column, label_column, timestamp_column)


def list_series_files(path) -> List[str]:
    if os.path.isdir(path):
        files = []
        for suffix in SERIES_SUFFIXES:
            files.extend(glob.glob(os.path.join(path, '*{}'.format(suffix))))
        return sorted(f for f in files if os.path.basename(f) not in RESERVED_FILES)
    if not os.path.exists(path):
        raise MissingInput('{} not found'.format(path))
    return [path]


def load_dataset(path, value_column='value', label_column='label', timestamp_column='timestamp',
                 require_labels=False) -> Dataset:
    """Load a single series file or every CSV/JSONL file of a directory."""
    files = list_series_files(path)
    if not files:
        raise MissingInput('no .csv or .jsonl series under {}'.format(path))
    series = [load_series(f, value_column, label_column, timestamp_column, require_labels) for f in files]
    logging.info('loaded {} series from {}'.format(len(series), path))
    return Dataset(name=_series_id(os.path.normpath(path)), series=tuple(series))


def temporal_split(series: Series, train_fraction: float = 0.5) -> Tuple[Series, Series]:
    n = len(series)
    if not 0.0 < train_fraction < 1.0:
        raise DegenerateSplit('train_fraction {} outside (0, 1)'.format(train_fraction))
    n_train = int(math.floor(n * train_fraction + 1e-9))
    if n < 2 or n_train == 0 or n_train == n:
        raise DegenerateSplit('split of {} points at fraction {} leaves an empty side'.format(n, train_fraction))
    return series.slice(0, n_train), series.slice(n_train, n)


def windows(series: Series, plan: WindowPlan = WindowPlan()) -> List[Tuple[int, Series]]:
    """Slice fixed windows; a tail shorter than window/4 is merged into the previous window."""
    n = len(series)
    bounds = []
    offset = 0
    while offset < n:
        end = min(offset + plan.window, n)
        bounds.append([offset, end])
        if end == n:
            break
        offset += plan.stride
    if len(bounds) > 1:
        start, end = bounds[-1]
        if end - start < plan.window and end - start < plan.window / 4.0:
            bounds.pop()
            bounds[-1][1] = n
    return [(start, series.slice(start, end)) for start, end in bounds]
