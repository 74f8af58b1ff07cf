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
"""Labelled synthetic benchmark: balanced injections over base signals, plus export."""

import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from sage.config import INJECT_CONFIG
from sage.core.errors import InjectError, MissingInput, ToolError
from sage.core.types import AnomalyType, Series
from sage.inject.injectors import Injection, inject
from sage.utils.common import derive_seed, make_rng
from sage.utils.file_utils import logging, read_json, read_jsonl, write_atomic, write_json, write_jsonl

BENCHMARK_SCHEMA = 'sage-synth/1'
BASE_KINDS = ('sine', 'trend_sine', 'noise')
MANIFEST = 'manifest.json'
SAMPLES = 'samples.jsonl'


@dataclass(frozen=True)
class BenchmarkSample:
    id: str
    series: Series
    injection: Injection
    base: str

    def to_json(self) -> dict:
        obj = {'id': self.id, 'base': self.base,
               'values': [float(v) for v in self.series.values],
               'labels': [int(v) for v in self.series.labels]}
        obj.update(self.injection.to_json())
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> 'BenchmarkSample':
        injection = Injection.from_json(obj)
        series = Series(values=np.asarray(obj['values'], dtype=np.float64),
                        labels=np.asarray(obj['labels'], dtype=np.int8), id=obj['id'])
        return cls(id=obj['id'], series=series, injection=injection, base=obj.get('base', 'given'))


def make_base(kind: str, length: int, seed: int) -> np.ndarray:
    """One clean base signal: a noisy sine, a sine on a linear trend, or white noise."""
    rng = make_rng(seed)
    t = np.arange(length, dtype=np.float64)
    noise = rng.normal(0.0, 1.0, length)
    if kind == 'noise':
        return noise
    period = float(rng.integers(16, 61))
    amplitude = float(rng.uniform(0.5, 2.0))
    phase = float(rng.uniform(0.0, 2 * np.pi))
    x = amplitude * np.sin(2 * np.pi * t / period + phase) + 0.1 * amplitude * noise
    if kind == 'trend_sine':
        x += float(rng.uniform(-1.0, 1.0)) * 0.005 * amplitude * t
    return x


def generate_benchmark(bases: Optional[Sequence[Series]] = None, per_type: int = 4, seed: int = 0,
                       length: int = INJECT_CONFIG['base_length'],
                       types: Sequence[AnomalyType] = tuple(AnomalyType),
                       max_attempts: int = 10) -> List[BenchmarkSample]:
    """Generate ``per_type`` labelled samples for every anomaly type.

    A failing injection (flat base, no period) is logged and retried on the
    next base with a fresh seed, up to ``max_attempts`` times per sample.

    Args:
        bases: real clean series to inject into; synthetic bases when None
        per_type: samples per anomaly type
        seed: batch seed, every sample derives its own
        length: length of the synthetic bases
        types: anomaly types to generate
        max_attempts: tries per sample before it is skipped

    Returns:
        list of BenchmarkSample, grouped by type
    """
    assert per_type >= 1, 'per_type must be positive'
    samples = []
    for kind in tqdm(types, desc='gen-synth'):
        kind = AnomalyType(kind)
        for k in range(per_type):
            sample = None
            for attempt in range(max_attempts):
                sample_seed = derive_seed(seed, int(kind), k, attempt)
                slot = k + attempt
                if bases:
                    base = bases[slot % len(bases)]
                    values, base_name = base.values, base.id
                else:
                    base_name = BASE_KINDS[slot % len(BASE_KINDS)]
                    values = make_base(base_name, length, derive_seed(sample_seed, 0))
                try:
                    injected, injection = inject(kind, values, sample_seed)
                except (InjectError, ToolError) as e:
                    logging.warning('type {} sample {} attempt {} on {} failed: {}'.format(
                        int(kind), k, attempt, base_name, e))
                    continue
                sample_id = 'type{}_{:03d}'.format(int(kind), k)
                series = Series(values=injected, labels=injection.labels(len(injected)), id=sample_id)
                sample = BenchmarkSample(sample_id, series, injection, base_name)
                break
            if sample is None:
                logging.warning('skipping type {} sample {} after {} attempts'.format(int(kind), k, max_attempts))
                continue
            samples.append(sample)
    return samples


def write_benchmark(samples: Sequence[BenchmarkSample], out_dir: str, seed: int) -> dict:
    """One labelled CSV per sample, ``samples.jsonl`` with the injections, and a manifest."""
    files = []
    for sample in samples:
        frame = pd.DataFrame({'timestamp': np.arange(len(sample.series)),
                              'value': sample.series.values,
                              'label': sample.series.labels})
        name = sample.id + '.csv'
        write_atomic(os.path.join(out_dir, name), frame.to_csv(index=False, float_format='%.10g'))
        files.append(name)
    write_jsonl(os.path.join(out_dir, SAMPLES), [s.to_json() for s in samples])
    counts = {}
    for s in samples:
        counts[str(int(s.injection.type))] = counts.get(str(int(s.injection.type)), 0) + 1
    manifest = {'schema': BENCHMARK_SCHEMA, 'seed': int(seed), 'samples': len(samples),
                'per_type': counts, 'files': files, 'injections': SAMPLES}
    write_json(os.path.join(out_dir, MANIFEST), manifest)
    logging.info('wrote {} samples to {}'.format(len(samples), out_dir))
    return manifest


def read_benchmark(path: str) -> Tuple[dict, List[BenchmarkSample]]:
    manifest_path = os.path.join(path, MANIFEST)
    if not os.path.exists(manifest_path):
        raise MissingInput('no benchmark manifest under {}'.format(path))
    manifest = read_json(manifest_path)
    samples = [BenchmarkSample.from_json(obj) for obj in read_jsonl(os.path.join(path, manifest['injections']))]
    return manifest, samples
