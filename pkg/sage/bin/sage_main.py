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
"""Command-line entry point.

Exit codes: 0 success, 1 unexpected toolkit error, 2 missing input,
3 bad configuration, 1x ingestion, 2x tools, 3x injection, 4x reference
database, 5x evaluation, 6x completion backend (see ``sage.core.errors``).
"""

from __future__ import print_function

import argparse
import glob
import os
import sys

from sage.agents.supervisor import DiagnosisReport
from sage.cli.frontend import SageFrontEnd
from sage.cli.sage import Sage, build_icl, read_records, write_results
from sage.config import THRESHOLD_MODES, load_config
from sage.core.errors import MissingInput, SageError
from sage.dataset.dataset import load_dataset
from sage.icl.database import save_db
from sage.inject.benchmark import SAMPLES, generate_benchmark, read_benchmark, write_benchmark
from sage.metrics.evaluation import evaluate_dataset, type_eval
from sage.metrics.metrics import METRICS
from sage.utils.file_utils import logging, read_json, set_log_level, write_atomic, write_json


def _add_common(parser):
    parser.add_argument('--config', default=None, help='YAML/JSON config file')
    parser.add_argument('--log_level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    parser.add_argument('--jobs', type=int, default=None, help='series processed in parallel')
    parser.add_argument('--train_fraction', type=float, default=None)
    parser.add_argument('--no_split', action='store_true', help='treat every whole series as test data')


def get_args(argv=None):
    parser = argparse.ArgumentParser(description='time-series anomaly detection and diagnosis')
    sub = parser.add_subparsers(dest='command', required=True)

    detect = sub.add_parser('detect', help='detect anomalies and write records and reports')
    _add_common(detect)
    detect.add_argument('dataset', help='series file or directory of .csv/.jsonl files')
    detect.add_argument('--out', required=True, help='output directory')
    detect.add_argument('--backend', default=None, choices=['rule', 'mock', 'http'])
    detect.add_argument('--supervisor_backend', default=None, choices=['rule', 'mock', 'http'])
    detect.add_argument('--mock_dir', default=None, help='canned responses for the mock backend')
    detect.add_argument('--icl_db', default=None, help='reference database directory')
    detect.add_argument('--no_icl', action='store_true')
    detect.add_argument('--no_vision', action='store_true')
    detect.add_argument('--single_analyzer', action='store_true', help='generalist scoring without agreement')
    detect.add_argument('--window', type=int, default=None)
    detect.add_argument('--stride', type=int, default=None)
    detect.add_argument('--token_budget', type=int, default=None)
    detect.add_argument('--merge_gap', type=int, default=None)
    detect.add_argument('--top_k', type=int, default=None)
    detect.add_argument('--threshold', default=None, help='supervisor tau in [0, 1]')
    detect.add_argument('--no_markdown', action='store_true', help='skip the Markdown reports')

    icl = sub.add_parser('build-icl', help='build the synthetic reference database')
    _add_common(icl)
    icl.add_argument('dataset', help='training series file or directory')
    icl.add_argument('--out', required=True, help='database directory')
    icl.add_argument('--seed', type=int, required=True)
    icl.add_argument('--segment_length', type=int, default=None)

    synth = sub.add_parser('gen-synth', help='generate the labelled synthetic benchmark')
    synth.add_argument('--config', default=None, help='YAML/JSON config file')
    synth.add_argument('--log_level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    synth.add_argument('--out', required=True, help='benchmark directory')
    synth.add_argument('--per_type', type=int, default=4)
    synth.add_argument('--length', type=int, default=None)
    synth.add_argument('--seed', type=int, required=True)

    ev = sub.add_parser('eval', help='score records against labels')
    _add_common(ev)
    ev.add_argument('records', help='records.jsonl written by detect')
    ev.add_argument('dataset', help='labelled series file or directory')
    ev.add_argument('--metrics', nargs='+', default=None, choices=sorted(METRICS))
    ev.add_argument('--threshold', default=None,
                    help='{} or a fixed tau in [0, 1]'.format(' | '.join(THRESHOLD_MODES)))
    ev.add_argument('--delay_k', type=int, default=None)
    ev.add_argument('--out', default=None, help='evaluation JSON path')

    report = sub.add_parser('report', help='render diagnosis report JSON files as Markdown')
    report.add_argument('reports', nargs='+', help='report JSON files or directories')
    report.add_argument('--log_level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    report.add_argument('--out', default=None, help='directory for the Markdown files')
    return parser.parse_args(argv)


_OVERRIDES = ('jobs', 'train_fraction', 'backend', 'supervisor_backend', 'mock_dir', 'icl_db', 'window', 'stride',
              'token_budget', 'merge_gap', 'top_k', 'threshold', 'seed', 'metrics', 'delay_k')


def config_from_args(args):
    overrides = {key: getattr(args, key) for key in _OVERRIDES if hasattr(args, key)}
    flags = {'no_split': 'split', 'no_icl': 'use_icl', 'no_vision': 'use_vision', 'single_analyzer': 'multi_analyzer'}
    for flag, key in flags.items():
        if getattr(args, flag, False):
            overrides[key] = False
    return load_config(getattr(args, 'config', None), overrides)


def cmd_detect(args, config):
    dataset = load_dataset(args.dataset, config.value_column, config.label_column, config.timestamp_column)
    results = Sage(config).detect_dataset(dataset)
    write_results(results, args.out, markdown=not args.no_markdown)
    return 0


def cmd_build_icl(args, config):
    dataset = load_dataset(args.dataset, config.value_column, config.label_column, config.timestamp_column)
    db = build_icl(dataset, config, args.segment_length)
    save_db(db, args.out)
    return 0


def cmd_gen_synth(args, config):
    kwargs = {} if args.length is None else {'length': args.length}
    samples = generate_benchmark(per_type=args.per_type, seed=config.seed, **kwargs)
    write_benchmark(samples, args.out, config.seed)
    logging.info('{} samples written to {}'.format(len(samples), args.out))
    return 0


def _ground_truth(dataset, config):
    frontend = SageFrontEnd(config)
    gts = {}
    for series in dataset.series:
        gts[series.id] = frontend.split(series)[1].labels
    return gts


def cmd_eval(args, config):
    records = read_records(args.records)
    dataset = load_dataset(args.dataset, config.value_column, config.label_column, config.timestamp_column,
                           require_labels=True)
    gts = _ground_truth(dataset, config)
    unknown = sorted(set(records) - set(gts))
    if unknown:
        logging.warning('records of unknown series ignored: {}'.format(unknown))
    report = evaluate_dataset(records, gts, metrics=config.metrics, threshold_mode=config.threshold,
                              delay_k=config.delay_k, dataset=dataset.name)
    print(report.render_table())
    output = report.to_json()
    samples_path = os.path.join(args.dataset, SAMPLES)
    if os.path.isdir(args.dataset) and os.path.exists(samples_path):
        if config.split:
            logging.warning('type evaluation skipped: benchmark records must come from detect --no_split')
        else:
            _, samples = read_benchmark(args.dataset)
            types = type_eval([(s.id, records.get(s.id, []), s.injection) for s in samples])
            print()
            print(types.render_table())
            output['types'] = types.to_json()
    if args.out:
        write_json(args.out, output)
    return 0


def _report_files(paths):
    files = []
    for path in paths:
        if os.path.isdir(path):
            files.extend(sorted(glob.glob(os.path.join(path, '*.json'))))
        elif os.path.exists(path):
            files.append(path)
        else:
            raise MissingInput('{} not found'.format(path))
    return files


def cmd_report(args):
    for path in _report_files(args.reports):
        report = DiagnosisReport.from_json(read_json(path))
        name = os.path.splitext(os.path.basename(path))[0] + '.md'
        target = os.path.join(args.out, name) if args.out else os.path.splitext(path)[0] + '.md'
        write_atomic(target, report.to_markdown())
        logging.info('report {} rendered to {}'.format(path, target))
    return 0


def main(argv=None):
    args = get_args(argv)
    set_log_level(args.log_level)
    try:
        if args.command == 'report':
            return cmd_report(args)
        config = config_from_args(args)
        handlers = {'detect': cmd_detect, 'build-icl': cmd_build_icl, 'gen-synth': cmd_gen_synth, 'eval': cmd_eval}
        return handlers[args.command](args, config)
    except SageError as e:
        logging.error('{}: {}'.format(type(e).__name__, e))
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
