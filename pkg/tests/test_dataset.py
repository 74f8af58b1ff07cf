import numpy as np
import pytest

from sage.core.errors import DegenerateSplit, EmptyFile, MissingColumn, MissingInput, ParseError
from sage.core.types import Series, WindowPlan
from sage.dataset.dataset import load_csv, load_dataset, load_jsonl, load_series, temporal_split, windows


def test_load_csv_with_labels(write_csv):
    path = write_csv('a.csv', 'timestamp,value,label\n1,1,0\n2,2,1\n3,3,0\n')
    series = load_csv(path, label_column='label', timestamp_column='timestamp')
    assert series.id == 'a'
    assert series.values.tolist() == [1.0, 2.0, 3.0]
    assert series.labels.tolist() == [0, 1, 0]
    assert series.timestamps.tolist() == [1, 2, 3]


def test_load_csv_forward_fills(write_csv):
    path = write_csv('b.csv', 'value\n5\nNaN\n7\n')
    assert load_csv(path).values.tolist() == [5.0, 5.0, 7.0]
    path = write_csv('c.csv', 'value\nnan\ninf\n7\n8\n')
    assert load_csv(path).values.tolist() == [7.0, 7.0, 7.0, 8.0]


def test_load_csv_errors(write_csv):
    with pytest.raises(MissingColumn):
        load_csv(write_csv('d.csv', 'value\n1\n'), label_column='label')
    with pytest.raises(ParseError) as err:
        load_csv(write_csv('e.csv', 'value\n1\nabc\n'))
    assert err.value.row == 1
    with pytest.raises(EmptyFile):
        load_csv(write_csv('f.csv', ''))
    with pytest.raises(EmptyFile):
        load_csv(write_csv('g.csv', 'value\n'))
    with pytest.raises(MissingInput):
        load_csv('/nonexistent/file.csv')


def test_load_jsonl(write_csv):
    path = write_csv('h.jsonl', '{"timestamp": 1, "value": 1.5, "label": 0}\n'
                                '{"timestamp": 2, "value": null, "label": 1}\n')
    series = load_series(path)
    assert series.values.tolist() == [1.5, 1.5]
    assert series.labels.tolist() == [0, 1]
    assert load_jsonl(path).labels is None


def test_load_dataset_directory(write_csv, tmp_path):
    write_csv('one.csv', 'value,label\n1,0\n2,0\n')
    write_csv('two.csv', 'value\n3\n4\n')
    dataset = load_dataset(str(tmp_path))
    assert [s.id for s in dataset] == ['one', 'two']
    assert dataset.series[0].labels is not None
    assert dataset.series[1].labels is None


@pytest.mark.parametrize('n, fraction, expected', [(10, 0.5, (5, 5)), (7, 0.5, (3, 4))])
def test_temporal_split(n, fraction, expected):
    series = Series(values=np.arange(n, dtype=float), labels=np.zeros(n))
    train, test = temporal_split(series, fraction)
    assert (len(train), len(test)) == expected
    assert np.concatenate([train.values, test.values]).tolist() == series.values.tolist()
    assert test.labels is not None


def test_temporal_split_degenerate():
    with pytest.raises(DegenerateSplit):
        temporal_split(Series(values=np.arange(10.0)), 0.05)


@pytest.mark.parametrize('n, offsets, last_length', [
    (800, [0, 400], 400),
    (850, [0, 400], 450),
    (300, [0], 300),
    (900, [0, 400, 800], 100),
])
def test_windows(n, offsets, last_length):
    plan = WindowPlan(400, 400)
    parts = windows(Series(values=np.arange(n, dtype=float)), plan)
    assert [o for o, _ in parts] == offsets
    assert len(parts[-1][1]) == last_length
    covered = np.concatenate([w.values for _, w in parts])
    assert covered.tolist() == list(range(n))
