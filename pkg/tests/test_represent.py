import numpy as np
import pytest

from sage.core.types import Series
from sage.represent.summary import estimate_tokens, full_listing, summarize


@pytest.mark.parametrize('text, tokens', [('', 0), ('a' * 8, 2), ('a' * 9, 3)])
def test_estimate_tokens(text, tokens):
    assert estimate_tokens(text) == tokens


def test_constant_window():
    summary = summarize(Series(values=[7.4] * 400), 300)
    assert summary.mean == pytest.approx(7.4)
    assert summary.std == pytest.approx(0.0, abs=1e-12)
    assert {v for _, v in summary.sampled} == {7}


def test_ramp_keeps_extrema():
    summary = summarize(Series(values=np.arange(400.0)), 300)
    indices = [i for i, _ in summary.sampled]
    assert 0 in indices and 399 in indices
    assert indices == sorted(set(indices))
    assert summary.estimated_tokens <= 300


def test_budget_and_reduction():
    rng = np.random.default_rng(11)
    for _ in range(50):
        values = np.cumsum(rng.normal(0.0, 1.0, 400)) * 10.0
        summary = summarize(Series(values=values), 500)
        assert summary.estimated_tokens <= 500
        assert summary.estimated_tokens <= 0.3 * estimate_tokens(full_listing(values))


def test_larger_budget_never_coarser():
    values = np.sin(np.arange(400) / 7.0) * 100.0
    strides = [summarize(Series(values=values), b).stride for b in (200, 300, 400, 500)]
    assert strides == sorted(strides, reverse=True)


def test_summary_does_not_touch_window():
    window = Series(values=np.linspace(-2.5, 2.5, 400))
    before = window.values.copy()
    summary = summarize(window, 300)
    assert np.array_equal(window.values, before)
    assert summary.text.splitlines()[0].startswith('n=400 ')
    assert len(summary.segment_stats) == 4
    # half-away-from-zero rounding of the endpoints
    assert dict(summary.sampled)[0] == -3 and dict(summary.sampled)[399] == 3
