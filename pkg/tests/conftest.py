# -*- coding: utf-8 -*-
"""
共享测试信号
Shared synthetic signals for the SAGE test-suite
"""

import numpy as np
import pytest

from sage.core.types import Series


def make_sine(n=400, period=20, amplitude=1.0, phase=0.0):
    t = np.arange(n, dtype=np.float64)
    return amplitude * np.sin(2 * np.pi * t / period + phase)


def make_noise(n=400, seed=0, scale=1.0):
    return np.random.default_rng(seed).normal(0.0, scale, n)


@pytest.fixture
def sine():
    return make_sine()


@pytest.fixture
def noise():
    return make_noise()


@pytest.fixture
def noisy_sine():
    return make_sine(period=50, amplitude=3.0) + make_noise(seed=1, scale=0.3)


@pytest.fixture
def step_series():
    values = np.concatenate([np.zeros(200), np.full(200, 5.0)]) + make_noise(seed=2, scale=0.5)
    return Series(values=values, id='step')


@pytest.fixture
def write_csv(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding='utf8')
        return str(path)
    return _write
