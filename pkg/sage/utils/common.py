# Copyright (c) 2020 Mobvoi Inc (Binbin Zhang)
#               2024 Alibaba Inc (authors: Xiang Lyu)
#               2025 SAGE contributors
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
"""Numeric helpers shared by tools, injectors and the reference database."""

import numpy as np

FLAT_EPS = 1e-12


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; the pinned algorithm keeps synthetic data reproducible."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed for sample ``keys`` of a batch seeded with ``seed``.

    Examples:
        >>> derive_seed(7, 3, 1) == derive_seed(7, 3, 1)
        True

    """
    state = np.random.SeedSequence([int(seed)] + [int(k) for k in keys]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def as_float_array(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64).reshape(-1)


def is_flat(x, std=None) -> bool:
    x = as_float_array(x)
    if std is None:
        std = float(np.std(x))
    scale = max(1.0, float(np.max(np.abs(x)))) if x.size else 1.0
    return std <= FLAT_EPS * scale


def znorm(x) -> np.ndarray:
    """Zero mean, unit population std; flat input maps to zeros."""
    x = as_float_array(x)
    std = float(np.std(x))
    if is_flat(x, std):
        return np.zeros_like(x)
    return (x - np.mean(x)) / std


def resample_linear(x, length: int) -> np.ndarray:
    x = as_float_array(x)
    if len(x) == length:
        return x.copy()
    if len(x) == 1:
        return np.full(length, x[0])
    src = np.linspace(0.0, 1.0, len(x))
    dst = np.linspace(0.0, 1.0, length)
    return np.interp(dst, src, x)


def downsample_mean(x, max_length: int) -> np.ndarray:
    """Average consecutive blocks so the result has at most ``max_length`` points."""
    x = as_float_array(x)
    if len(x) <= max_length:
        return x
    block = int(np.ceil(len(x) / max_length))
    pad = (-len(x)) % block
    counts = np.full(len(x) + pad, 1.0)
    counts[len(x):] = 0.0
    padded = np.concatenate([x, np.zeros(pad)])
    return padded.reshape(-1, block).sum(axis=1) / counts.reshape(-1, block).sum(axis=1)


def round_half_away(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return (np.sign(values) * np.floor(np.abs(values) + 0.5)).astype(np.int64)


def linear_slope(y) -> float:
    """Least-squares slope of ``y`` against its index."""
    y = as_float_array(y)
    if len(y) < 2:
        return 0.0
    t = np.arange(len(y), dtype=np.float64)
    t -= t.mean()
    return float(np.dot(t, y - y.mean()) / np.dot(t, t))


def clamp(value, lo, hi):
    return max(lo, min(hi, value))
