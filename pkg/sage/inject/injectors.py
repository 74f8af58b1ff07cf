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
"""Rule-based injectors for the nine anomaly types.

Every injector takes the clean values and a seed and returns the modified
copy together with an :class:`Injection` describing what was done.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np

from sage.config import INJECT_CONFIG
from sage.core.errors import DegenerateSigma, NoPeriod, TooShort
from sage.core.intervals import rasterize
from sage.core.types import AnomalyType, Interval
from sage.tools.spectral import fft_spectrum
from sage.utils.common import as_float_array, linear_slope, make_rng


@dataclass(frozen=True)
class Injection:
    type: AnomalyType
    ground_truth: Tuple[Interval, ...]
    params: Dict[str, object] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'type', AnomalyType(self.type))
        object.__setattr__(self, 'ground_truth', tuple(Interval(int(s), int(e)) for s, e in self.ground_truth))
        assert self.ground_truth, 'injection without ground truth'

    @property
    def span(self) -> Interval:
        return Interval(self.ground_truth[0].start, self.ground_truth[-1].end)

    def labels(self, n: int) -> np.ndarray:
        assert self.span.end < n, 'ground truth {} outside a series of {}'.format(tuple(self.span), n)
        return rasterize(self.ground_truth, n)

    def to_json(self) -> dict:
        return {'type': int(self.type), 'ground_truth': [list(g) for g in self.ground_truth],
                'params': {k: v.item() if isinstance(v, np.generic) else v for k, v in self.params.items()},
                'seed': int(self.seed)}

    @classmethod
    def from_json(cls, obj: dict) -> 'Injection':
        return cls(type=obj['type'], ground_truth=tuple(tuple(g) for g in obj['ground_truth']),
                   params=dict(obj.get('params', {})), seed=int(obj.get('seed', 0)))


def _sigma(x: np.ndarray, injector: str) -> float:
    sigma = float(np.std(x))
    if sigma < INJECT_CONFIG['sigma_floor']:
        raise DegenerateSigma('{}: input std {:.3g} is below the floor'.format(injector, sigma))
    return sigma


def _change_point(n: int, rng: np.random.Generator) -> int:
    return int(rng.integers(math.ceil(0.4 * n), math.floor(0.6 * n) + 1))


def pick_positions(n: int, rng: np.random.Generator, injector: str) -> List[int]:
    """1 to ``max_points`` isolated positions away from the edges."""
    margin, separation = INJECT_CONFIG['edge_margin'], INJECT_CONFIG['min_separation']
    if n < 2 * margin + 1:
        raise TooShort(injector, n, 2 * margin + 1)
    count = int(rng.integers(1, INJECT_CONFIG['max_points'] + 1))
    allowed = np.arange(margin, n - margin)
    chosen = []
    for _ in range(count):
        if allowed.size == 0:
            break
        p = int(rng.choice(allowed))
        chosen.append(p)
        allowed = allowed[np.abs(allowed - p) >= separation]
    return sorted(chosen)


def _point_injection(kind, x, positions, shifts, seed, params):
    out = x.copy()
    out[positions] += shifts
    params = dict(params, shifts=[float(s) for s in shifts])
    return out, Injection(kind, tuple((p, p) for p in positions), params, seed)


def inject_global_point(x, seed: int) -> Tuple[np.ndarray, Injection]:
    x = as_float_array(x).copy()
    rng = make_rng(seed)
    sigma = _sigma(x, 'inject_global_point')
    positions = pick_positions(len(x), rng, 'inject_global_point')
    signs = rng.choice([-1.0, 1.0], size=len(positions))
    magnitude = INJECT_CONFIG['spike_sigma'] * sigma
    return _point_injection(AnomalyType.GLOBAL_POINT, x, positions, signs * magnitude, seed,
                            {'sigma': sigma, 'magnitude': magnitude})


def local_window(n: int, i: int, width: int) -> Tuple[int, int]:
    """Half-open centered window of ``width`` points around ``i``, shifted inside ``[0, n)``."""
    start = min(max(0, i - width // 2), max(0, n - width))
    return start, min(n, start + width)


def inject_contextual_point(x, seed: int) -> Tuple[np.ndarray, Injection]:
    x = as_float_array(x).copy()
    rng = make_rng(seed)
    n = len(x)
    width = max(10, n // 20)
    positions = pick_positions(n, rng, 'inject_contextual_point')
    signs = rng.choice([-1.0, 1.0], size=len(positions))
    local = []
    for p in positions:
        start, end = local_window(n, p, width)
        s = float(np.std(x[start:end]))
        if s < INJECT_CONFIG['sigma_floor']:
            raise DegenerateSigma('inject_contextual_point: flat local window around {}'.format(p))
        local.append(s)
    shifts = signs * INJECT_CONFIG['context_sigma'] * np.asarray(local)
    return _point_injection(AnomalyType.CONTEXTUAL_POINT, x, positions, shifts, seed,
                            {'window': width, 'local_std': local})


def inject_amplitude_change(x, seed: int) -> Tuple[np.ndarray, Injection]:
    x = as_float_array(x).copy()
    n = len(x)
    half = n // 2
    m = float(x[half:].mean())
    factor = INJECT_CONFIG['amplitude_factor']
    x[half:] = m + factor * (x[half:] - m)
    return x, Injection(AnomalyType.AMPLITUDE_CHANGE, ((half, n - 1),), {'factor': factor, 'mean': m}, seed)


def speed_up(x: np.ndarray, start: int, period: int, multiplier: float) -> np.ndarray:
    """Replay the suffix from ``start`` with its phase advancing ``multiplier`` times faster.

    Sample positions wrap inside a whole number of periods so the replayed
    waveform stays continuous.
    """
    n = len(x)
    span = (n - start) // period * period
    steps = np.arange(n - start, dtype=np.float64)
    positions = start + np.mod(multiplier * steps, span)
    return np.interp(positions, np.arange(n, dtype=np.float64), x)


def inject_seasonality(x, seed: int) -> Tuple[np.ndarray, Injection]:
    x = as_float_array(x).copy()
    rng = make_rng(seed)
    n = len(x)
    half = n // 2
    variant = 'frequency' if rng.random() < 0.5 else 'flatten'
    period = fft_spectrum(x).dominant_period if variant == 'frequency' else None
    if variant == 'frequency' and (period is None or (n - half) < period):
        variant = 'flatten'
    if variant == 'frequency':
        multiplier = INJECT_CONFIG['frequency_multiplier']
        x[half:] = speed_up(x, half, int(period), multiplier)
        params = {'variant': 'frequency', 'period': int(period), 'multiplier': multiplier}
    else:
        sigma = float(np.std(x))
        factor = INJECT_CONFIG['flatten_factor']
        m = float(x[half:].mean())
        noise = rng.normal(0.0, factor * sigma, n - half)
        x[half:] = m + factor * (x[half:] - m) + noise
        params = {'variant': 'flatten', 'factor': factor, 'noise_std': factor * sigma}
    return x, Injection(AnomalyType.SEASONALITY_ANOMALY, ((half, n - 1),), params, seed)


def inject_trend_change(x, seed: int) -> Tuple[np.ndarray, Injection]:
    x = as_float_array(x).copy()
    rng = make_rng(seed)
    n = len(x)
    start = n // 2
    sigma = float(np.std(x))
    magnitude = max(INJECT_CONFIG['trend_slope'] * sigma, INJECT_CONFIG['trend_slope'])
    existing = linear_slope(x)
    t = np.arange(n, dtype=np.float64)
    residual = float(np.std(x - existing * (t - t.mean()) - x.mean()))
    if abs(existing) > INJECT_CONFIG['strong_trend'] * residual:
        sign = -1.0 if existing > 0 else 1.0
    else:
        sign = float(rng.choice([-1.0, 1.0]))
    slope = sign * magnitude
    x[start:] += slope * np.arange(n - start, dtype=np.float64)
    return x, Injection(AnomalyType.TREND_CHANGE, ((start, n - 1),),
                        {'slope': slope, 'existing_slope': existing, 'residual_std': residual}, seed)


def inject_mean_change(x, seed: int) -> Tuple[np.ndarray, Injection]:
    x = as_float_array(x).copy()
    rng = make_rng(seed)
    n = len(x)
    sigma = _sigma(x, 'inject_mean_change')
    cp = _change_point(n, rng)
    shift = float(rng.choice([-1.0, 1.0])) * INJECT_CONFIG['mean_shift_sigma'] * sigma
    x[cp:] += shift
    return x, Injection(AnomalyType.MEAN_CHANGE_POINT, ((cp, n - 1),), {'change_point': cp, 'shift': shift}, seed)


def inject_variance_change(x, seed: int) -> Tuple[np.ndarray, Injection]:
    x = as_float_array(x).copy()
    rng = make_rng(seed)
    n = len(x)
    cp = _change_point(n, rng)
    factor = float(rng.choice(INJECT_CONFIG['variance_factors']))
    if float(np.std(x[cp:])) < INJECT_CONFIG['sigma_floor']:
        raise DegenerateSigma('inject_variance_change: flat suffix from {}'.format(cp))
    m = float(x[cp:].mean())
    x[cp:] = m + factor * (x[cp:] - m)
    return x, Injection(AnomalyType.VARIANCE_CHANGE, ((cp, n - 1),), {'change_point': cp, 'factor': factor}, seed)


def inject_pattern_shift(x, seed: int) -> Tuple[np.ndarray, Injection]:
    x = as_float_array(x).copy()
    n = len(x)
    half = n // 2
    period = fft_spectrum(x).dominant_period
    if period is None or period < 4:
        raise NoPeriod('inject_pattern_shift needs a dominant period of at least 4, found {}'.format(period))
    shift = int(period) // 4
    x[half:] = np.roll(x[half:], shift)
    return x, Injection(AnomalyType.PATTERN_SHIFT, ((half, n - 1),), {'period': int(period), 'shift': shift}, seed)


def inject_waveform_distortion(x, seed: int) -> Tuple[np.ndarray, Injection]:
    x = as_float_array(x).copy()
    n = len(x)
    start, end = int(0.4 * n), min(n - 1, int(0.7 * n))
    region = x[start:end + 1]
    mu, s = float(region.mean()), float(region.std())
    band = INJECT_CONFIG['clip_band'] * s
    x[start:end + 1] = np.clip(region, mu - band, mu + band)
    return x, Injection(AnomalyType.WAVEFORM_DISTORTION, ((start, end),), {'mean': mu, 'std': s, 'band': band}, seed)


INJECTORS: Dict[AnomalyType, Callable[[np.ndarray, int], Tuple[np.ndarray, Injection]]] = {
    AnomalyType.GLOBAL_POINT: inject_global_point,
    AnomalyType.CONTEXTUAL_POINT: inject_contextual_point,
    AnomalyType.AMPLITUDE_CHANGE: inject_amplitude_change,
    AnomalyType.SEASONALITY_ANOMALY: inject_seasonality,
    AnomalyType.TREND_CHANGE: inject_trend_change,
    AnomalyType.MEAN_CHANGE_POINT: inject_mean_change,
    AnomalyType.VARIANCE_CHANGE: inject_variance_change,
    AnomalyType.PATTERN_SHIFT: inject_pattern_shift,
    AnomalyType.WAVEFORM_DISTORTION: inject_waveform_distortion,
}


def inject(kind: AnomalyType, x, seed: int) -> Tuple[np.ndarray, Injection]:
    return INJECTORS[AnomalyType(kind)](x, seed)
