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
"""Image encodings of a window for the vision path."""

import io
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from PIL import Image

from sage.config import TOOL_CONFIG
from sage.core.errors import TooShort
from sage.utils.common import as_float_array, downsample_mean, is_flat

IMAGE_KINDS = ('GAF', 'MTF', 'Recurrence', 'LineChart')


@dataclass(frozen=True, eq=False)
class ImageMatrix:
    kind: str
    data: np.ndarray
    rendered: Optional[bytes] = None

    def __post_init__(self):
        assert self.kind in IMAGE_KINDS, 'unknown image kind {}'.format(self.kind)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    def to_json(self) -> dict:
        return {'kind': self.kind, 'shape': list(self.shape),
                'data': np.round(np.asarray(self.data, dtype=np.float64), 6).tolist()}

    def describe(self) -> str:
        return '{} image {}x{}'.format(self.kind, *self.shape)


def to_png(data) -> bytes:
    """8-bit grayscale PNG with linear min-max scaling; a flat matrix maps to black."""
    data = np.asarray(data, dtype=np.float64)
    lo, hi = float(data.min()), float(data.max())
    if hi > lo:
        pixels = np.round((data - lo) / (hi - lo) * 255.0)
    else:
        pixels = np.zeros_like(data)
    buf = io.BytesIO()
    Image.fromarray(pixels.astype(np.uint8), mode='L').save(buf, format='PNG')
    return buf.getvalue()


def _image(kind, data, render):
    return ImageMatrix(kind=kind, data=data, rendered=to_png(data) if render else None)


def rescale_unit(x) -> np.ndarray:
    """Min-max rescale into [-1, 1]; constant input maps to 0."""
    x = as_float_array(x)
    if is_flat(x):
        return np.zeros_like(x)
    lo, hi = x.min(), x.max()
    return np.clip((2.0 * x - hi - lo) / (hi - lo), -1.0, 1.0)


def gaf(x, max_length=TOOL_CONFIG['gaf_max_length'], render=True) -> ImageMatrix:
    """Gramian angular summation field ``cos(phi_i + phi_j)``."""
    x = as_float_array(x)
    if len(x) < 4:
        raise TooShort('gaf', len(x), 4)
    a = rescale_unit(downsample_mean(x, max_length))
    s = np.sqrt(np.clip(1.0 - a * a, 0.0, 1.0))
    field = np.clip(np.outer(a, a) - np.outer(s, s), -1.0, 1.0)
    return _image('GAF', field, render)


def quantile_bins(x, bins: int) -> np.ndarray:
    """Bin index of every value by linear-interpolated quantile edges."""
    edges = np.quantile(x, np.linspace(0.0, 1.0, bins + 1))
    return np.searchsorted(edges[1:-1], x, side='right')


def mtf(x, bins=TOOL_CONFIG['mtf_bins'], max_length=TOOL_CONFIG['gaf_max_length'],
        render=True) -> Tuple[ImageMatrix, np.ndarray]:
    """Markov transition field and the row-normalised bin transition matrix."""
    x = as_float_array(x)
    if len(x) < bins:
        raise TooShort('mtf(bins={})'.format(bins), len(x), bins)
    x = downsample_mean(x, max_length)
    b = quantile_bins(x, bins)
    counts = np.zeros((bins, bins))
    np.add.at(counts, (b[:-1], b[1:]), 1.0)
    totals = counts.sum(axis=1, keepdims=True)
    transition = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    if len(np.unique(b)) == 1:
        transition[b[0], b[0]] = 1.0
    field = transition[b[:, None], b[None, :]]
    return _image('MTF', field, render), transition


def recurrence_image(matrix, render=True) -> ImageMatrix:
    return _image('Recurrence', np.asarray(matrix, dtype=np.float64), render)


def line_chart(x, width=4.0, height=2.0, dpi=64, render=True) -> ImageMatrix:
    """Raster line chart of the window as a grayscale matrix (white background).

    Draws on a private Agg canvas; no pyplot state is touched.
    """
    x = as_float_array(x)
    fig = Figure(figsize=(width, height), dpi=dpi)
    canvas = FigureCanvasAgg(fig)
    ax = fig.add_axes([0.02, 0.04, 0.96, 0.92])
    ax.plot(np.arange(len(x)), x, color='black', linewidth=1.0)
    ax.set_xlim(0, max(1, len(x) - 1))
    ax.axis('off')
    canvas.draw()
    rgba = np.asarray(canvas.buffer_rgba())
    gray = np.asarray(Image.fromarray(rgba, mode='RGBA').convert('L'), dtype=np.float64) / 255.0
    return _image('LineChart', gray, render)
