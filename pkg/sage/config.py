#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
SAGE 配置文件
SAGE Configuration

默认值 -> 配置文件 (YAML/JSON) -> 命令行参数 -> 环境变量
defaults -> config file (YAML/JSON) -> CLI flags -> environment
"""

import os
import json
from dataclasses import dataclass, field, fields, replace
from typing import List, Optional, Union

import yaml

from sage.core.errors import ConfigError, MissingInput

# ========== 环境变量 ==========
ENV_BACKEND_URL = 'SAGE_BACKEND_URL'
ENV_BACKEND_MODEL = 'SAGE_BACKEND_MODEL'
ENV_API_KEY = 'SAGE_API_KEY'

# ========== 工具参数 ==========
TOOL_CONFIG = {
    "z_threshold": 3.0,             # 全局 Z 分数阈值
    "iqr_multiplier": 1.5,          # IQR 倍数
    "rolling_windows": [10, 25, 50],  # 多尺度滚动窗口
    "local_z_threshold": 2.5,       # 局部 Z 分数阈值
    "cusum_drift": 0.5,             # CUSUM 漂移 k (σ)
    "cusum_threshold": 5.0,         # CUSUM 判决阈值 h (σ)
    "cusum_warmup": 25,             # 每个区段的参考均值长度
    "stft_window": 64,
    "stft_hop": 32,
    "wavelet_max_level": 6,
    "sax_alphabet": 10,
    "sax_break_ranks": 3,           # 相邻符号跳变阈值
    "mtf_bins": 10,
    "recurrence_percentile": 0.1,
    "recurrence_max_length": 1000,
    "gaf_max_length": 400,
    "acf_peak_min": 0.2,
    "period_change_ratio": 0.2,
    "fft_peak_ratio": 3.0,          # 峰值 / 非零频点中位数
    "regime_reference": 100,
    "regime_chunk": 50,
    "regime_min_reference": 20,
    "regime_alpha": 0.05,
}

# ========== 分析器参数 ==========
ANALYZER_CONFIG = {
    "merge_gap": 2,
    "mean_shift_sigma": 1.0,          # Type 6: |均值偏移| ≥ 1σ
    "variance_band": [0.5, 2.0],      # Type 7: 方差比带外
    "trend_dead_zone": 0.5,           # Type 5: 斜率死区 (σ / 区段)
    "trend_change_sigma": 1.0,        # Type 5: 斜率变化量 (σ / 区段)
    "amplitude_band": [0.5, 2.0],     # Type 3: 振幅比带外
    "amplitude_edge_tolerance": 0.1,  # 带边界 10% 以内视为带外
    "stft_min_share": 0.5,
    "determinism_drop": 0.7,          # Type 9: 半窗确定性比
    "collapse_factor": 0.5,           # Type 9: 滚动标准差塌缩
    "collapse_min_length": 20,
    "collapse_window": 20,
    "phase_blocks": 8,                # 每周期 SAX 符号数
    "phase_min_rotation": 1,
    "sax_segment_length": 20,
    "strength_cap": 1000.0,
}

# ========== 检测器评分 ==========
RUBRIC_CONFIG = {
    "bands": [[5.0, 85], [4.0, 70], [3.0, 60], [2.5, 50]],
    "base_floor": 30,
    "agreement_bonus": 10,
    "cluster_floors": [[3, 70], [2, 60]],
    "emit_threshold": 50,
    "severity": [[0.85, "Urgent"], [0.70, "Error"], [0.50, "Warning"]],
}

# ========== 异常注入 ==========
INJECT_CONFIG = {
    "spike_sigma": 5.0,
    "context_sigma": 3.0,
    "amplitude_factor": 2.0,
    "frequency_multiplier": 2.5,
    "flatten_factor": 0.15,
    "trend_slope": 0.05,
    "strong_trend": 0.02,
    "mean_shift_sigma": 1.5,
    "variance_factors": [2.0, 2.5],
    "clip_band": 0.5,
    "edge_margin": 5,
    "min_separation": 10,
    "max_points": 3,
    "sigma_floor": 1e-12,
    "base_length": 400,
}

# ========== 上下文示例库 ==========
ICL_CONFIG = {
    "segment_length": 400,
    "keep_all_max": 12,
    "max_clusters": 20,
    "band_fraction": 0.1,
    "top_k": 3,
    "excerpt_length": 40,           # 参考片段最多点数
    "excerpt_margin": 10,
    "schema": "sage-icl/1",
}

# ========== 默认设置 ==========
DEFAULT_SETTINGS = {
    "window": 400,
    "stride": 400,
    "train_fraction": 0.5,
    "split": True,                  # False: 整条序列作为测试段
    "token_budget": 300,
    "merge_gap": 2,
    "backend": "rule",
    "supervisor_backend": "rule",
    "mock_dir": None,
    "icl_db": None,
    "use_icl": True,
    "use_vision": True,
    "multi_analyzer": True,
    "top_k": 3,
    "seed": 0,
    "threshold": "best-f1",
    "jobs": 1,
    "max_inflight": 4,
    "request_timeout": 60.0,
    "delay_k": 3,
    "metrics": ["point", "pa", "affiliation", "delayed"],
    "value_column": "value",
    "label_column": "label",
    "timestamp_column": "timestamp",
}

THRESHOLD_MODES = ('best-f1', 'compare')


@dataclass(frozen=True)
class SageConfig:
    window: int = DEFAULT_SETTINGS['window']
    stride: int = DEFAULT_SETTINGS['stride']
    train_fraction: float = DEFAULT_SETTINGS['train_fraction']
    split: bool = DEFAULT_SETTINGS['split']
    token_budget: int = DEFAULT_SETTINGS['token_budget']
    merge_gap: int = DEFAULT_SETTINGS['merge_gap']
    backend: str = DEFAULT_SETTINGS['backend']
    supervisor_backend: str = DEFAULT_SETTINGS['supervisor_backend']
    mock_dir: Optional[str] = DEFAULT_SETTINGS['mock_dir']
    icl_db: Optional[str] = DEFAULT_SETTINGS['icl_db']
    use_icl: bool = DEFAULT_SETTINGS['use_icl']
    use_vision: bool = DEFAULT_SETTINGS['use_vision']
    multi_analyzer: bool = DEFAULT_SETTINGS['multi_analyzer']
    top_k: int = DEFAULT_SETTINGS['top_k']
    seed: int = DEFAULT_SETTINGS['seed']
    threshold: Union[str, float] = DEFAULT_SETTINGS['threshold']
    jobs: int = DEFAULT_SETTINGS['jobs']
    max_inflight: int = DEFAULT_SETTINGS['max_inflight']
    request_timeout: float = DEFAULT_SETTINGS['request_timeout']
    delay_k: int = DEFAULT_SETTINGS['delay_k']
    metrics: List[str] = field(default_factory=lambda: list(DEFAULT_SETTINGS['metrics']))
    value_column: str = DEFAULT_SETTINGS['value_column']
    label_column: str = DEFAULT_SETTINGS['label_column']
    timestamp_column: str = DEFAULT_SETTINGS['timestamp_column']
    # 仅来自环境变量
    backend_url: Optional[str] = None
    backend_model: Optional[str] = None
    api_key: Optional[str] = field(default=None, repr=False)

    def validate(self):
        if self.window < 1 or self.stride < 1:
            raise ConfigError('window and stride must be positive')
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError('train_fraction must lie in (0, 1), got {}'.format(self.train_fraction))
        if not 200 <= self.token_budget <= 500:
            raise ConfigError('token_budget must lie in [200, 500], got {}'.format(self.token_budget))
        if self.merge_gap < 0:
            raise ConfigError('merge_gap must be non-negative')
        if self.top_k < 1:
            raise ConfigError('top_k must be positive')
        if self.jobs < 1 or self.max_inflight < 1:
            raise ConfigError('jobs and max_inflight must be positive')
        if self.delay_k < 0:
            raise ConfigError('delay_k must be non-negative')
        if isinstance(self.threshold, str):
            if self.threshold not in THRESHOLD_MODES:
                raise ConfigError('threshold must be a number in [0, 1] or one of {}'.format(THRESHOLD_MODES))
        elif not 0.0 <= float(self.threshold) <= 1.0:
            raise ConfigError('threshold must lie in [0, 1], got {}'.format(self.threshold))
        unknown = set(self.metrics) - {'point', 'pa', 'affiliation', 'delayed'}
        if unknown:
            raise ConfigError('unknown metrics {}'.format(sorted(unknown)))
        return self


_SECRET_KEYS = ('api_key', 'backend_url', 'backend_model')


def _coerce_threshold(value):
    if isinstance(value, str) and value not in THRESHOLD_MODES:
        try:
            return float(value)
        except ValueError:
            raise ConfigError('bad threshold {!r}'.format(value))
    return value


def read_config_file(path):
    """Parse a YAML or JSON config file into a dict (YAML is a JSON superset)."""
    if not os.path.exists(path):
        raise MissingInput('config file {} not found'.format(path))
    with open(path, 'r', encoding='utf8') as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError('cannot parse config {}: {}'.format(path, e))
    if not isinstance(data, dict):
        raise ConfigError('config {} must hold a mapping'.format(path))
    return data


def load_config(path=None, overrides=None, environ=None):
    """Build a validated SageConfig.

    Args:
        path: optional YAML/JSON config file
        overrides: dict of CLI flag values; ``None`` entries are ignored
        environ: environment mapping, defaults to ``os.environ``

    Returns:
        SageConfig
    """
    known = {f.name for f in fields(SageConfig)}
    values = {}
    if path:
        data = read_config_file(path)
        leaked = [k for k in _SECRET_KEYS if k in data]
        if leaked:
            raise ConfigError('{} may only come from the environment'.format(', '.join(leaked)))
        unknown = set(data) - known
        if unknown:
            raise ConfigError('unknown config keys {}'.format(sorted(unknown)))
        values.update(data)
    for key, value in (overrides or {}).items():
        if value is not None and key in known and key not in _SECRET_KEYS:
            values[key] = value
    if 'threshold' in values:
        values['threshold'] = _coerce_threshold(values['threshold'])
    environ = os.environ if environ is None else environ
    values['backend_url'] = environ.get(ENV_BACKEND_URL)
    values['backend_model'] = environ.get(ENV_BACKEND_MODEL)
    values['api_key'] = environ.get(ENV_API_KEY)
    try:
        config = SageConfig(**values)
    except TypeError as e:
        raise ConfigError(str(e))
    return config.validate()


def config_to_dict(config):
    """Serializable view without credentials."""
    data = {f.name: getattr(config, f.name) for f in fields(config) if f.name not in _SECRET_KEYS}
    return json.loads(json.dumps(data))


def with_overrides(config, **kwargs):
    return replace(config, **kwargs).validate()
