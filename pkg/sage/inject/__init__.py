from sage.inject.benchmark import (BenchmarkSample, generate_benchmark, make_base, read_benchmark,  # noqa: F401
                                   write_benchmark)
from sage.inject.injectors import (INJECTORS, Injection, inject, inject_amplitude_change,  # noqa: F401
                                   inject_contextual_point, inject_global_point, inject_mean_change,
                                   inject_pattern_shift, inject_seasonality, inject_trend_change,
                                   inject_variance_change, inject_waveform_distortion)
