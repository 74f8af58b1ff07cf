from sage.tools.change_point import ChangePointReport, SegmentComparison, change_points, compare_segments, regime_expand  # noqa: F401
from sage.tools.decomposition import Decomposition, decompose, difference  # noqa: F401
from sage.tools.imaging import ImageMatrix, gaf, line_chart, mtf, recurrence_image, to_png  # noqa: F401
from sage.tools.spectral import (AcfSplitReport, SpectrumReport, StftReport, WaveletReport,  # noqa: F401
                                 autocorrelation_split, fft_spectrum, stft, wavelet_energy)
from sage.tools.stats import (OutlierReport, RollingReport, StatsSummary, detect_outliers,  # noqa: F401
                              rolling_range, rolling_statistics, rolling_std, statistics)
from sage.tools.symbolic import RecurrenceReport, SaxWord, recurrence, sax  # noqa: F401
