from sage.core.errors import SageError  # noqa: F401
from sage.core.intervals import indices_to_intervals, labels_to_segments, merge_intervals, rasterize  # noqa: F401
from sage.core.types import (FAMILY_ORDER, AnomalyFamily, AnomalyRecord, AnomalyType, Dataset,  # noqa: F401
                             Interval, Series, WindowPlan, family_types, make_interval, sort_records)
