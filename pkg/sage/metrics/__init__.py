from sage.metrics.evaluation import EvalReport, TypeEvalReport, evaluate_dataset, threshold_comparison, type_eval  # noqa: F401
from sage.metrics.metrics import (METRICS, PRF, affiliation_f1, best_f1_search, delayed_f1, evaluate_metric,  # noqa: F401
                                  pa_f1, point_f1, prf)
