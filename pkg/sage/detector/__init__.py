from sage.detector.detector import (DetectorInput, PooledCandidate, ScoredCandidate, completion_score,  # noqa: F401
                                   detect, pool_candidates, score_rule, threshold)
from sage.detector.rubric import band_score, rule_score  # noqa: F401
