from sage.analyzers.base import Candidate, EvidenceBundle, merge_candidates, soft_bundle  # noqa: F401
from sage.analyzers.pattern import pattern_analyze  # noqa: F401
from sage.analyzers.point import point_analyze  # noqa: F401
from sage.analyzers.runner import ANALYZERS, run_all, run_one  # noqa: F401
from sage.analyzers.seasonal import season_analyze  # noqa: F401
from sage.analyzers.structural import struct_analyze  # noqa: F401
