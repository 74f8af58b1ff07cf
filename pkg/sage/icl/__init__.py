from sage.icl.clustering import Clustering, pam, select_medoids  # noqa: F401
from sage.icl.database import (IclDatabase, IclEntry, IclReference, IclVariant, build_db, evidence_summary,  # noqa: F401
                               load_db, nearest_prototypes, normal_segments, retrieve, save_db)
from sage.icl.distance import band_width, dtw, envelope, lb_keogh  # noqa: F401
