from sage.dataset.dataset import (frame_to_series, list_series_files, load_csv, load_dataset,  # noqa: F401
                                  load_jsonl, load_series, temporal_split, windows)
