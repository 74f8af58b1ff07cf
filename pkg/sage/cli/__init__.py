from sage.cli.frontend import SageFrontEnd  # noqa: F401
from sage.cli.sage import Sage, SeriesResult, build_icl, read_records, records_rows, write_results  # noqa: F401
