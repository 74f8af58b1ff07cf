from sage.represent.summary import CompressedSummary, estimate_tokens, full_listing, summarize  # noqa: F401
