from nanda.safesearch.query import SearchQuery, parse_query
from nanda.safesearch.engine import (
    RankedResult,
    aggregate_reputation,
    capability_matches,
    matches,
    rank,
    run_search,
)

__all__ = [
    "RankedResult",
    "SearchQuery",
    "aggregate_reputation",
    "capability_matches",
    "matches",
    "parse_query",
    "rank",
    "run_search",
]
