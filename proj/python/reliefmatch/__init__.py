"""Crisis request/offer matching engine."""

from ._reliefmatch import (
    DEFAULT_EARTH_RADIUS_KM,
    GroundTruth,
    IndexConfig,
    MatchParams,
    MatchResult,
    OfferCorpus,
    Post,
    RegexSet,
    ReliefmatchError,
    SyntheticCorpus,
    VectorIndex,
    build_index,
    classify_heuristic,
    cosine_similarity,
    filter_candidates,
    generate_synthetic,
    haversine_km,
    load_index,
    match_all,
    offer_request_ratio,
    preprocess_text,
    read_posts,
    read_results,
    recall_at_k,
    score_pair,
    temporal_weight,
    topn_accuracy,
    write_posts,
    write_results,
)

__all__ = [name for name in dir() if not name.startswith("_")]
