#pragma once

#include <cstdint>
#include <optional>

#include "reliefmatch/core.hpp"

namespace reliefmatch {

struct ScoreBreakdown {
  double s_text = 0.0;
  std::optional<double> w_time;
  std::optional<double> w_location;
  double s_overall = 0.0;
  std::optional<double> distance_km;
  std::optional<double> delta_t_days;
};

// dot(a, b) / (|a| |b|), accumulated in double and clamped to [-1, 1].
// Throws kDimensionMismatch; zero vectors yield kZeroVector.
double cosine_similarity(EmbeddingView a, EmbeddingView b);

// Plain inner product with double accumulation; equals cosine for unit rows.
double inner_product(EmbeddingView a, EmbeddingView b);

double delta_days(std::int64_t r_time, std::int64_t q_time);

// 1 - min(|q - r| / delta, 1), with the difference taken in fractional days.
double temporal_weight(std::int64_t r_time, std::int64_t q_time, double delta_time_days);

// Great-circle distance by the haversine formula.
double haversine_km(const GeoPoint& p, const GeoPoint& q,
                    double radius_km = kDefaultEarthRadiusKm);

// 1 - min(d / delta, 1) where d = haversine_km(p, q, radius_km).
double spatial_weight(const GeoPoint& p, const GeoPoint& q, double delta_distance_km,
                      double radius_km = kDefaultEarthRadiusKm);

// Linear decay shared by both weights; exposed for property tests.
double linear_decay(double value, double delta);

// One side of a pair: the post's metadata and its unit embedding.
struct ScoredPost {
  const Post& post;
  EmbeddingView embedding;
};

// Combines textual similarity with the proximity weights according to
// params.mode:
//   T   -> s_text
//   TS  -> alpha * s_text + (1 - alpha) * w_location
//   TTS -> s_text * w_time * w_location
// TS needs geo on both posts, TTS additionally needs timestamps.
ScoreBreakdown score_pair(const ScoredPost& request, const ScoredPost& offer,
                          const MatchParams& params);

// Same as score_pair, with the textual similarity already computed.
ScoreBreakdown score_with_text(double s_text, const Post& request, const Post& offer,
                               const MatchParams& params);

}  // namespace reliefmatch
