#include "reliefmatch/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "reliefmatch/error.hpp"

namespace reliefmatch {

namespace {

double to_radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

void require_positive_delta(double delta, const char* name) {
  if (!(delta > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDelta, std::string(name) + " must be positive");
  }
}

void require_mode_fields(const Post& post, ScoringMode mode) {
  if (mode == ScoringMode::kText) return;
  if (!post.geo) {
    throw Error(ErrorCode::kMissingGeo, "post '" + post.id + "' has no geo-coordinates");
  }
  if (mode == ScoringMode::kTextTemporalSpatial && !post.has_time()) {
    throw Error(ErrorCode::kMissingTime, "post '" + post.id + "' has no timestamp");
  }
}

}  // namespace

double inner_product(EmbeddingView a, EmbeddingView b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * b[i];
  return sum;
}

double cosine_similarity(EmbeddingView a, EmbeddingView b) {
  const double dot = inner_product(a, b);
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw Error(ErrorCode::kZeroVector, "cosine similarity of a zero vector");
  }
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

double linear_decay(double value, double delta) {
  return 1.0 - std::min(value / delta, 1.0);
}

double delta_days(std::int64_t r_time, std::int64_t q_time) {
  const auto diff = q_time > r_time ? q_time - r_time : r_time - q_time;
  return static_cast<double>(diff) / kSecondsPerDay;
}

double temporal_weight(std::int64_t r_time, std::int64_t q_time, double delta_time_days) {
  require_positive_delta(delta_time_days, "delta_time");
  return linear_decay(delta_days(r_time, q_time), delta_time_days);
}

double haversine_km(const GeoPoint& p, const GeoPoint& q, double radius_km) {
  const double lat1 = to_radians(p.lat());
  const double lat2 = to_radians(q.lat());
  const double dlat = lat2 - lat1;
  const double dlon = to_radians(q.lon() - p.lon());
  const double sin_lat = std::sin(dlat / 2.0);
  const double sin_lon = std::sin(dlon / 2.0);
  double a = sin_lat * sin_lat + std::cos(lat1) * std::cos(lat2) * sin_lon * sin_lon;
  a = std::clamp(a, 0.0, 1.0);
  const double c = 2.0 * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
  return radius_km * c;
}

double spatial_weight(const GeoPoint& p, const GeoPoint& q, double delta_distance_km,
                      double radius_km) {
  require_positive_delta(delta_distance_km, "delta_distance");
  return linear_decay(haversine_km(p, q, radius_km), delta_distance_km);
}

ScoreBreakdown score_with_text(double s_text, const Post& request, const Post& offer,
                               const MatchParams& params) {
  require_mode_fields(request, params.mode);
  require_mode_fields(offer, params.mode);

  ScoreBreakdown out;
  out.s_text = s_text;
  if (request.geo && offer.geo) {
    out.distance_km = haversine_km(*request.geo, *offer.geo, params.earth_radius_km);
  }
  if (request.has_time() && offer.has_time()) {
    out.delta_t_days = delta_days(*request.timestamp, *offer.timestamp);
  }

  switch (params.mode) {
    case ScoringMode::kText:
      out.s_overall = s_text;
      break;
    case ScoringMode::kTextSpatial:
      require_positive_delta(params.delta_distance_km, "delta_distance");
      out.w_location = linear_decay(*out.distance_km, params.delta_distance_km);
      out.s_overall = params.ts_alpha * s_text + (1.0 - params.ts_alpha) * *out.w_location;
      break;
    case ScoringMode::kTextTemporalSpatial:
      require_positive_delta(params.delta_distance_km, "delta_distance");
      require_positive_delta(params.delta_time_days, "delta_time");
      out.w_location = linear_decay(*out.distance_km, params.delta_distance_km);
      out.w_time = linear_decay(*out.delta_t_days, params.delta_time_days);
      out.s_overall = s_text * *out.w_time * *out.w_location;
      break;
  }
  return out;
}

ScoreBreakdown score_pair(const ScoredPost& request, const ScoredPost& offer,
                          const MatchParams& params) {
  return score_with_text(cosine_similarity(request.embedding, offer.embedding), request.post,
                         offer.post, params);
}

}  // namespace reliefmatch
