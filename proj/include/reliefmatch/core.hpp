#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reliefmatch {

inline constexpr double kDefaultEarthRadiusKm = 6371.0;
inline constexpr double kSecondsPerDay = 86400.0;

// Latitude/longitude in degrees. Construction rejects out-of-range values.
class GeoPoint {
 public:
  GeoPoint(double lat, double lon);

  double lat() const noexcept { return lat_; }
  double lon() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_;
  double lon_;
};

enum class PostKind { kUnlabeled, kPotentialCandidate, kRequest, kOffer, kOther };

enum class Resource { kMoney, kVolunteer, kCloth, kShelter, kMedical, kFood };

inline constexpr Resource kAllResources[] = {
    Resource::kMoney,   Resource::kVolunteer, Resource::kCloth,
    Resource::kShelter, Resource::kMedical,   Resource::kFood};

std::string_view to_string(PostKind kind);
std::string_view to_string(Resource resource);
PostKind parse_post_kind(std::string_view name);
Resource parse_resource(std::string_view name);

struct Post {
  std::string id;
  std::string text;
  std::string lang = "und";
  // Epoch seconds, UTC. Absent and zero both count as "no timestamp".
  std::optional<std::int64_t> timestamp;
  std::optional<GeoPoint> geo;
  PostKind kind = PostKind::kUnlabeled;
  std::optional<Resource> resource;
  // Grouping keys supplied at ingestion, used by offer/request ratio analytics.
  std::optional<std::string> country;
  std::optional<std::string> region;

  bool has_time() const noexcept { return timestamp.has_value() && *timestamp != 0; }
};

// Returns the post unchanged when the requested fields are present and all
// invariants hold; throws Error(kMissingGeo | kMissingTime | kInvalidRange |
// kInvalidArgument) otherwise.
const Post& validate_post(const Post& post, bool require_geo, bool require_time);

using EmbeddingView = std::span<const float>;

// Dense row-major matrix of 32-bit embeddings sharing one dimension.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim);
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return rows_ == 0; }

  EmbeddingView row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<float> mutable_row(std::size_t i) {
    return {values_.data() + i * dim_, dim_};
  }

  void append(EmbeddingView v);
  EmbeddingMatrix select(std::span<const std::size_t> rows) const;

  const std::vector<float>& values() const noexcept { return values_; }

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

// Scales v to unit Euclidean norm in place. Throws kZeroVector for an
// all-zero (or non-finite) input.
void normalize(std::span<float> v);
std::vector<float> normalized(EmbeddingView v);
void normalize_rows(EmbeddingMatrix& m);
double l2_norm(EmbeddingView v);

enum class ScoringMode { kText, kTextSpatial, kTextTemporalSpatial };

std::string_view to_string(ScoringMode mode);
ScoringMode parse_scoring_mode(std::string_view name);

struct MatchParams {
  double delta_time_days = 30.0;
  double delta_distance_km = 10.0;
  std::size_t k = 100;
  std::size_t top_n = 3;
  ScoringMode mode = ScoringMode::kTextTemporalSpatial;
  double ts_alpha = 0.5;
  double earth_radius_km = kDefaultEarthRadiusKm;
  bool filter_resource = false;

  // Throws kInvalidArgument / kNonPositiveDelta on a violated invariant.
  void validate() const;
};

}  // namespace reliefmatch
