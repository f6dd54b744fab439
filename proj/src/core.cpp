#include "reliefmatch/core.hpp"

#include <cmath>
#include <string>

#include "reliefmatch/error.hpp"

namespace reliefmatch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidUtf8: return "InvalidUtf8";
    case ErrorCode::kMissingGeo: return "MissingGeo";
    case ErrorCode::kMissingTime: return "MissingTime";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonPositiveDelta: return "NonPositiveDelta";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kUnknownPlugin: return "UnknownPlugin";
    case ErrorCode::kPluginFailure: return "PluginFailure";
    case ErrorCode::kTooFewVectors: return "TooFewVectors";
    case ErrorCode::kDimNotDivisible: return "DimNotDivisible";
    case ErrorCode::kCorpusMismatch: return "CorpusMismatch";
    case ErrorCode::kEmptyOfferCorpus: return "EmptyOfferCorpus";
    case ErrorCode::kEmbeddingMissing: return "EmbeddingMissing";
    case ErrorCode::kUnknownRequestId: return "UnknownRequestId";
    case ErrorCode::kMissingGroupKey: return "MissingGroupKey";
    case ErrorCode::kFormat: return "Format";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
    throw Error(ErrorCode::kInvalidRange,
                "coordinate (" + std::to_string(lat) + ", " + std::to_string(lon) +
                    ") outside [-90,90]x[-180,180]");
  }
}

std::string_view to_string(PostKind kind) {
  switch (kind) {
    case PostKind::kUnlabeled: return "unlabeled";
    case PostKind::kPotentialCandidate: return "potential";
    case PostKind::kRequest: return "request";
    case PostKind::kOffer: return "offer";
    case PostKind::kOther: return "other";
  }
  return "unlabeled";
}

PostKind parse_post_kind(std::string_view name) {
  for (auto kind : {PostKind::kUnlabeled, PostKind::kPotentialCandidate, PostKind::kRequest,
                    PostKind::kOffer, PostKind::kOther}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::kFormat, "unknown post kind '" + std::string(name) + "'");
}

std::string_view to_string(Resource resource) {
  switch (resource) {
    case Resource::kMoney: return "money";
    case Resource::kVolunteer: return "volunteer";
    case Resource::kCloth: return "cloth";
    case Resource::kShelter: return "shelter";
    case Resource::kMedical: return "medical";
    case Resource::kFood: return "food";
  }
  return "money";
}

Resource parse_resource(std::string_view name) {
  for (auto r : kAllResources) {
    if (name == to_string(r)) return r;
  }
  throw Error(ErrorCode::kFormat, "unknown resource '" + std::string(name) + "'");
}

const Post& validate_post(const Post& post, bool require_geo, bool require_time) {
  if (post.id.empty()) throw Error(ErrorCode::kInvalidArgument, "post id is empty");
  if (post.text.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "post '" + post.id + "' has empty text");
  }
  if (post.resource && post.kind != PostKind::kRequest && post.kind != PostKind::kOffer) {
    throw Error(ErrorCode::kInvalidArgument,
                "post '" + post.id + "' carries a resource but is not a request or offer");
  }
  if (require_geo && !post.geo) {
    throw Error(ErrorCode::kMissingGeo, "post '" + post.id + "' has no geo-coordinates");
  }
  if (require_time && !post.has_time()) {
    throw Error(ErrorCode::kMissingTime, "post '" + post.id + "' has no timestamp");
  }
  return post;
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), values_(rows * dim, 0.0f) {}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> values)
    : rows_(rows), dim_(dim), values_(std::move(values)) {
  if (values_.size() != rows * dim) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix payload size does not equal rows*dim");
  }
}

void EmbeddingMatrix::append(EmbeddingView v) {
  if (rows_ == 0 && dim_ == 0) dim_ = v.size();
  if (v.size() != dim_ || dim_ == 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "appending dim " + std::to_string(v.size()) + " to matrix of dim " +
                    std::to_string(dim_));
  }
  values_.insert(values_.end(), v.begin(), v.end());
  ++rows_;
}

EmbeddingMatrix EmbeddingMatrix::select(std::span<const std::size_t> rows) const {
  EmbeddingMatrix out(rows.size(), dim_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = row(rows[i]);
    std::copy(src.begin(), src.end(), out.mutable_row(i).begin());
  }
  return out;
}

double l2_norm(EmbeddingView v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

void normalize(std::span<float> v) {
  const double norm = l2_norm(v);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kZeroVector, "cannot normalize a zero or non-finite vector");
  }
  for (float& x : v) x = static_cast<float>(x / norm);
}

std::vector<float> normalized(EmbeddingView v) {
  std::vector<float> out(v.begin(), v.end());
  normalize(out);
  return out;
}

void normalize_rows(EmbeddingMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) normalize(m.mutable_row(i));
}

std::string_view to_string(ScoringMode mode) {
  switch (mode) {
    case ScoringMode::kText: return "t";
    case ScoringMode::kTextSpatial: return "ts";
    case ScoringMode::kTextTemporalSpatial: return "tts";
  }
  return "tts";
}

ScoringMode parse_scoring_mode(std::string_view name) {
  if (name == "t" || name == "T") return ScoringMode::kText;
  if (name == "ts" || name == "TS") return ScoringMode::kTextSpatial;
  if (name == "tts" || name == "TTS") return ScoringMode::kTextTemporalSpatial;
  throw Error(ErrorCode::kInvalidArgument, "unknown scoring mode '" + std::string(name) + "'");
}

void MatchParams::validate() const {
  if (!(delta_time_days > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDelta, "delta_time must be positive");
  }
  if (!(delta_distance_km > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDelta, "delta_distance must be positive");
  }
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (top_n == 0 || top_n > k) {
    throw Error(ErrorCode::kInvalidArgument, "top_n must be in [1, k]");
  }
  if (!(ts_alpha >= 0.0 && ts_alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ts_alpha must be in [0, 1]");
  }
  if (!(earth_radius_km > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "earth radius must be positive");
  }
}

}  // namespace reliefmatch
