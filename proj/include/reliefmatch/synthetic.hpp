#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "reliefmatch/core.hpp"
#include "reliefmatch/eval.hpp"

namespace reliefmatch {

struct CityCenter {
  std::string name;
  GeoPoint point;
};

// Sydney, Melbourne, Brisbane, Adelaide, Perth.
std::vector<CityCenter> default_centers();

// How a generated offer relates to the request of its pair.
enum class OfferClass {
  kTrue,        // inside both windows, the planted match
  kTemporalOut, // nearby, higher similarity, outside the time window
  kSpatialOut,  // same time, higher similarity, outside the distance window
  kHighCosFar,  // higher similarity, outside both windows
  kLowSimIn,    // inside both windows but less similar and no closer
};

std::string_view to_string(OfferClass c);
OfferClass parse_offer_class(std::string_view name);

struct GenSpec {
  std::size_t n_pairs = 100;
  std::vector<CityCenter> centers = default_centers();
  double time_window_days = 3.0;
  double distance_window_km = 10.0;
  std::size_t n_distractors_per_pair = 4;
  // Distractor i of a pair has class distractor_classes[i % size].
  std::vector<OfferClass> distractor_classes = {OfferClass::kTemporalOut, OfferClass::kSpatialOut,
                                                OfferClass::kHighCosFar, OfferClass::kLowSimIn};
  std::size_t embedding_dim = 128;
  std::uint64_t seed = 42;

  // Planted cosine is drawn from [true_cos_min, true_cos_max]; out-of-window
  // distractors add [boost_min, boost_max]; in-window distractors sit at
  // least `margin` below.
  double true_cos_min = 0.45;
  double true_cos_max = 0.65;
  double boost_min = 0.05;
  double boost_max = 0.25;
  double margin = 0.10;

  // Out-of-window placements and the isolation rule between pairs: every
  // offer of another pair is at least far_min_km away, or far_min_days
  // apart, or has non-positive cosine with the request.
  double far_min_km = 50.0;
  double far_max_km = 300.0;
  double far_min_days = 45.0;
  double far_max_days = 400.0;

  // Pairs sharing a topic direction; members are spread over the centers.
  std::size_t family_size = 10;
  std::int64_t base_time = 1577836800;  // 2020-01-01T00:00:00Z
  double time_span_days = 730.0;
  std::string country = "Australia";

  // Throws kInvalidArgument.
  void validate() const;
};

struct SyntheticCorpus {
  std::vector<Post> requests;
  std::vector<Post> offers;
  EmbeddingMatrix request_embeddings;
  EmbeddingMatrix offer_embeddings;
  std::vector<OfferClass> offer_classes;  // parallel to offers
  std::vector<std::string> offer_centers; // center name of the owning pair
  GroundTruth truth;

  // Requests then offers, aligned with embeddings().
  std::vector<std::string> ids() const;
  EmbeddingMatrix embeddings() const;
};

// Deterministic for a given spec. Throws kInvalidArgument when the isolation
// rule cannot be met (e.g. too many pairs for the time span).
SyntheticCorpus generate_synthetic(const GenSpec& spec);

}  // namespace reliefmatch
