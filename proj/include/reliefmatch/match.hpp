#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reliefmatch/core.hpp"
#include "reliefmatch/index.hpp"
#include "reliefmatch/io.hpp"
#include "reliefmatch/scoring.hpp"

namespace reliefmatch {

struct Match {
  std::string offer_id;
  std::size_t rank = 0;  // 1-based
  ScoreBreakdown breakdown;
};

struct MatchResult {
  std::string request_id;
  std::vector<Match> matches;
};

// Offer posts, their unit embeddings, and the index built over them.
// Immutable once constructed; shared by concurrent match_one calls.
class OfferCorpus {
 public:
  // With per_resource set, one extra index is built for each resource
  // category present, enabling MatchParams::filter_resource.
  OfferCorpus(std::vector<Post> offers, EmbeddingMatrix embeddings, const IndexConfig& config,
              bool per_resource = false);
  // Uses an index built earlier over exactly these embeddings, row for row.
  // Throws kCorpusMismatch when its size or dim differ.
  OfferCorpus(std::vector<Post> offers, EmbeddingMatrix embeddings,
              std::unique_ptr<VectorIndex> prebuilt, bool per_resource = false);

  std::size_t size() const noexcept { return offers_.size(); }
  bool empty() const noexcept { return offers_.empty(); }
  const std::vector<Post>& offers() const noexcept { return offers_; }
  const EmbeddingMatrix& embeddings() const noexcept { return embeddings_; }
  const IndexConfig& index_config() const noexcept { return config_; }
  const BuildStats& build_stats() const noexcept { return stats_; }
  bool has_resource_indices() const noexcept { return per_resource_; }

  struct Retrieval {
    std::vector<std::size_t> rows;  // offer rows, retrieval order
    double search_time_ms = 0.0;
  };
  // K nearest offers by textual similarity, optionally limited to one
  // resource category.
  Retrieval retrieve(EmbeddingView query, std::size_t k,
                     std::optional<Resource> resource = std::nullopt) const;

 private:
  void check_sizes() const;
  void build_resource_indices();

  struct Partition {
    std::unique_ptr<VectorIndex> index;
    std::vector<std::size_t> rows;  // index row -> offer row
  };

  std::vector<Post> offers_;
  EmbeddingMatrix embeddings_;
  IndexConfig config_;
  BuildStats stats_;
  bool per_resource_ = false;
  std::unique_ptr<VectorIndex> index_;
  std::map<Resource, Partition> by_resource_;
};

// Retrieves params.k candidates, scores them under params.mode, drops
// s_overall <= 0 in TTS mode, orders by (s_overall desc, offer_id asc) and
// keeps the first params.top_n.
// Throws kEmptyOfferCorpus, kMissingGeo, kMissingTime, kDimensionMismatch.
MatchResult match_one(const Post& request, EmbeddingView request_embedding,
                      const OfferCorpus& offers, const MatchParams& params);

struct SearchTimeSummary {
  std::size_t count = 0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  double mean_ms = 0.0;
};

struct RunReport {
  MatchParams params;
  IndexConfig index_config;
  BuildStats build;
  SearchTimeSummary search;
  std::size_t requests = 0;
  std::size_t offers = 0;
  std::size_t requests_with_matches = 0;
  std::size_t total_matches = 0;
  std::size_t workers = 1;
};

struct MatchRun {
  std::vector<MatchResult> results;  // request input order
  RunReport report;
};

// Matches every request against a prepared corpus on up to `workers`
// threads. Results keep the request order.
MatchRun match_all(const std::vector<Post>& requests, const EmbeddingMatrix& request_embeddings,
                   const OfferCorpus& offers, const MatchParams& params, std::size_t workers = 1);

// Request and offer ids must be disjoint (kInvalidArgument) and every post
// must have a row in `store` (kEmbeddingMissing listing all missing ids).
void validate_corpora(const std::vector<Post>& requests, const std::vector<Post>& offers,
                      const EmbeddingStore& store);

// Joins both corpora against `store` by id, builds the offer index and runs
// match_all. Throws kEmbeddingMissing listing every id without a row, and
// kInvalidArgument when a request id also names an offer.
MatchRun match_all(const std::vector<Post>& requests, const std::vector<Post>& offers,
                   const EmbeddingStore& store, const MatchParams& params,
                   const IndexConfig& index_config, std::size_t workers = 1);

// {"request_id", "matches":[{"offer_id","rank","s_overall","s_text","w_time",
//  "w_location","distance_km","delta_t_days"}]}; absent fields are null.
std::string result_to_json_line(const MatchResult& result);
MatchResult result_from_json_line(std::string_view line);
std::vector<MatchResult> read_results(const std::filesystem::path& path);
void write_results(const std::filesystem::path& path, const std::vector<MatchResult>& results);

std::string report_to_json(const RunReport& report);

}  // namespace reliefmatch
