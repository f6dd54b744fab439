#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reliefmatch/core.hpp"

namespace reliefmatch {

inline constexpr std::string_view kIndexMagic = "CREMAIDX";
inline constexpr std::uint32_t kIndexVersion = 1;

enum class IndexBackend : std::uint8_t { kExhaustive = 0, kIvf = 1, kIvfPq = 2, kHnsw = 3 };

std::string_view to_string(IndexBackend backend);
IndexBackend parse_index_backend(std::string_view name);

struct IndexConfig {
  IndexBackend backend = IndexBackend::kExhaustive;
  std::uint32_t ivf_partitions = 3;
  std::uint32_t ivf_nprobe = 2;
  std::uint32_t pq_m = 8;
  std::uint32_t pq_bits = 4;
  std::uint32_t hnsw_m = 16;
  std::uint32_t hnsw_ef_construction = 200;
  std::uint32_t hnsw_ef_search = 64;
  std::uint32_t kmeans_iters = 25;
  std::uint64_t seed = 42;

  // Checks the invariants that do not depend on the data; dim-dependent ones
  // are checked by build_index.
  void validate() const;

  // Short human-readable form, e.g. "ivfpq(part=3,np=2,m=8,bits=4)".
  std::string describe() const;
};

struct SearchHit {
  std::uint32_t row = 0;
  double similarity = 0.0;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

// Per-call overrides; unset fields fall back to the build config.
struct SearchOptions {
  std::optional<std::uint32_t> nprobe;
  std::optional<std::uint32_t> ef_search;
};

struct BuildStats {
  double index_time_ms = 0.0;
  std::vector<std::string> warnings;
};

struct SearchStats {
  double search_time_ms = 0.0;
};

// Structural facts about a built index, for diagnostics and tests.
struct IndexSummary {
  std::vector<std::size_t> posting_list_sizes;   // IVF, IVFPQ
  std::size_t code_bytes_per_vector = 0;         // IVFPQ
  std::size_t codebook_size = 0;                 // IVFPQ, centroids per subspace
  std::size_t subquantizers = 0;                 // IVFPQ
  int hnsw_max_level = -1;                       // HNSW
  std::vector<std::size_t> hnsw_nodes_per_level; // HNSW
  std::vector<std::size_t> hnsw_max_degree;      // HNSW, per level
  bool hnsw_levels_nested = true;                // HNSW
};

// Immutable after build; search is safe to call concurrently.
class VectorIndex {
 public:
  virtual ~VectorIndex() = default;

  virtual IndexBackend backend() const noexcept = 0;
  virtual std::size_t size() const noexcept = 0;
  virtual std::size_t dim() const noexcept = 0;
  virtual IndexSummary summary() const = 0;

  // Top-k rows by inner product (cosine on unit rows), best first, ties by
  // ascending row. May return fewer than k hits when the probed set is small.
  // Throws kDimensionMismatch, kInvalidArgument for k == 0.
  virtual std::vector<SearchHit> search(EmbeddingView query, std::size_t k,
                                        const SearchOptions& options = {}) const = 0;

  const IndexConfig& config() const noexcept { return config_; }

  // Backend-specific part of the persisted file.
  virtual void write_payload(std::ostream& out) const = 0;

 protected:
  explicit VectorIndex(IndexConfig config) : config_(config) {}

 private:
  IndexConfig config_;
};

struct BuiltIndex {
  std::unique_ptr<VectorIndex> index;
  BuildStats stats;
};

// Throws kTooFewVectors, kDimNotDivisible, kInvalidArgument.
BuiltIndex build_index(const EmbeddingMatrix& embeddings, const IndexConfig& config);

struct TimedSearch {
  std::vector<SearchHit> hits;
  SearchStats stats;
};
TimedSearch timed_search(const VectorIndex& index, EmbeddingView query, std::size_t k,
                         const SearchOptions& options = {});

// Mean over queries of |approx top-k ∩ exact top-k| / |exact top-k|.
// Throws kCorpusMismatch when the two indices disagree on size or dim.
double recall_at_k(const VectorIndex& index, const VectorIndex& oracle,
                   const EmbeddingMatrix& queries, std::size_t k,
                   const SearchOptions& options = {});

void save_index(std::ostream& out, const VectorIndex& index);
void save_index(const std::filesystem::path& path, const VectorIndex& index);
std::unique_ptr<VectorIndex> load_index(std::istream& in);
std::unique_ptr<VectorIndex> load_index(const std::filesystem::path& path);

}  // namespace reliefmatch
