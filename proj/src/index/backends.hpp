#pragma once

#include <compare>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <random>
#include <vector>

#include "reliefmatch/index.hpp"

namespace reliefmatch::detail {

void check_query(const VectorIndex& index, EmbeddingView query, std::size_t k);

class ExhaustiveIndex final : public VectorIndex {
 public:
  ExhaustiveIndex(IndexConfig config, EmbeddingMatrix vectors);

  IndexBackend backend() const noexcept override { return IndexBackend::kExhaustive; }
  std::size_t size() const noexcept override { return vectors_.rows(); }
  std::size_t dim() const noexcept override { return vectors_.dim(); }
  IndexSummary summary() const override { return {}; }
  std::vector<SearchHit> search(EmbeddingView query, std::size_t k,
                                const SearchOptions& options) const override;
  void write_payload(std::ostream& out) const override;
  static std::unique_ptr<VectorIndex> read_payload(std::istream& in, IndexConfig config,
                                                   std::size_t count, std::size_t dim);

 private:
  EmbeddingMatrix vectors_;
};

// Coarse quantizer shared by IVF and IVF+PQ: centroids plus posting lists of
// original row ids.
struct InvertedLists {
  std::size_t partitions = 0;
  std::vector<float> centroids;                     // partitions x dim
  std::vector<std::vector<std::uint32_t>> rows;     // per partition

  std::vector<std::size_t> sizes() const;
  void write(std::ostream& out, std::size_t dim) const;
  static InvertedLists read(std::istream& in, std::size_t dim);
};

InvertedLists train_inverted_lists(const EmbeddingMatrix& data, const IndexConfig& config,
                                   BuildStats& stats);

class IvfIndex final : public VectorIndex {
 public:
  IvfIndex(IndexConfig config, std::size_t dim, std::size_t count, InvertedLists lists,
           const EmbeddingMatrix& data);

  IndexBackend backend() const noexcept override { return IndexBackend::kIvf; }
  std::size_t size() const noexcept override { return count_; }
  std::size_t dim() const noexcept override { return dim_; }
  IndexSummary summary() const override;
  std::vector<SearchHit> search(EmbeddingView query, std::size_t k,
                                const SearchOptions& options) const override;
  void write_payload(std::ostream& out) const override;
  static std::unique_ptr<VectorIndex> read_payload(std::istream& in, IndexConfig config,
                                                   std::size_t count, std::size_t dim);

 private:
  IvfIndex(IndexConfig config, std::size_t dim, std::size_t count, InvertedLists lists,
           std::vector<std::vector<float>> list_vectors);

  std::size_t dim_;
  std::size_t count_;
  InvertedLists lists_;
  std::vector<std::vector<float>> list_vectors_;  // vectors stored in posting-list order
};

// Product quantizer over raw vectors: m subspaces of dim/m, 2^bits centroids
// each, one code byte per subspace.
struct ProductQuantizer {
  std::size_t m = 0;
  std::size_t ksub = 0;
  std::size_t dsub = 0;
  std::vector<float> codebooks;  // m x ksub x dsub

  static ProductQuantizer train(const EmbeddingMatrix& data, const IndexConfig& config,
                                BuildStats& stats);
  void encode(EmbeddingView v, std::uint8_t* code) const;
  // Per-query table: entry [j * ksub + c] = <query_j, codeword_{j,c}>.
  std::vector<float> lookup_table(EmbeddingView query) const;
  void write(std::ostream& out) const;
  static ProductQuantizer read(std::istream& in);
};

class IvfPqIndex final : public VectorIndex {
 public:
  IvfPqIndex(IndexConfig config, std::size_t dim, std::size_t count, InvertedLists lists,
             ProductQuantizer pq, const EmbeddingMatrix& data);

  IndexBackend backend() const noexcept override { return IndexBackend::kIvfPq; }
  std::size_t size() const noexcept override { return count_; }
  std::size_t dim() const noexcept override { return dim_; }
  IndexSummary summary() const override;
  std::vector<SearchHit> search(EmbeddingView query, std::size_t k,
                                const SearchOptions& options) const override;
  void write_payload(std::ostream& out) const override;
  static std::unique_ptr<VectorIndex> read_payload(std::istream& in, IndexConfig config,
                                                   std::size_t count, std::size_t dim);

 private:
  IvfPqIndex(IndexConfig config, std::size_t dim, std::size_t count, InvertedLists lists,
             ProductQuantizer pq, std::vector<std::vector<std::uint8_t>> codes);

  std::size_t dim_;
  std::size_t count_;
  InvertedLists lists_;
  ProductQuantizer pq_;
  std::vector<std::vector<std::uint8_t>> codes_;  // per list, size x m
};

class HnswIndex final : public VectorIndex {
 public:
  HnswIndex(IndexConfig config, EmbeddingMatrix vectors);

  IndexBackend backend() const noexcept override { return IndexBackend::kHnsw; }
  std::size_t size() const noexcept override { return vectors_.rows(); }
  std::size_t dim() const noexcept override { return vectors_.dim(); }
  IndexSummary summary() const override;
  std::vector<SearchHit> search(EmbeddingView query, std::size_t k,
                                const SearchOptions& options) const override;
  void write_payload(std::ostream& out) const override;
  static std::unique_ptr<VectorIndex> read_payload(std::istream& in, IndexConfig config,
                                                   std::size_t count, std::size_t dim);

 private:
  struct Candidate {
    double distance;
    std::uint32_t node;
    friend auto operator<=>(const Candidate&, const Candidate&) = default;
  };

  HnswIndex(IndexConfig config, EmbeddingMatrix vectors, bool);

  double distance(const float* query, std::uint32_t node) const;
  std::size_t max_degree(int level) const;
  void insert(std::uint32_t node, int level);
  // Beam search restricted to one layer; result sorted nearest first.
  std::vector<Candidate> search_layer(const float* query, const std::vector<Candidate>& entry,
                                      std::size_t ef, int level) const;
  std::uint32_t greedy_descend(const float* query, std::uint32_t entry, int from_level,
                               int to_level) const;
  std::vector<std::uint32_t> select_neighbors(const std::vector<Candidate>& sorted,
                                              std::size_t max_count) const;
  void shrink(std::uint32_t node, int level);

  EmbeddingMatrix vectors_;
  // links_[node][level] -> neighbor ids
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;
  std::uint32_t entry_point_ = 0;
  int max_level_ = -1;
};

}  // namespace reliefmatch::detail
