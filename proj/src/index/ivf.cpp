#include <algorithm>

#include "backends.hpp"
#include "binary_io.hpp"
#include "kernels.hpp"
#include "kmeans.hpp"

namespace reliefmatch::detail {

std::vector<std::size_t> InvertedLists::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(rows.size());
  for (const auto& list : rows) out.push_back(list.size());
  return out;
}

void InvertedLists::write(std::ostream& out, std::size_t /*dim*/) const {
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(partitions));
  binary::write_f32_array(out, centroids);
  for (const auto& list : rows) {
    binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(list.size()));
    for (auto r : list) binary::write_le<std::uint32_t>(out, r);
  }
}

InvertedLists InvertedLists::read(std::istream& in, std::size_t dim) {
  InvertedLists lists;
  lists.partitions = binary::read_le<std::uint32_t>(in);
  if (lists.partitions == 0 || lists.partitions > (1u << 24)) {
    throw Error(ErrorCode::kFormat, "implausible partition count");
  }
  lists.centroids.resize(lists.partitions * dim);
  binary::read_f32_array(in, lists.centroids);
  lists.rows.resize(lists.partitions);
  for (auto& list : lists.rows) {
    const auto n = binary::read_le<std::uint32_t>(in);
    list.resize(n);
    for (auto& r : list) r = binary::read_le<std::uint32_t>(in);
  }
  return lists;
}

InvertedLists train_inverted_lists(const EmbeddingMatrix& data, const IndexConfig& config,
                                   BuildStats& stats) {
  const std::size_t n = data.rows();
  const std::size_t dim = data.dim();
  const std::size_t k = config.ivf_partitions;
  auto km = kmeans(data.values().data(), n, dim, k, config.kmeans_iters, config.seed);
  if (km.degenerate) {
    stats.warnings.push_back("DegenerateKMeans: fewer distinct points than " +
                             std::to_string(k) + " partitions; duplicated points as centroids");
  }
  InvertedLists lists;
  lists.partitions = k;
  lists.centroids = std::move(km.centroids);
  lists.rows.resize(k);
  for (std::size_t i = 0; i < n; ++i) {
    lists.rows[km.assignment[i]].push_back(static_cast<std::uint32_t>(i));
  }
  return lists;
}

IvfIndex::IvfIndex(IndexConfig config, std::size_t dim, std::size_t count, InvertedLists lists,
                   const EmbeddingMatrix& data)
    : VectorIndex(config), dim_(dim), count_(count), lists_(std::move(lists)) {
  list_vectors_.resize(lists_.partitions);
  for (std::size_t p = 0; p < lists_.partitions; ++p) {
    auto& dst = list_vectors_[p];
    dst.reserve(lists_.rows[p].size() * dim_);
    for (auto r : lists_.rows[p]) {
      const auto row = data.row(r);
      dst.insert(dst.end(), row.begin(), row.end());
    }
  }
}

IvfIndex::IvfIndex(IndexConfig config, std::size_t dim, std::size_t count, InvertedLists lists,
                   std::vector<std::vector<float>> list_vectors)
    : VectorIndex(config),
      dim_(dim),
      count_(count),
      lists_(std::move(lists)),
      list_vectors_(std::move(list_vectors)) {}

IndexSummary IvfIndex::summary() const {
  IndexSummary s;
  s.posting_list_sizes = lists_.sizes();
  return s;
}

std::vector<SearchHit> IvfIndex::search(EmbeddingView query, std::size_t k,
                                        const SearchOptions& options) const {
  check_query(*this, query, k);
  const std::size_t nprobe = options.nprobe.value_or(config().ivf_nprobe);
  const auto probes =
      nearest_centroids(query.data(), lists_.centroids.data(), lists_.partitions, dim_, nprobe);
  TopK top(k);
  for (auto p : probes) {
    const auto& rows = lists_.rows[p];
    const float* base = list_vectors_[p].data();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      top.push(rows[i], dot(query.data(), base + i * dim_, dim_));
    }
  }
  return top.take();
}

void IvfIndex::write_payload(std::ostream& out) const {
  lists_.write(out, dim_);
  for (const auto& vectors : list_vectors_) binary::write_f32_array(out, vectors);
}

std::unique_ptr<VectorIndex> IvfIndex::read_payload(std::istream& in, IndexConfig config,
                                                    std::size_t count, std::size_t dim) {
  auto lists = InvertedLists::read(in, dim);
  std::size_t total = 0;
  std::vector<std::vector<float>> vectors(lists.partitions);
  for (std::size_t p = 0; p < lists.partitions; ++p) {
    total += lists.rows[p].size();
    for (auto r : lists.rows[p]) {
      if (r >= count) throw Error(ErrorCode::kFormat, "posting list row out of range");
    }
    vectors[p].resize(lists.rows[p].size() * dim);
    binary::read_f32_array(in, vectors[p]);
  }
  if (total != count) throw Error(ErrorCode::kFormat, "posting lists do not cover the corpus");
  return std::unique_ptr<VectorIndex>(
      new IvfIndex(config, dim, count, std::move(lists), std::move(vectors)));
}

}  // namespace reliefmatch::detail
