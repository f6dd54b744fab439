#include <algorithm>

#include "backends.hpp"
#include "binary_io.hpp"
#include "kernels.hpp"
#include "kmeans.hpp"

namespace reliefmatch::detail {

ProductQuantizer ProductQuantizer::train(const EmbeddingMatrix& data, const IndexConfig& config,
                                         BuildStats& stats) {
  ProductQuantizer pq;
  pq.m = config.pq_m;
  pq.ksub = std::size_t{1} << config.pq_bits;
  pq.dsub = data.dim() / pq.m;
  pq.codebooks.resize(pq.m * pq.ksub * pq.dsub);

  const std::size_t n = data.rows();
  std::vector<float> sub(n * pq.dsub);
  bool degenerate = false;
  for (std::size_t j = 0; j < pq.m; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = data.row(i);
      std::copy_n(row.begin() + static_cast<long>(j * pq.dsub), pq.dsub,
                  sub.begin() + static_cast<long>(i * pq.dsub));
    }
    auto km = kmeans(sub.data(), n, pq.dsub, pq.ksub, config.kmeans_iters, config.seed + 1 + j);
    degenerate |= km.degenerate;
    std::copy(km.centroids.begin(), km.centroids.end(),
              pq.codebooks.begin() + static_cast<long>(j * pq.ksub * pq.dsub));
  }
  if (degenerate) {
    stats.warnings.push_back("DegenerateKMeans: fewer distinct sub-vectors than " +
                             std::to_string(pq.ksub) + " codewords; duplicated points as codewords");
  }
  return pq;
}

void ProductQuantizer::encode(EmbeddingView v, std::uint8_t* code) const {
  for (std::size_t j = 0; j < m; ++j) {
    code[j] = static_cast<std::uint8_t>(nearest_centroid(
        v.data() + j * dsub, codebooks.data() + j * ksub * dsub, ksub, dsub));
  }
}

std::vector<float> ProductQuantizer::lookup_table(EmbeddingView query) const {
  std::vector<float> table(m * ksub);
  for (std::size_t j = 0; j < m; ++j) {
    const float* q = query.data() + j * dsub;
    const float* book = codebooks.data() + j * ksub * dsub;
    for (std::size_t c = 0; c < ksub; ++c) {
      table[j * ksub + c] = static_cast<float>(dot(q, book + c * dsub, dsub));
    }
  }
  return table;
}

void ProductQuantizer::write(std::ostream& out) const {
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m));
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ksub));
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dsub));
  binary::write_f32_array(out, codebooks);
}

ProductQuantizer ProductQuantizer::read(std::istream& in) {
  ProductQuantizer pq;
  pq.m = binary::read_le<std::uint32_t>(in);
  pq.ksub = binary::read_le<std::uint32_t>(in);
  pq.dsub = binary::read_le<std::uint32_t>(in);
  if (pq.m == 0 || pq.ksub == 0 || pq.ksub > 256 || pq.dsub == 0) {
    throw Error(ErrorCode::kFormat, "implausible product quantizer layout");
  }
  pq.codebooks.resize(pq.m * pq.ksub * pq.dsub);
  binary::read_f32_array(in, pq.codebooks);
  return pq;
}

IvfPqIndex::IvfPqIndex(IndexConfig config, std::size_t dim, std::size_t count, InvertedLists lists,
                       ProductQuantizer pq, const EmbeddingMatrix& data)
    : VectorIndex(config),
      dim_(dim),
      count_(count),
      lists_(std::move(lists)),
      pq_(std::move(pq)) {
  codes_.resize(lists_.partitions);
  for (std::size_t p = 0; p < lists_.partitions; ++p) {
    auto& dst = codes_[p];
    dst.resize(lists_.rows[p].size() * pq_.m);
    for (std::size_t i = 0; i < lists_.rows[p].size(); ++i) {
      pq_.encode(data.row(lists_.rows[p][i]), dst.data() + i * pq_.m);
    }
  }
}

IvfPqIndex::IvfPqIndex(IndexConfig config, std::size_t dim, std::size_t count, InvertedLists lists,
                       ProductQuantizer pq, std::vector<std::vector<std::uint8_t>> codes)
    : VectorIndex(config),
      dim_(dim),
      count_(count),
      lists_(std::move(lists)),
      pq_(std::move(pq)),
      codes_(std::move(codes)) {}

IndexSummary IvfPqIndex::summary() const {
  IndexSummary s;
  s.posting_list_sizes = lists_.sizes();
  s.code_bytes_per_vector = pq_.m;
  s.codebook_size = pq_.ksub;
  s.subquantizers = pq_.m;
  return s;
}

std::vector<SearchHit> IvfPqIndex::search(EmbeddingView query, std::size_t k,
                                          const SearchOptions& options) const {
  check_query(*this, query, k);
  const std::size_t nprobe = options.nprobe.value_or(config().ivf_nprobe);
  const auto probes =
      nearest_centroids(query.data(), lists_.centroids.data(), lists_.partitions, dim_, nprobe);
  const auto table = pq_.lookup_table(query);
  const std::size_t m = pq_.m;
  const std::size_t ksub = pq_.ksub;
  TopK top(k);
  for (auto p : probes) {
    const auto& rows = lists_.rows[p];
    const std::uint8_t* code = codes_[p].data();
    for (std::size_t i = 0; i < rows.size(); ++i, code += m) {
      float s = 0.0f;
      for (std::size_t j = 0; j < m; ++j) s += table[j * ksub + code[j]];
      top.push(rows[i], s);
    }
  }
  return top.take();
}

void IvfPqIndex::write_payload(std::ostream& out) const {
  lists_.write(out, dim_);
  pq_.write(out);
  for (const auto& codes : codes_) {
    out.write(reinterpret_cast<const char*>(codes.data()),
              static_cast<std::streamsize>(codes.size()));
  }
}

std::unique_ptr<VectorIndex> IvfPqIndex::read_payload(std::istream& in, IndexConfig config,
                                                      std::size_t count, std::size_t dim) {
  auto lists = InvertedLists::read(in, dim);
  auto pq = ProductQuantizer::read(in);
  if (pq.m * pq.dsub != dim) throw Error(ErrorCode::kFormat, "quantizer does not span dim");
  std::size_t total = 0;
  std::vector<std::vector<std::uint8_t>> codes(lists.partitions);
  for (std::size_t p = 0; p < lists.partitions; ++p) {
    total += lists.rows[p].size();
    for (auto r : lists.rows[p]) {
      if (r >= count) throw Error(ErrorCode::kFormat, "posting list row out of range");
    }
    codes[p].resize(lists.rows[p].size() * pq.m);
    if (!in.read(reinterpret_cast<char*>(codes[p].data()),
                 static_cast<std::streamsize>(codes[p].size()))) {
      throw Error(ErrorCode::kFormat, "unexpected end of binary data");
    }
    for (auto c : codes[p]) {
      if (c >= pq.ksub) throw Error(ErrorCode::kFormat, "code outside codebook");
    }
  }
  if (total != count) throw Error(ErrorCode::kFormat, "posting lists do not cover the corpus");
  return std::unique_ptr<VectorIndex>(
      new IvfPqIndex(config, dim, count, std::move(lists), std::move(pq), std::move(codes)));
}

}  // namespace reliefmatch::detail
