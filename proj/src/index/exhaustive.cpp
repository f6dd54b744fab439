#include "backends.hpp"
#include "binary_io.hpp"
#include "kernels.hpp"

namespace reliefmatch::detail {

ExhaustiveIndex::ExhaustiveIndex(IndexConfig config, EmbeddingMatrix vectors)
    : VectorIndex(config), vectors_(std::move(vectors)) {}

std::vector<SearchHit> ExhaustiveIndex::search(EmbeddingView query, std::size_t k,
                                               const SearchOptions&) const {
  check_query(*this, query, k);
  TopK top(k);
  const std::size_t d = dim();
  const float* base = vectors_.values().data();
  for (std::size_t i = 0; i < size(); ++i) {
    top.push(static_cast<std::uint32_t>(i), dot(query.data(), base + i * d, d));
  }
  return top.take();
}

void ExhaustiveIndex::write_payload(std::ostream& out) const {
  binary::write_f32_array(out, vectors_.values());
}

std::unique_ptr<VectorIndex> ExhaustiveIndex::read_payload(std::istream& in, IndexConfig config,
                                                           std::size_t count, std::size_t dim) {
  std::vector<float> values(count * dim);
  binary::read_f32_array(in, values);
  return std::make_unique<ExhaustiveIndex>(config, EmbeddingMatrix(count, dim, std::move(values)));
}

}  // namespace reliefmatch::detail
