#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "reliefmatch/index.hpp"

namespace reliefmatch::detail {

inline double dot(const float* a, const float* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += static_cast<double>(a[i]) * b[i];
    s1 += static_cast<double>(a[i + 1]) * b[i + 1];
    s2 += static_cast<double>(a[i + 2]) * b[i + 2];
    s3 += static_cast<double>(a[i + 3]) * b[i + 3];
  }
  for (; i < n; ++i) s0 += static_cast<double>(a[i]) * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline double l2_squared(const float* a, const float* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const double d0 = static_cast<double>(a[i]) - b[i];
    const double d1 = static_cast<double>(a[i + 1]) - b[i + 1];
    s0 += d0 * d0;
    s1 += d1 * d1;
  }
  for (; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s0 += d * d;
  }
  return s0 + s1;
}

// Ranking order used by every backend: higher similarity first, then lower row.
inline bool better_hit(const SearchHit& a, const SearchHit& b) {
  return a.similarity > b.similarity || (a.similarity == b.similarity && a.row < b.row);
}

// Bounded collector of the k best hits.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  void push(std::uint32_t row, double similarity) {
    const SearchHit hit{row, similarity};
    if (heap_.size() < k_) {
      heap_.push_back(hit);
      std::push_heap(heap_.begin(), heap_.end(), better_hit);
    } else if (better_hit(hit, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), better_hit);
      heap_.back() = hit;
      std::push_heap(heap_.begin(), heap_.end(), better_hit);
    }
  }

  std::vector<SearchHit> take() {
    std::sort_heap(heap_.begin(), heap_.end(), better_hit);
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<SearchHit> heap_;  // front is the worst retained hit
};

// Row order of `count` centroids by squared L2 distance to `query`, nearest
// first, ties by index.
inline std::vector<std::uint32_t> nearest_centroids(const float* query, const float* centroids,
                                                    std::size_t count, std::size_t dim,
                                                    std::size_t want) {
  std::vector<std::pair<double, std::uint32_t>> d(count);
  for (std::size_t c = 0; c < count; ++c) {
    d[c] = {l2_squared(query, centroids + c * dim, dim), static_cast<std::uint32_t>(c)};
  }
  want = std::min(want, count);
  std::partial_sort(d.begin(), d.begin() + static_cast<long>(want), d.end());
  std::vector<std::uint32_t> out(want);
  for (std::size_t i = 0; i < want; ++i) out[i] = d[i].second;
  return out;
}

}  // namespace reliefmatch::detail
