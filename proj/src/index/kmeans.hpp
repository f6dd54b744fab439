#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace reliefmatch::detail {

// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
// unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

struct KMeansResult {
  std::vector<float> centroids;         // k x dim, row-major
  std::vector<std::uint32_t> assignment;  // per input row
  // True when the data held fewer distinct points than k; the surplus
  // centroids then duplicate existing points.
  bool degenerate = false;
  std::size_t iterations_run = 0;
};

// Lloyd's algorithm with k-means++ seeding, squared L2 distance, fixed seed.
// Empty clusters keep their previous centroid. Requires n >= 1 and k >= 1.
KMeansResult kmeans(const float* data, std::size_t n, std::size_t dim, std::size_t k,
                    std::size_t iterations, std::uint64_t seed);

// Index of the nearest centroid, ties to the lowest index.
std::uint32_t nearest_centroid(const float* point, const float* centroids, std::size_t k,
                               std::size_t dim);

}  // namespace reliefmatch::detail
