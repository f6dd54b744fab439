#include "kmeans.hpp"

#include <algorithm>
#include <limits>

#include "kernels.hpp"

namespace reliefmatch::detail {

std::uint32_t nearest_centroid(const float* point, const float* centroids, std::size_t k,
                               std::size_t dim) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = l2_squared(point, centroids + c * dim, dim);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

namespace {

// k-means++ seeding. Returns false if the data ran out of distinct points.
bool seed_plus_plus(const float* data, std::size_t n, std::size_t dim, std::size_t k,
                    std::mt19937_64& rng, std::vector<float>& centroids) {
  centroids.assign(k * dim, 0.0f);
  std::vector<double> closest(n, std::numeric_limits<double>::infinity());

  auto place = [&](std::size_t c, std::size_t row) {
    std::copy(data + row * dim, data + (row + 1) * dim, centroids.begin() + c * dim);
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], l2_squared(data + i * dim, data + row * dim, dim));
    }
  };

  place(0, uniform_index(rng, n));
  bool degenerate = false;
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : closest) total += d;
    std::size_t chosen = n - 1;
    if (total <= 0.0) {
      degenerate = true;
      chosen = uniform_index(rng, n);
    } else {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (closest[i] <= 0.0) continue;
        chosen = i;
        acc += closest[i];
        if (acc > target) break;
      }
    }
    place(c, chosen);
  }
  return !degenerate;
}

}  // namespace

KMeansResult kmeans(const float* data, std::size_t n, std::size_t dim, std::size_t k,
                    std::size_t iterations, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  KMeansResult out;
  out.degenerate = !seed_plus_plus(data, n, dim, k, rng, out.centroids);
  out.assignment.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    out.assignment[i] = nearest_centroid(data + i * dim, out.centroids.data(), k, dim);
  }

  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = out.assignment[i];
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += data[i * dim + d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        out.centroids[c * dim + d] = static_cast<float>(sums[c * dim + d] / counts[c]);
      }
    }
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = nearest_centroid(data + i * dim, out.centroids.data(), k, dim);
      changed |= c != out.assignment[i];
      out.assignment[i] = c;
    }
    out.iterations_run = it + 1;
    if (!changed) break;
  }
  return out;
}

}  // namespace reliefmatch::detail
