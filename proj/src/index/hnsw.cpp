#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

#include "backends.hpp"
#include "binary_io.hpp"
#include "kernels.hpp"
#include "kmeans.hpp"

namespace reliefmatch::detail {

namespace {

int draw_level(std::mt19937_64& rng, double ml) {
  const double u = 1.0 - uniform01(rng);  // (0, 1]
  return static_cast<int>(std::floor(-std::log(u) * ml));
}

// Per-thread visited marks; a node is visited when its mark equals the
// current epoch, so no clearing is needed between searches.
class VisitedSet {
 public:
  void reset(std::size_t n) {
    if (marks_.size() < n) marks_.resize(n, 0);
    if (++epoch_ == 0) {
      std::fill(marks_.begin(), marks_.end(), 0);
      epoch_ = 1;
    }
  }
  bool insert(std::uint32_t node) {
    if (marks_[node] == epoch_) return false;
    marks_[node] = epoch_;
    return true;
  }

 private:
  std::vector<std::uint32_t> marks_;
  std::uint32_t epoch_ = 0;
};

}  // namespace

HnswIndex::HnswIndex(IndexConfig config, EmbeddingMatrix vectors, bool)
    : VectorIndex(config), vectors_(std::move(vectors)) {}

HnswIndex::HnswIndex(IndexConfig config, EmbeddingMatrix vectors)
    : VectorIndex(config), vectors_(std::move(vectors)) {
  const std::size_t n = vectors_.rows();
  links_.resize(n);
  std::mt19937_64 rng(config.seed);
  const double ml = config.hnsw_m > 1 ? 1.0 / std::log(static_cast<double>(config.hnsw_m)) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    insert(static_cast<std::uint32_t>(i), draw_level(rng, ml));
  }
}

double HnswIndex::distance(const float* query, std::uint32_t node) const {
  return 1.0 - dot(query, vectors_.row(node).data(), vectors_.dim());
}

std::size_t HnswIndex::max_degree(int level) const {
  return level == 0 ? 2 * std::size_t{config().hnsw_m} : std::size_t{config().hnsw_m};
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(const float* query,
                                                          const std::vector<Candidate>& entry,
                                                          std::size_t ef, int level) const {
  thread_local VisitedSet visited;
  visited.reset(vectors_.rows());
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
  std::priority_queue<Candidate> nearest;  // top is the farthest kept
  for (const auto& c : entry) {
    if (!visited.insert(c.node)) continue;
    frontier.push(c);
    nearest.push(c);
    if (nearest.size() > ef) nearest.pop();
  }
  while (!frontier.empty()) {
    const Candidate current = frontier.top();
    frontier.pop();
    if (nearest.size() >= ef && nearest.top() < current) break;
    for (auto next : links_[current.node][static_cast<std::size_t>(level)]) {
      if (!visited.insert(next)) continue;
      const Candidate c{distance(query, next), next};
      if (nearest.size() < ef || c < nearest.top()) {
        frontier.push(c);
        nearest.push(c);
        if (nearest.size() > ef) nearest.pop();
      }
    }
  }
  std::vector<Candidate> out;
  out.reserve(nearest.size());
  while (!nearest.empty()) {
    out.push_back(nearest.top());
    nearest.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::uint32_t HnswIndex::greedy_descend(const float* query, std::uint32_t entry, int from_level,
                                        int to_level) const {
  Candidate best{distance(query, entry), entry};
  for (int level = from_level; level > to_level; --level) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (auto next : links_[best.node][static_cast<std::size_t>(level)]) {
        const Candidate c{distance(query, next), next};
        if (c < best) {
          best = c;
          improved = true;
        }
      }
    }
  }
  return best.node;
}

// Keeps a candidate only if it is closer to the base point than to every
// neighbor already kept; remaining slots are then filled with the pruned
// candidates in distance order.
std::vector<std::uint32_t> HnswIndex::select_neighbors(const std::vector<Candidate>& sorted,
                                                       std::size_t max_count) const {
  std::vector<std::uint32_t> kept;
  std::vector<std::uint32_t> pruned;
  const std::size_t dim = vectors_.dim();
  for (const auto& c : sorted) {
    if (kept.size() >= max_count) break;
    bool diverse = true;
    for (auto r : kept) {
      const double d = 1.0 - dot(vectors_.row(c.node).data(), vectors_.row(r).data(), dim);
      if (d < c.distance) {
        diverse = false;
        break;
      }
    }
    (diverse ? kept : pruned).push_back(c.node);
  }
  for (auto p : pruned) {
    if (kept.size() >= max_count) break;
    kept.push_back(p);
  }
  return kept;
}

void HnswIndex::shrink(std::uint32_t node, int level) {
  auto& list = links_[node][static_cast<std::size_t>(level)];
  const float* base = vectors_.row(node).data();
  std::vector<Candidate> cands;
  cands.reserve(list.size());
  for (auto nb : list) cands.push_back({distance(base, nb), nb});
  std::sort(cands.begin(), cands.end());
  list = select_neighbors(cands, max_degree(level));
}

void HnswIndex::insert(std::uint32_t node, int level) {
  links_[node].resize(static_cast<std::size_t>(level) + 1);
  if (max_level_ < 0) {
    entry_point_ = node;
    max_level_ = level;
    return;
  }
  const float* query = vectors_.row(node).data();
  std::uint32_t ep = greedy_descend(query, entry_point_, max_level_, level);
  std::vector<Candidate> entry{{distance(query, ep), ep}};
  const std::size_t ef = std::max<std::size_t>(config().hnsw_ef_construction, 1);
  for (int l = std::min(level, max_level_); l >= 0; --l) {
    auto found = search_layer(query, entry, ef, l);
    auto neighbors = select_neighbors(found, config().hnsw_m);
    links_[node][static_cast<std::size_t>(l)] = neighbors;
    for (auto nb : neighbors) {
      auto& back = links_[nb][static_cast<std::size_t>(l)];
      back.push_back(node);
      if (back.size() > max_degree(l)) shrink(nb, l);
    }
    entry = std::move(found);
  }
  if (level > max_level_) {
    max_level_ = level;
    entry_point_ = node;
  }
}

IndexSummary HnswIndex::summary() const {
  IndexSummary s;
  s.hnsw_max_level = max_level_;
  const std::size_t levels = static_cast<std::size_t>(std::max(max_level_, 0)) + 1;
  s.hnsw_nodes_per_level.assign(levels, 0);
  s.hnsw_max_degree.assign(levels, 0);
  for (std::size_t node = 0; node < links_.size(); ++node) {
    for (std::size_t l = 0; l < links_[node].size(); ++l) {
      ++s.hnsw_nodes_per_level[l];
      s.hnsw_max_degree[l] = std::max(s.hnsw_max_degree[l], links_[node][l].size());
      for (auto nb : links_[node][l]) {
        if (links_[nb].size() <= l) s.hnsw_levels_nested = false;
      }
    }
  }
  return s;
}

std::vector<SearchHit> HnswIndex::search(EmbeddingView query, std::size_t k,
                                         const SearchOptions& options) const {
  check_query(*this, query, k);
  const std::size_t ef = std::max<std::size_t>(options.ef_search.value_or(config().hnsw_ef_search), k);
  const std::uint32_t ep = greedy_descend(query.data(), entry_point_, max_level_, 0);
  const auto found = search_layer(query.data(), {{distance(query.data(), ep), ep}}, ef, 0);
  TopK top(k);
  for (const auto& c : found) {
    top.push(c.node, dot(query.data(), vectors_.row(c.node).data(), vectors_.dim()));
  }
  return top.take();
}

void HnswIndex::write_payload(std::ostream& out) const {
  binary::write_f32_array(out, vectors_.values());
  binary::write_le<std::uint32_t>(out, entry_point_);
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(max_level_));
  for (const auto& levels : links_) {
    binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(levels.size()));
    for (const auto& list : levels) {
      binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(list.size()));
      for (auto nb : list) binary::write_le<std::uint32_t>(out, nb);
    }
  }
}

std::unique_ptr<VectorIndex> HnswIndex::read_payload(std::istream& in, IndexConfig config,
                                                     std::size_t count, std::size_t dim) {
  std::vector<float> values(count * dim);
  binary::read_f32_array(in, values);
  std::unique_ptr<HnswIndex> index(
      new HnswIndex(config, EmbeddingMatrix(count, dim, std::move(values)), true));
  index->entry_point_ = binary::read_le<std::uint32_t>(in);
  index->max_level_ = static_cast<int>(binary::read_le<std::uint32_t>(in));
  if (index->entry_point_ >= count || index->max_level_ < 0 || index->max_level_ > 64) {
    throw Error(ErrorCode::kFormat, "implausible graph header");
  }
  index->links_.resize(count);
  for (auto& levels : index->links_) {
    const auto n_levels = binary::read_le<std::uint32_t>(in);
    if (n_levels == 0 || n_levels > static_cast<std::uint32_t>(index->max_level_) + 1) {
      throw Error(ErrorCode::kFormat, "implausible node level");
    }
    levels.resize(n_levels);
    for (auto& list : levels) {
      const auto degree = binary::read_le<std::uint32_t>(in);
      if (degree > count) throw Error(ErrorCode::kFormat, "implausible node degree");
      list.resize(degree);
      for (auto& nb : list) {
        nb = binary::read_le<std::uint32_t>(in);
        if (nb >= count) throw Error(ErrorCode::kFormat, "neighbor out of range");
      }
    }
  }
  return index;
}

}  // namespace reliefmatch::detail
