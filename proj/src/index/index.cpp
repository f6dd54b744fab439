#include "reliefmatch/index.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "backends.hpp"
#include "binary_io.hpp"

namespace reliefmatch {

namespace {

constexpr std::string_view kBackendNames[] = {"exhaustive", "ivf", "ivfpq", "hnsw"};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void require_positive(std::uint32_t value, const char* name) {
  if (value == 0) {
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must be positive");
  }
}

bool uses_partitions(IndexBackend b) {
  return b == IndexBackend::kIvf || b == IndexBackend::kIvfPq;
}

}  // namespace

std::string_view to_string(IndexBackend backend) {
  return kBackendNames[static_cast<std::size_t>(backend)];
}

IndexBackend parse_index_backend(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kBackendNames); ++i) {
    if (name == kBackendNames[i]) return static_cast<IndexBackend>(i);
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown backend '" + std::string(name) + "' (exhaustive|ivf|ivfpq|hnsw)");
}

void IndexConfig::validate() const {
  if (static_cast<std::size_t>(backend) >= std::size(kBackendNames)) {
    throw Error(ErrorCode::kInvalidArgument, "unknown backend tag");
  }
  require_positive(ivf_partitions, "ivf_partitions");
  require_positive(ivf_nprobe, "ivf_nprobe");
  require_positive(pq_m, "pq_m");
  require_positive(hnsw_m, "hnsw_m");
  require_positive(hnsw_ef_construction, "hnsw_ef_construction");
  require_positive(hnsw_ef_search, "hnsw_ef_search");
  require_positive(kmeans_iters, "kmeans_iters");
  if (ivf_nprobe > ivf_partitions) {
    throw Error(ErrorCode::kInvalidArgument, "ivf_nprobe " + std::to_string(ivf_nprobe) +
                                                 " exceeds ivf_partitions " +
                                                 std::to_string(ivf_partitions));
  }
  if (pq_bits < 1 || pq_bits > 8) {
    throw Error(ErrorCode::kInvalidArgument,
                "pq_bits must be in [1, 8], got " + std::to_string(pq_bits));
  }
}

std::string IndexConfig::describe() const {
  const auto n = [](auto v) { return std::to_string(v); };
  switch (backend) {
    case IndexBackend::kExhaustive:
      return "exhaustive";
    case IndexBackend::kIvf:
      return "ivf(part=" + n(ivf_partitions) + ",np=" + n(ivf_nprobe) + ")";
    case IndexBackend::kIvfPq:
      return "ivfpq(part=" + n(ivf_partitions) + ",np=" + n(ivf_nprobe) + ",m=" + n(pq_m) +
             ",bits=" + n(pq_bits) + ")";
    case IndexBackend::kHnsw:
      return "hnsw(m=" + n(hnsw_m) + ",efc=" + n(hnsw_ef_construction) +
             ",efs=" + n(hnsw_ef_search) + ")";
  }
  return "unknown";
}

namespace detail {

void check_query(const VectorIndex& index, EmbeddingView query, std::size_t k) {
  if (query.size() != index.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "query dim " + std::to_string(query.size()) +
                                                   " != index dim " + std::to_string(index.dim()));
  }
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
}

}  // namespace detail

BuiltIndex build_index(const EmbeddingMatrix& embeddings, const IndexConfig& config) {
  config.validate();
  const std::size_t n = embeddings.rows();
  const std::size_t dim = embeddings.dim();
  if (n == 0) throw Error(ErrorCode::kTooFewVectors, "cannot index an empty corpus");
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "corpus exceeds 2^32 rows");
  }
  if (uses_partitions(config.backend) && n < config.ivf_partitions) {
    throw Error(ErrorCode::kTooFewVectors, std::to_string(n) + " vectors for " +
                                               std::to_string(config.ivf_partitions) +
                                               " partitions");
  }
  if (config.backend == IndexBackend::kIvfPq && dim % config.pq_m != 0) {
    throw Error(ErrorCode::kDimNotDivisible,
                "dim " + std::to_string(dim) + " not divisible by pq_m " +
                    std::to_string(config.pq_m));
  }

  BuiltIndex built;
  const auto start = std::chrono::steady_clock::now();
  switch (config.backend) {
    case IndexBackend::kExhaustive:
      built.index = std::make_unique<detail::ExhaustiveIndex>(config, embeddings);
      break;
    case IndexBackend::kIvf: {
      auto lists = detail::train_inverted_lists(embeddings, config, built.stats);
      built.index =
          std::make_unique<detail::IvfIndex>(config, dim, n, std::move(lists), embeddings);
      break;
    }
    case IndexBackend::kIvfPq: {
      auto lists = detail::train_inverted_lists(embeddings, config, built.stats);
      auto pq = detail::ProductQuantizer::train(embeddings, config, built.stats);
      built.index = std::make_unique<detail::IvfPqIndex>(config, dim, n, std::move(lists),
                                                         std::move(pq), embeddings);
      break;
    }
    case IndexBackend::kHnsw:
      built.index = std::make_unique<detail::HnswIndex>(config, embeddings);
      break;
  }
  built.stats.index_time_ms = elapsed_ms(start);
  return built;
}

TimedSearch timed_search(const VectorIndex& index, EmbeddingView query, std::size_t k,
                         const SearchOptions& options) {
  TimedSearch out;
  const auto start = std::chrono::steady_clock::now();
  out.hits = index.search(query, k, options);
  out.stats.search_time_ms = elapsed_ms(start);
  return out;
}

double recall_at_k(const VectorIndex& index, const VectorIndex& oracle,
                   const EmbeddingMatrix& queries, std::size_t k, const SearchOptions& options) {
  if (index.size() != oracle.size() || index.dim() != oracle.dim()) {
    throw Error(ErrorCode::kCorpusMismatch, "index and oracle cover different corpora");
  }
  if (queries.empty()) throw Error(ErrorCode::kInvalidArgument, "no queries");
  double total = 0.0;
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    const auto exact = oracle.search(queries.row(q), k);
    const auto approx = index.search(queries.row(q), k, options);
    std::unordered_set<std::uint32_t> truth;
    for (const auto& h : exact) truth.insert(h.row);
    std::size_t hit = 0;
    for (const auto& h : approx) hit += truth.count(h.row);
    total += static_cast<double>(hit) / static_cast<double>(exact.size());
  }
  return total / static_cast<double>(queries.rows());
}

void save_index(std::ostream& out, const VectorIndex& index) {
  const auto& c = index.config();
  binary::write_magic(out, kIndexMagic);
  binary::write_le<std::uint32_t>(out, kIndexVersion);
  binary::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(index.backend()));
  for (auto v : {c.ivf_partitions, c.ivf_nprobe, c.pq_m, c.pq_bits, c.hnsw_m,
                 c.hnsw_ef_construction, c.hnsw_ef_search, c.kmeans_iters}) {
    binary::write_le<std::uint32_t>(out, v);
  }
  binary::write_le<std::uint64_t>(out, c.seed);
  binary::write_le<std::uint64_t>(out, index.size());
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.dim()));
  index.write_payload(out);
  if (!out) throw Error(ErrorCode::kIo, "failed writing index");
}

void save_index(const std::filesystem::path& path, const VectorIndex& index) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  save_index(out, index);
}

std::unique_ptr<VectorIndex> load_index(std::istream& in) {
  binary::expect_magic(in, kIndexMagic);
  const auto version = binary::read_le<std::uint32_t>(in);
  if (version != kIndexVersion) {
    throw Error(ErrorCode::kFormat, "unsupported index version " + std::to_string(version));
  }
  const auto tag = binary::read_le<std::uint8_t>(in);
  if (tag >= std::size(kBackendNames)) {
    throw Error(ErrorCode::kFormat, "unknown backend tag " + std::to_string(tag));
  }
  IndexConfig c;
  c.backend = static_cast<IndexBackend>(tag);
  for (auto* field : {&c.ivf_partitions, &c.ivf_nprobe, &c.pq_m, &c.pq_bits, &c.hnsw_m,
                      &c.hnsw_ef_construction, &c.hnsw_ef_search, &c.kmeans_iters}) {
    *field = binary::read_le<std::uint32_t>(in);
  }
  c.seed = binary::read_le<std::uint64_t>(in);
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, std::string("stored config invalid: ") + e.what());
  }
  const auto count = binary::read_le<std::uint64_t>(in);
  const auto dim = binary::read_le<std::uint32_t>(in);
  if (count == 0 || dim == 0 || count > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kFormat, "implausible index shape");
  }
  switch (c.backend) {
    case IndexBackend::kExhaustive:
      return detail::ExhaustiveIndex::read_payload(in, c, count, dim);
    case IndexBackend::kIvf:
      return detail::IvfIndex::read_payload(in, c, count, dim);
    case IndexBackend::kIvfPq:
      return detail::IvfPqIndex::read_payload(in, c, count, dim);
    case IndexBackend::kHnsw:
      return detail::HnswIndex::read_payload(in, c, count, dim);
  }
  throw Error(ErrorCode::kFormat, "unreachable backend");
}

std::unique_ptr<VectorIndex> load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return load_index(in);
}

}  // namespace reliefmatch
