#include "reliefmatch/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "file_io.hpp"
#include "reliefmatch/error.hpp"

namespace reliefmatch {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

template <class T>
T parse_unsigned(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kInvalidArgument, key + ": expected a non-negative integer, got '" +
                                                 value + "'");
  }
  return out;
}

std::string format_time(const TimeStats& t) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.3f--%.3f (%.3f)", t.min_ms, t.max_ms, t.mean_ms);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

TimeStats TimeStats::of(const std::vector<double>& samples_ms) {
  TimeStats t;
  if (samples_ms.empty()) return t;
  t.min_ms = *std::min_element(samples_ms.begin(), samples_ms.end());
  t.max_ms = *std::max_element(samples_ms.begin(), samples_ms.end());
  double sum = 0.0;
  for (double s : samples_ms) sum += s;
  t.mean_ms = sum / static_cast<double>(samples_ms.size());
  return t;
}

std::vector<BenchRow> bench_indices(const EmbeddingMatrix& corpus,
                                    const std::vector<IndexConfig>& configs,
                                    const EmbeddingMatrix& queries, const BenchOptions& options) {
  if (options.reps < 3) throw Error(ErrorCode::kInvalidArgument, "reps must be at least 3");
  if (configs.empty()) throw Error(ErrorCode::kInvalidArgument, "no index configs given");
  if (options.k_values.empty()) throw Error(ErrorCode::kInvalidArgument, "no k values given");
  for (auto k : options.k_values) {
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  }
  if (queries.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "no queries given");
  if (queries.dim() != corpus.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "query dim does not match corpus dim");
  }
  if (options.targets) {
    if (options.targets->size() != queries.rows()) {
      throw Error(ErrorCode::kInvalidArgument, "one target row per query is required");
    }
    for (auto t : *options.targets) {
      if (t >= corpus.rows()) throw Error(ErrorCode::kInvalidArgument, "target row out of range");
    }
  }
  for (const auto& c : configs) c.validate();

  const auto exhaustive = build_index(corpus, IndexConfig{}).index;

  std::vector<BenchRow> rows;
  for (const auto& config : configs) {
    std::vector<double> build_ms;
    BuiltIndex built;
    for (std::size_t rep = 0; rep < options.reps; ++rep) {
      built = build_index(corpus, config);
      build_ms.push_back(built.stats.index_time_ms);
    }
    const VectorIndex& index = *built.index;

    for (auto k : options.k_values) {
      for (std::size_t q = 0; q < queries.rows(); ++q) (void)index.search(queries.row(q), k);

      std::vector<double> search_ms;
      search_ms.reserve(options.reps * queries.rows());
      for (std::size_t rep = 0; rep < options.reps; ++rep) {
        for (std::size_t q = 0; q < queries.rows(); ++q) {
          const auto start = Clock::now();
          auto hits = index.search(queries.row(q), k);
          search_ms.push_back(elapsed_ms(start));
          (void)hits;
        }
      }

      BenchRow row;
      row.config = config;
      row.k = k;
      row.index = TimeStats::of(build_ms);
      row.search = TimeStats::of(search_ms);
      row.recall = recall_at_k(index, *exhaustive, queries, k);
      row.warnings = built.stats.warnings;
      if (options.targets) {
        std::size_t hit = 0;
        for (std::size_t q = 0; q < queries.rows(); ++q) {
          const auto hits = index.search(queries.row(q), k);
          const auto want = (*options.targets)[q];
          if (std::any_of(hits.begin(), hits.end(), [&](const SearchHit& h) { return h.row == want; })) {
            ++hit;
          }
        }
        row.target_hit_rate = static_cast<double>(hit) / static_cast<double>(queries.rows());
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "backend,params,k,index_ms_min,index_ms_max,index_ms_mean,search_ms_min,search_ms_max,"
         "search_ms_mean,recall,target_hit_rate\n";
  for (const auto& r : rows) {
    out << to_string(r.config.backend) << ',' << csv_field(r.config.describe()) << ',' << r.k << ','
        << fixed(r.index.min_ms, 6) << ',' << fixed(r.index.max_ms, 6) << ','
        << fixed(r.index.mean_ms, 6) << ',' << fixed(r.search.min_ms, 6) << ','
        << fixed(r.search.max_ms, 6) << ',' << fixed(r.search.mean_ms, 6) << ','
        << fixed(r.recall, 6) << ',' << (r.target_hit_rate ? fixed(*r.target_hit_rate, 6) : "")
        << '\n';
  }
  return out.str();
}

std::string bench_to_table(const std::vector<BenchRow>& rows) {
  std::vector<std::size_t> ks;
  std::vector<std::string> labels;
  for (const auto& r : rows) {
    if (std::find(ks.begin(), ks.end(), r.k) == ks.end()) ks.push_back(r.k);
    const auto label = r.config.describe();
    if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
  }
  const bool with_targets =
      std::any_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.target_hit_rate; });

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"", "Index time"};
  for (auto k : ks) {
    head.push_back("k=" + std::to_string(k) + " search time");
    head.push_back("recall");
    if (with_targets) head.push_back("acc.");
  }
  cells.push_back(head);
  for (const auto& label : labels) {
    std::vector<std::string> line{label, ""};
    for (auto k : ks) {
      auto it = std::find_if(rows.begin(), rows.end(), [&](const BenchRow& r) {
        return r.k == k && r.config.describe() == label;
      });
      if (it == rows.end()) {
        line.insert(line.end(), with_targets ? 3 : 2, "-");
        continue;
      }
      line[1] = format_time(it->index);
      line.push_back(format_time(it->search));
      line.push_back(fixed(it->recall, 3));
      if (with_targets) line.push_back(it->target_hit_rate ? fixed(*it->target_hit_rate, 3) : "-");
    }
    cells.push_back(line);
  }

  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream out;
  out << "times in milliseconds: min--max (mean)\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t c = 0; c < cells[i].size(); ++c) {
      out << cells[i][c];
      if (c + 1 == cells[i].size()) {
        out << '\n';
      } else {
        out << std::string(width[c] - cells[i][c].size() + 2, ' ');
      }
    }
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out << std::string(total - 2, '-') << '\n';
    }
  }
  return out.str();
}

bool apply_index_setting(IndexConfig& config, const std::string& raw_key, const std::string& value) {
  std::string key = raw_key;
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "backend") {
    config.backend = parse_index_backend(value);
  } else if (key == "partitions" || key == "ivf_partitions") {
    config.ivf_partitions = parse_unsigned<std::size_t>(key, value);
  } else if (key == "nprobe" || key == "ivf_nprobe") {
    config.ivf_nprobe = parse_unsigned<std::size_t>(key, value);
  } else if (key == "pq_m") {
    config.pq_m = parse_unsigned<std::size_t>(key, value);
  } else if (key == "pq_bits") {
    config.pq_bits = parse_unsigned<std::size_t>(key, value);
  } else if (key == "hnsw_m") {
    config.hnsw_m = parse_unsigned<std::size_t>(key, value);
  } else if (key == "ef_construction" || key == "hnsw_ef_construction") {
    config.hnsw_ef_construction = parse_unsigned<std::size_t>(key, value);
  } else if (key == "ef_search" || key == "hnsw_ef_search") {
    config.hnsw_ef_search = parse_unsigned<std::size_t>(key, value);
  } else if (key == "kmeans_iters") {
    config.kmeans_iters = parse_unsigned<std::size_t>(key, value);
  } else if (key == "seed") {
    config.seed = parse_unsigned<std::uint64_t>(key, value);
  } else {
    return false;
  }
  return true;
}

std::vector<IndexConfig> read_bench_configs(const std::string& path, const IndexConfig& defaults) {
  std::vector<IndexConfig> out;
  auto in = detail::open_in(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    IndexConfig config = defaults;
    bool any = false;
    try {
      while (tokens >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw Error(ErrorCode::kFormat, "expected key=value, got '" + token + "'");
        }
        if (!apply_index_setting(config, token.substr(0, eq), token.substr(eq + 1))) {
          throw Error(ErrorCode::kFormat, "unknown key '" + token.substr(0, eq) + "'");
        }
        any = true;
      }
      if (any) {
        config.validate();
        out.push_back(config);
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::kFormat, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw Error(ErrorCode::kFormat, path + ": no configs");
  return out;
}

}  // namespace reliefmatch
